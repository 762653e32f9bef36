"""Named cheating strategies, each a drop-in replacement for an honest party.

Every strategy also accepts the ``timing``/``superluminal`` maps of the
honest base classes, which is how the timing-violation fixtures are built.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from vbct import qstate
from vbct.errors import ParameterError
from vbct.protocols.base import ProtocolId, Refuse, RunContext
from vbct.protocols.strategies import (
    AliceStrategy,
    BobStrategy,
    PairBatch,
    RoundChoice,
    vbct1_states,
)
from vbct.relcommit import equivocation_key, int_to_bits

# --------------------------------------------------------------------------
# Alice
# --------------------------------------------------------------------------


class AliceVBCT1Substitution(AliceStrategy):
    """In a ``gamma`` fraction of rounds send sqrt(p+d)|s> + sqrt(1-p-d)|s'>
    in the |+>,|-> basis (s random, p = p_max) and declare label s, the
    declaration that maximises the chance of passing B1's test."""

    name = "vbct1_substitution"

    def __init__(self, delta: float, gamma: float = 1.0, **kw):
        super().__init__(**kw)
        if not 0.0 < gamma <= 1.0:
            raise ParameterError(f"gamma={gamma!r} outside (0, 1]")
        self.delta = float(delta)
        self.gamma = float(gamma)
        self._cache: dict[float, tuple] = {}

    def _states(self, theta: float):
        states = self._cache.get(theta)
        if states is None:
            p = 0.5 * (1 + math.sin(theta))
            hi = p + self.delta
            if not 0.0 <= hi <= 1.0:
                raise ParameterError(f"p_max + delta = {hi!r} outside [0, 1]")
            a, b = math.sqrt(hi), math.sqrt(1.0 - hi)
            plus, minus = qstate.PLUS.amplitudes, qstate.MINUS.amplitudes
            states = (qstate.StateVector(a * plus + b * minus), qstate.StateVector(a * minus + b * plus))
            self._cache[theta] = states
        return states

    def vbct1_round(self, ctx: RunContext, i: int) -> RoundChoice:
        theta = ctx.params.bias.theta
        label = 1 if ctx.rng.random() < 0.5 else 0
        if ctx.rng.random() >= self.gamma:
            return RoundChoice(vbct1_states(theta)[label], label)
        return RoundChoice(self._states(theta)[label], label, cheat=self.delta != 0.0)


class AliceZMismatch(AliceStrategy):
    """One A agent says z=0 while the other says z=1, on the first batch."""

    name = "z_mismatch"

    def __init__(self, zero_agent: int = 2, **kw):
        super().__init__(**kw)
        if zero_agent not in (1, 2):
            raise ParameterError("zero_agent must be 1 or 2")
        self.zero_agent = zero_agent

    def z_values(self, ctx: RunContext, batch: int) -> tuple[int, int]:
        return (0, 1) if self.zero_agent == 1 else (1, 0)


class AliceSupplementarySabotage(AliceStrategy):
    """Honest until the outcome is known; if it is not ``target`` she flips
    her returned halves so the post-outcome test fails."""

    name = "supplementary_sabotage"

    def __init__(self, target: int = 0, **kw):
        super().__init__(**kw)
        self.target = int(target)

    def return_halves(self, ctx: RunContext, batch: PairBatch, keep: int, outcome: int) -> np.ndarray:
        rest = np.delete(batch.amps, keep, axis=0)
        if outcome == self.target:
            return rest
        d = batch.d
        # |jk> -> |j, k+1 mod d>: orthogonal to every sum_j a_j |jj>
        perm = np.array([j * d + (k - 1) % d for j in range(d) for k in range(d)])
        return rest[:, perm]


class AliceRefuse(AliceStrategy):
    """Walks away at the first decision point."""

    name = "refuse"

    def vbct1_round(self, ctx, i):
        raise Refuse("alice")

    def z_values(self, ctx, batch):
        raise Refuse("alice")

    def audit_pairs(self, ctx, M):
        raise Refuse("alice")


class AliceTimingDeviant(AliceStrategy):
    """Honest choices, deviant timing (see the ``timing`` map)."""

    name = "timing_deviant"


class AlicePrematureChallenge(AliceStrategy):
    """VBCT3: A2 opens the commitment after ``wait`` instead of D/2."""

    name = "premature_challenge"

    def __init__(self, wait: float, **kw):
        super().__init__(**kw)
        self.wait = float(wait)

    def z_values(self, ctx, batch):
        return 0, 0

    def challenge_delay(self, ctx):
        return self.wait * ctx.params.sites.D


# --------------------------------------------------------------------------
# Bob
# --------------------------------------------------------------------------


class BobVBCT1Measure(BobStrategy):
    """Measure the chosen qubit at Bloch angle ``basis_angle`` and announce
    the outcome, flipped when ``flip`` is set (on top of the input w)."""

    name = "vbct1_measure"

    def __init__(self, basis_angle: float = math.pi / 2, flip: int = 0, w: int | None = 0, **kw):
        super().__init__(w, **kw)
        if not 0.0 <= basis_angle < math.pi:
            raise ParameterError("basis_angle must lie in [0, pi)")
        if flip not in (0, 1):
            raise ParameterError("flip must be 0 or 1")
        self.basis_angle = float(basis_angle)
        self.flip = flip

    def vbct1_flip(self, ctx: RunContext) -> int:
        return ctx.bob_input ^ self.flip


class BobVBCT2Substitution(BobStrategy):
    """Replace a ``fraction`` of the |psi_0> states by
    sqrt(p_max+delta)|00> + sqrt(1-p_max-delta)|11>, still declared |psi_0>,
    and use one of them whenever trusted with input 0."""

    name = "vbct2_substitution"

    def __init__(self, delta: float, fraction: float = 1.0, w: int | None = 0, **kw):
        super().__init__(w, **kw)
        if not 0.0 < fraction <= 1.0:
            raise ParameterError("fraction must lie in (0, 1]")
        self.delta = float(delta)
        self.fraction = float(fraction)

    def prepare_batch(self, ctx: RunContext, table: np.ndarray, N: int) -> PairBatch:
        batch = super().prepare_batch(ctx, table, N)
        hi = ctx.params.bias.p_max + self.delta
        if not 0.0 <= hi <= 1.0:
            raise ParameterError(f"p_max + delta = {hi!r} outside [0, 1]")
        pick = (batch.labels == 0) & (ctx.rng.random(N) < self.fraction)
        if self.delta != 0.0 and pick.any():
            amps = batch.amps.copy()
            amps[pick] = qstate.make_pair_state(hi).amplitudes
            batch = PairBatch(batch.labels, amps, pick, batch.d)
        return batch

    def choose_index(self, ctx: RunContext, batch: PairBatch, target: int) -> int:
        if target == 0 and batch.cheat.any():
            candidates = np.flatnonzero(batch.cheat)
            return int(candidates[ctx.rng.integers(candidates.size)])
        return super().choose_index(ctx, batch, target)


class BobVBCT3Equivocate(BobStrategy):
    """Commits honestly, then B1 tries to open a different index. B1 has not
    seen the challenge, so he guesses it uniformly."""

    name = "vbct3_equivocate"

    def vbct3_unveil(self, ctx: RunContext, index: int, key: np.ndarray, bits: int):
        v = int_to_bits(index, bits)
        other = v ^ 1
        guess = ctx.rng.integers(0, 2, size=key.size, dtype=np.uint8)
        return other, equivocation_key(v, key, other, guess)


class BobVBCT4Malformed(BobStrategy):
    """One row pair (``pair``, random if None) holds two rows with the same
    zero count, the count matching Bob's input."""

    name = "vbct4_malformed"

    def __init__(self, w: int | None = 0, pair: int | None = None, **kw):
        super().__init__(w, **kw)
        self.pair = pair

    def vbct4_matrix(self, ctx, M, N, zeros):
        matrix, types = super().vbct4_matrix(ctx, M, N, zeros)
        m = int(ctx.rng.integers(M)) if self.pair is None else self.pair
        if not 0 <= m < M:
            raise ParameterError(f"pair {m} outside 0..{M - 1}")
        rows = [2 * m, 2 * m + 1]
        types = types.copy()
        types[rows] = ctx.bob_input
        fresh = ctx.rng.random((2, N)).argsort(axis=1).argsort(axis=1)
        matrix = matrix.copy()
        matrix[rows] = (fresh >= zeros[ctx.bob_input]).astype(np.uint8)
        return matrix, types


class BobRefuse(BobStrategy):
    """Walks away when asked to commit to a choice."""

    name = "refuse"

    def vbct1_guess(self, ctx, state):
        raise Refuse("bob")

    def choose_index(self, ctx, batch, target):
        raise Refuse("bob")

    def vbct4_row(self, ctx, pair, types, matrix):
        raise Refuse("bob")


class BobTimingDeviant(BobStrategy):
    """Honest choices, deviant timing (see the ``timing`` map)."""

    name = "timing_deviant"


# --------------------------------------------------------------------------
# factories and registry
# --------------------------------------------------------------------------


def alice_vbct1_substitution(delta: float, gamma: float = 1.0) -> AliceVBCT1Substitution:
    return AliceVBCT1Substitution(delta, gamma)


def bob_vbct1_measure(basis_angle: float, flip: int = 0, w: int | None = 0) -> BobVBCT1Measure:
    return BobVBCT1Measure(basis_angle, flip, w)


def alice_vbct2_z_mismatch(zero_agent: int = 2) -> AliceZMismatch:
    return AliceZMismatch(zero_agent)


def bob_vbct2_substitution(delta: float, fraction: float = 1.0, w: int | None = 0) -> BobVBCT2Substitution:
    return BobVBCT2Substitution(delta, fraction, w)


_ALL = [ProtocolId.VBCT1, ProtocolId.VBCT2, ProtocolId.VBCT3, ProtocolId.VBCT4, ProtocolId.DIE_ROLL]
_PAIRS = [ProtocolId.VBCT2, ProtocolId.VBCT3]

REGISTRY: dict[tuple[str, str], tuple[Callable[..., Any], list[ProtocolId]]] = {
    ("alice", "honest"): (AliceStrategy, _ALL),
    ("alice", "vbct1_substitution"): (AliceVBCT1Substitution, [ProtocolId.VBCT1]),
    ("alice", "z_mismatch"): (AliceZMismatch, _PAIRS),
    ("alice", "supplementary_sabotage"): (AliceSupplementarySabotage, _PAIRS),
    ("alice", "premature_challenge"): (AlicePrematureChallenge, [ProtocolId.VBCT3]),
    ("alice", "refuse"): (AliceRefuse, _ALL[:4]),
    ("alice", "timing_deviant"): (AliceTimingDeviant, _ALL),
    ("bob", "honest"): (BobStrategy, _ALL),
    ("bob", "vbct1_measure"): (BobVBCT1Measure, [ProtocolId.VBCT1]),
    ("bob", "vbct2_substitution"): (BobVBCT2Substitution, _PAIRS),
    ("bob", "vbct3_equivocate"): (BobVBCT3Equivocate, [ProtocolId.VBCT3]),
    ("bob", "vbct4_malformed"): (BobVBCT4Malformed, [ProtocolId.VBCT4]),
    ("bob", "refuse"): (BobRefuse, _ALL[:4]),
    ("bob", "timing_deviant"): (BobTimingDeviant, _ALL),
}


def strategy_names(party: str) -> list[str]:
    return sorted(n for p, n in REGISTRY if p == party)


@dataclass(frozen=True)
class StrategyDescriptor:
    """Serializable recipe for a strategy: party, protocol, name and parameters."""

    party: str
    protocol: ProtocolId
    name: str = "honest"
    parameters: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.party not in ("alice", "bob"):
            raise ParameterError(f"party must be alice or bob, not {self.party!r}")
        if not isinstance(self.protocol, ProtocolId):
            object.__setattr__(self, "protocol", ProtocolId(self.protocol))
        entry = REGISTRY.get((self.party, self.name))
        if entry is None:
            raise ParameterError(
                f"unknown {self.party} strategy {self.name!r}; valid: {', '.join(strategy_names(self.party))}")
        if self.protocol not in entry[1]:
            raise ParameterError(f"{self.party} strategy {self.name!r} does not apply to {self.protocol.value}")
        for k in ("delta", "gamma", "fraction"):
            v = self.parameters.get(k)
            if v is not None and k != "delta" and not 0.0 <= v <= 1.0:
                raise ParameterError(f"{k}={v!r} outside [0, 1]")

    def build(self):
        cls = REGISTRY[(self.party, self.name)][0]
        try:
            return cls(**self.parameters)
        except TypeError as exc:
            raise ParameterError(f"bad parameters for {self.party} strategy {self.name!r}: {exc}") from None


def make_strategy(descriptor: StrategyDescriptor):
    return descriptor.build()
