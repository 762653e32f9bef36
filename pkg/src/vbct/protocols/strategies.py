"""Honest party behaviour, written as overridable hooks.

Every protocol engine calls into an Alice strategy and a Bob strategy at
the points where a party makes a choice. The classes here follow the
protocols exactly; :mod:`vbct.adversary` subclasses them to deviate.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from vbct import qstate
from vbct.protocols.base import RunContext
from vbct.relcommit import int_to_bits


class RoundChoice(NamedTuple):
    state: qstate.StateVector
    label: int
    cheat: bool = False


class PairBatch:
    """One batch of bipartite states prepared by B1.

    ``amps[k]`` holds the amplitudes of state k over |jk> (B1's system
    first); ``labels`` are the identities Bob declares; ``cheat`` marks
    states that differ from what the label promises.
    """

    __slots__ = ("labels", "amps", "cheat", "d")

    def __init__(self, labels: np.ndarray, amps: np.ndarray, cheat: np.ndarray | None = None, d: int = 2):
        self.labels = labels
        self.amps = amps
        self.cheat = np.zeros(labels.size, dtype=bool) if cheat is None else cheat
        self.d = d

    def __len__(self):
        return self.labels.size


def _hook_params(obj) -> dict:
    return {k: v for k, v in vars(obj).items() if not k.startswith("_") and v not in (None, {})}


class _Timed:
    """Per-step timing deviations shared by both parties.

    ``timing`` shifts the emission of the named step by the given number of
    seconds. ``superluminal`` makes the named step arrive that many seconds
    earlier than light allows; such messages go through the fault API and
    the timeline aborts the run as soon as one is posted.
    """

    timing: dict[str, float] = {}
    superluminal: dict[str, float] = {}

    def _set_timing(self, timing, superluminal):
        if timing:
            self.timing = dict(timing)
        if superluminal:
            if any(v <= 0 for v in superluminal.values()):
                raise ValueError("superluminal shortfalls must be positive")
            self.superluminal = dict(superluminal)

    def shift(self, step: str) -> float:
        return self.timing.get(step, 0.0) if self.timing else 0.0

    def shortfall(self, step: str) -> float:
        return self.superluminal.get(step, 0.0) if self.superluminal else 0.0


class AliceStrategy(_Timed):
    name = "honest"

    def __init__(self, *, timing: dict[str, float] | None = None,
                 superluminal: dict[str, float] | None = None):
        self._set_timing(timing, superluminal)

    def describe(self) -> dict:
        return {"name": self.name, **_hook_params(self)}

    # VBCT1 -------------------------------------------------------------
    def vbct1_round(self, ctx: RunContext, i: int) -> RoundChoice:
        label = 1 if ctx.rng.random() < 0.5 else 0
        return RoundChoice(vbct1_states(ctx.params.bias.theta)[label], label)

    # VBCT2 / VBCT3 / die roll -----------------------------------------------
    def z_values(self, ctx: RunContext, batch: int) -> tuple[int, int]:
        """z announced by (A1, A2); 0 means trust, chosen with probability 2^-M."""
        z = 0 if ctx.rng.random() < 2.0 ** (-ctx.params.M) else 1
        return z, z

    def challenge_delay(self, ctx: RunContext) -> float:
        """How long A2 waits after announcing z=0 before opening the commitment."""
        return ctx.params.sites.D / 2

    def return_halves(self, ctx: RunContext, batch: PairBatch, keep: int, outcome: int) -> np.ndarray:
        """Joint states after A1 hands back every half except the one at ``keep``."""
        return np.delete(batch.amps, keep, axis=0)

    # VBCT4 ---------------------------------------------------------------
    def audit_pairs(self, ctx: RunContext, M: int) -> list[int]:
        return sorted(int(k) for k in ctx.rng.choice(M, size=M - 1, replace=False))

    def pick_column(self, ctx: RunContext, N: int) -> int:
        return int(ctx.rng.integers(N))


class BobStrategy(_Timed):
    """Honest Bob; ``w`` is his input (None draws it uniformly per run)."""

    name = "honest"

    def __init__(self, w: int | None = None, *, timing: dict[str, float] | None = None,
                 superluminal: dict[str, float] | None = None):
        if w is not None and not (isinstance(w, (int, np.integer)) and w >= 0):
            raise ValueError(f"bad Bob input {w!r}")
        self.w = None if w is None else int(w)
        self._set_timing(timing, superluminal)

    def describe(self) -> dict:
        return {"name": self.name, **_hook_params(self)}

    def resolve_input(self, ctx: RunContext, choices: int = 2) -> int:
        if self.w is None:
            return int(ctx.rng.integers(choices))
        if self.w >= choices:
            raise ValueError(f"Bob input {self.w} but only {choices} choices")
        return self.w

    # VBCT1 -------------------------------------------------------------
    def vbct1_n(self, ctx: RunContext) -> int:
        p = ctx.params
        if p.n_distribution == "fixed":
            return max(1, round(p.poisson_mean))
        while True:
            n = int(ctx.rng.poisson(p.poisson_mean))
            if n > 0:
                return n

    basis_angle = math.pi / 2

    def vbct1_flip(self, ctx: RunContext) -> int:
        return ctx.bob_input

    def vbct1_guess(self, ctx: RunContext, state: qstate.StateVector) -> tuple[int, int]:
        """Measure the chosen qubit; returns (measurement outcome b', announced bit b)."""
        p0 = first_outcome_probability(self.basis_angle, state)
        b_prime = qstate.born_index((p0, 1.0 - p0), ctx.rng.random())
        return b_prime, b_prime ^ self.vbct1_flip(ctx)

    # VBCT2 / VBCT3 / die roll -----------------------------------------------
    def prepare_batch(self, ctx: RunContext, table: np.ndarray, N: int) -> PairBatch:
        kinds = table.shape[0]
        while True:
            labels = ctx.rng.integers(0, kinds, size=N)
            if np.unique(labels).size == kinds:
                break
        d = int(round(math.sqrt(table.shape[1])))
        return PairBatch(labels, table[labels], None, d)

    def choose_index(self, ctx: RunContext, batch: PairBatch, target: int) -> int:
        candidates = np.flatnonzero(batch.labels == target)
        return int(candidates[ctx.rng.integers(candidates.size)])

    def vbct3_unveil(self, ctx: RunContext, index: int, key: np.ndarray, bits: int) -> tuple[np.ndarray, np.ndarray]:
        return int_to_bits(index, bits), key

    # VBCT4 ---------------------------------------------------------------
    def vbct4_matrix(self, ctx: RunContext, M: int, N: int, zeros: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
        """(2M x N bit matrix, row types); type 0 rows carry zeros[0] zeros."""
        first = ctx.rng.random(M) < 0.5
        types = np.empty(2 * M, dtype=np.int64)
        types[0::2] = np.where(first, 0, 1)
        types[1::2] = 1 - types[0::2]
        return _rows_with_zeros(ctx.rng, types, zeros, N), types

    def vbct4_open(self, ctx: RunContext, positions: np.ndarray, matrix: np.ndarray,
                   key_blocks: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Values and key blocks B1 sends to unveil the committed elements at ``positions``."""
        return matrix.reshape(-1)[positions], key_blocks[positions]

    def vbct4_row(self, ctx: RunContext, pair: int, types: np.ndarray, matrix: np.ndarray) -> int:
        rows = (2 * pair, 2 * pair + 1)
        for r in rows:
            if types[r] == ctx.bob_input:
                return r
        # malformed pair: take whichever row pushes hardest towards the input
        zeros = [(matrix[r] == 0).sum() for r in rows]
        return rows[int(np.argmax(zeros))] if ctx.bob_input == 0 else rows[int(np.argmin(zeros))]


def _rows_with_zeros(rng: np.random.Generator, types: np.ndarray, zeros: tuple[int, int], N: int) -> np.ndarray:
    ranks = np.argsort(rng.random((types.size, N)), axis=1).argsort(axis=1)
    counts = np.where(types == 0, zeros[0], zeros[1])[:, None]
    return (ranks >= counts).astype(np.uint8)


_P0_CACHE: dict[tuple[float, bytes], float] = {}


def first_outcome_probability(angle: float, state: qstate.StateVector) -> float:
    """Born probability of the first element of the rotated basis at ``angle``."""
    key = (angle, state.amplitudes.tobytes())
    p0 = _P0_CACHE.get(key)
    if p0 is None:
        e0, _ = rotated_basis_cached(angle)
        p0 = float(abs(np.vdot(e0.amplitudes, state.amplitudes)) ** 2)
        if len(_P0_CACHE) < 1024:
            _P0_CACHE[key] = p0
    return p0


_VBCT1_CACHE: dict[float, tuple[qstate.StateVector, qstate.StateVector]] = {}
_BASIS_CACHE: dict[float, tuple[qstate.StateVector, qstate.StateVector]] = {}


def vbct1_states(theta: float) -> tuple[qstate.StateVector, qstate.StateVector]:
    pair = _VBCT1_CACHE.get(theta)
    if pair is None:
        pair = (qstate.make_vbct1_state(theta, 0), qstate.make_vbct1_state(theta, 1))
        _VBCT1_CACHE[theta] = pair
    return pair


def rotated_basis_cached(angle: float) -> tuple[qstate.StateVector, qstate.StateVector]:
    b = _BASIS_CACHE.get(angle)
    if b is None:
        b = qstate.rotated_basis(angle)
        _BASIS_CACHE[angle] = b
    return b
