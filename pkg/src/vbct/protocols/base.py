"""Shared protocol machinery: parameters, outcomes, transcripts, timelines."""
from __future__ import annotations

import enum
import hashlib
import threading
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from vbct.errors import ContractError, ParameterError
from vbct.qstate import BiasParams
from vbct.spacetime import (
    Constraint,
    Site,
    SiteConfig,
    TimedMessage,
    Violation,
    ViolationKind,
    check_constraint,
    distance,
)


class ProtocolId(enum.Enum):
    VBCT1 = "vbct1"
    VBCT2 = "vbct2"
    VBCT3 = "vbct3"
    VBCT4 = "vbct4"
    DIE_ROLL = "die_roll"


class AbortReason(enum.Enum):
    TIMING = "timing"
    FAILED_HONESTY_TEST = "failed_honesty_test"
    INVALID_UNVEIL = "invalid_unveil"
    REFUSAL = "refusal"
    Z_MISMATCH = "z_mismatch"
    POST_OUTCOME_TEST = "post_outcome_test"


@dataclass(frozen=True)
class Outcome:
    """Coin (or die) value, or ``None`` with a reason when the run aborted."""

    value: int | None
    abort_reason: AbortReason | None = None

    def __post_init__(self):
        if (self.value is None) == (self.abort_reason is None):
            raise ContractError("an outcome is either a value or an abort with a reason")

    @property
    def aborted(self) -> bool:
        return self.value is None

    @classmethod
    def abort(cls, reason: AbortReason) -> "Outcome":
        return cls(None, reason)

    def label(self) -> str:
        return "abort" if self.value is None else str(self.value)


class Refuse(Exception):
    """Raised by a strategy hook to walk away from the protocol."""


class TimingAbort(Exception):
    def __init__(self, violation: Violation):
        super().__init__(violation.constraint)
        self.violation = violation


_POINTS = {ProtocolId.VBCT1: 3}


@dataclass(frozen=True)
class ProtocolParams:
    """Everything a run needs besides the strategies and the seed.

    ``N`` is the batch size (VBCT2/3, die roll) or column count (VBCT4);
    ``M`` is the test exponent (VBCT2/3, die roll) or pair count (VBCT4).
    """

    protocol: ProtocolId
    bias: BiasParams | None = None
    N: int = 8
    M: int = 2
    poisson_mean: float = 50.0
    n_distribution: str = "poisson"
    L: int = 8
    supplementary_test: bool = False
    sites: SiteConfig | None = None
    timing_tolerance: float | None = None
    dice: tuple[tuple[float, ...], ...] = ()
    sustain_length: float | None = None

    def __post_init__(self):
        if not isinstance(self.protocol, ProtocolId):
            object.__setattr__(self, "protocol", ProtocolId(self.protocol))
        if self.sites is None:
            object.__setattr__(self, "sites", SiteConfig(points=_POINTS.get(self.protocol, 2)))
        if self.N < 2:
            raise ParameterError(f"N={self.N} must be at least 2")
        if self.M < 1:
            raise ParameterError(f"M={self.M} must be at least 1")
        if not self.poisson_mean > 0:
            raise ParameterError("poisson_mean must be positive")
        if self.L < 1:
            raise ParameterError("L must be at least 1")
        if self.n_distribution not in ("poisson", "fixed"):
            raise ParameterError(f"unknown n distribution {self.n_distribution!r}")
        p = self.protocol
        if p is ProtocolId.VBCT1:
            if self.bias is None or self.bias.theta is None:
                raise ParameterError("VBCT1 needs bias.theta")
            if self.sites.points < 3:
                raise ParameterError("VBCT1 needs three sites per party")
        elif p in (ProtocolId.VBCT2, ProtocolId.VBCT3, ProtocolId.VBCT4):
            if self.bias is None or self.bias.alpha0_sq is None:
                raise ParameterError(f"{p.value} needs alpha0_sq and alpha1_sq")
            if p is ProtocolId.VBCT4:
                for name, a in (("alpha0_sq", self.bias.alpha0_sq), ("alpha1_sq", self.bias.alpha1_sq)):
                    z = a * self.N
                    if abs(z - round(z)) > 1e-9:
                        raise ParameterError(f"{name}*N = {z!r} is not an integer")
        elif p is ProtocolId.DIE_ROLL:
            if len(self.dice) < 2:
                raise ParameterError("die roll needs at least two dice")
            faces = {len(d) for d in self.dice}
            if len(faces) != 1 or faces.pop() < 2:
                raise ParameterError("all dice need the same number (>= 2) of faces")
            for d in self.dice:
                if min(d) < 0 or abs(sum(d) - 1.0) > 1e-10:
                    raise ParameterError(f"die {d} is not a probability vector")

    @property
    def tolerance(self) -> float:
        if self.timing_tolerance is not None:
            return self.timing_tolerance
        return 1e-6 * self.sites.D

    @property
    def index_bits(self) -> int:
        return max(1, math.ceil(math.log2(self.N)))

    @property
    def zero_counts(self) -> tuple[int, int]:
        """Zeros per row in VBCT4: (for the p_max row, for the p_min row)."""
        return round(self.bias.alpha0_sq * self.N), round(self.bias.alpha1_sq * self.N)

    @property
    def sustain(self) -> float:
        return self.sustain_length if self.sustain_length is not None else 4.0 * self.sites.D


@dataclass
class Transcript:
    """Everything one run produced.

    ``records`` holds per-party measurement and bookkeeping entries,
    ``flags`` the detection summary used by the statistics layer.
    """

    protocol: ProtocolId
    seed: int
    bob_input: int
    alice_strategy: str
    bob_strategy: str
    messages: list[TimedMessage] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)
    outcome: Outcome | None = None
    records: dict[str, Any] = field(default_factory=dict)
    flags: dict[str, bool] = field(default_factory=dict)
    violations: list[Violation] = field(default_factory=list)

    def message(self, label: str) -> TimedMessage:
        for m in self.messages:
            if m.label == label:
                return m
        raise KeyError(label)

    def labels(self) -> list[str]:
        return [m.label for m in self.messages]

    def received_by(self, owner: str) -> list[TimedMessage]:
        return [m for m in self.messages if m.receiver.owner == owner]


class Timeline:
    """Collects a run's messages and checks each timing rule as soon as every
    message it mentions exists."""

    def __init__(self):
        self.messages: list[TimedMessage] = []
        self.constraints: list[Constraint] = []
        self._index: dict[str, TimedMessage] = {}
        self._waiting: dict[str, list[list]] = {}
        self.violations: list[Violation] = []

    def add(self, m: TimedMessage) -> TimedMessage:
        index = self._index
        if m.label in index:
            raise ContractError(f"duplicate message label {m.label!r}")
        self.messages.append(m)
        index[m.label] = m
        if m.faulty and m.is_superluminal():
            v = Violation(ViolationKind.SUPERLUMINAL, m.label, (m.emission, m.reception))
            self.violations.append(v)
            raise TimingAbort(v)
        if self._waiting:
            for slot in self._waiting.pop(m.label, ()):
                slot[1] -= 1
                if slot[1] == 0:
                    self._evaluate(slot[0])
        return m

    def send(self, label: str, sender: Site, receiver: Site, emit_time: float, payload=None) -> TimedMessage:
        return self.add(TimedMessage.send(label, sender, receiver, emit_time, payload))

    def require(self, c: Constraint) -> None:
        self.constraints.append(c)
        idx = self._index
        ra, rb = c.refs
        a, b = ra.label, rb.label
        if a in idx and b in idx:
            self._evaluate(c)
            return
        missing = {r.label for r in c.refs if r.label not in idx}
        if not missing:
            self._evaluate(c)
            return
        slot = [c, len(missing)]
        for label in missing:
            self._waiting.setdefault(label, []).append(slot)

    def _evaluate(self, c: Constraint) -> None:
        v = check_constraint(self._index, c)
        if v is not None:
            self.violations.append(v)
            raise TimingAbort(v)

    def get(self, label: str) -> TimedMessage | None:
        return self._index.get(label)

    def pending(self) -> list[Constraint]:
        """Constraints still waiting for a message that was never sent."""
        seen = []
        for slots in self._waiting.values():
            for c, _ in slots:
                if c not in seen:
                    seen.append(c)
        return seen


class RunContext:
    """Per-run state handed to strategy hooks."""

    __slots__ = ("params", "rng", "bob_input", "state")

    def __init__(self, params: ProtocolParams, rng: np.random.Generator):
        self.params = params
        self.rng = rng
        self.bob_input = 0
        # scratch space strategies may use to keep state within one run
        self.state: dict[str, Any] = {}


_RNG_LOCAL = threading.local()


def make_rng(seed: int) -> np.random.Generator:
    """Generator for one run, fully determined by ``seed``.

    Building a fresh ``default_rng`` costs more than a short protocol run,
    so each thread keeps one PCG64 generator and reseeds it from a BLAKE2b
    digest of the seed. The generator returned by the previous call on the
    same thread is invalidated.
    """
    seed = int(seed)
    if seed < 0:
        raise ParameterError("seed must be non-negative")
    gen = getattr(_RNG_LOCAL, "gen", None)
    if gen is None:
        gen = _RNG_LOCAL.gen = np.random.Generator(np.random.PCG64(0))
    raw = seed.to_bytes(max(16, (seed.bit_length() + 7) // 8), "little")
    h = hashlib.blake2b(raw, digest_size=32, person=b"vbct-run").digest()
    gen.bit_generator.state = {
        "bit_generator": "PCG64",
        "state": {"state": int.from_bytes(h[:16], "little"), "inc": int.from_bytes(h[16:], "little") | 1},
        "has_uint32": 0,
        "uinteger": 0,
    }
    return gen


def trial_seed(master_seed: int, trial: int) -> int:
    """Per-trial seed; distinct trials of one master seed never collide."""
    return (int(master_seed) << 32) | int(trial)


def post(tl: Timeline, party, step: str, label: str, sender: Site, receiver: Site,
         emit_time: float, payload=None) -> TimedMessage:
    """Send on behalf of a strategy, applying its timing deviations for ``step``."""
    emit_time += party.shift(step)
    short = party.shortfall(step)
    if short > 0.0:
        arrive = emit_time + distance(sender.position, receiver.position) - short
        return tl.add(TimedMessage.fault(label, sender, receiver, emit_time, arrive, payload))
    return tl.send(label, sender, receiver, emit_time, payload)


def _emission_time(m: TimedMessage) -> float:
    return m.emission.time


def finish(tl: Timeline, t: Transcript, outcome: Outcome) -> Transcript:
    msgs = tl.messages
    # stable sort keeps insertion order among simultaneous emissions
    t.messages = sorted(msgs, key=_emission_time)
    t.constraints = list(tl.constraints)
    t.violations = list(tl.violations)
    t.outcome = outcome
    return t
