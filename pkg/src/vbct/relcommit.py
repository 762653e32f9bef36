"""Classical relativistic commitment with a receiver challenge.

Scheme, per committed bit v with an L-bit challenge block r supplied by the
receiver and an L-bit key block k shared by the committer's two agents:

    commit:  the agent that received r answers s = k XOR (v AND r)
    unveil:  the *other* agent sends (v, k); accept iff k XOR (v AND r) == s

``s`` is uniform whatever v is, so the record hides v perfectly. An unveiler
who has not seen r can only switch v by guessing r, which succeeds with
probability 2^-L per bit. That ignorance is what the timing rule enforces:
the unveil must be spacelike separated from the challenge reception.

Sessions that have to outlive that light-cone (the matrix protocol keeps
commitments alive while Alice's agents confer) carry a sustain deadline
instead. The refresh rounds that would keep a real scheme binding over the
window are not simulated; the window itself is what the verifier checks.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from vbct.errors import ContractError, ParameterError
from vbct.spacetime import Event, IntervalClass, interval_class


def as_bits(bits, length: int | None = None) -> np.ndarray:
    """Coerce a 0/1 sequence or a '0101' string to a uint8 array."""
    if isinstance(bits, str):
        arr = np.frombuffer(bits.encode(), dtype=np.uint8) - ord("0")
    else:
        arr = np.asarray(bits, dtype=np.uint8).reshape(-1)
    if arr.size and arr.max() > 1:
        raise ParameterError("bit strings may only contain 0 and 1")
    if length is not None and arr.size != length:
        raise ParameterError(f"expected {length} bits, got {arr.size}")
    return arr


def bits_to_str(bits: np.ndarray) -> str:
    return "".join("1" if b else "0" for b in np.asarray(bits).reshape(-1))


def commit(value, challenge, shared_key) -> np.ndarray:
    """Masked record for ``value``; block length is len(challenge) / len(value)."""
    v = as_bits(value)
    r = as_bits(challenge)
    k = as_bits(shared_key)
    if v.size == 0:
        raise ParameterError("nothing to commit")
    if r.size % v.size:
        raise ParameterError("challenge length must be a multiple of the value length")
    L = r.size // v.size
    if L < 1:
        raise ParameterError("need at least one challenge bit per committed bit")
    if k.size < r.size:
        raise ParameterError(f"key has {k.size} bits, need {r.size}")
    k = k[: r.size]
    return k ^ (np.repeat(v, L) & r)


def check_unveil(record, challenge, claimed_value, claimed_key) -> bool:
    """True iff every block satisfies key XOR (value AND challenge) == record."""
    s = as_bits(record)
    r = as_bits(challenge, s.size)
    v = as_bits(claimed_value)
    k = as_bits(claimed_key)
    if v.size == 0 or s.size % v.size or k.size < s.size:
        return False
    L = s.size // v.size
    return bool(np.array_equal(k[: s.size] ^ (np.repeat(v, L) & r), s))


def check_unveil_many(records: np.ndarray, challenges: np.ndarray, values: np.ndarray,
                      keys: np.ndarray) -> np.ndarray:
    """Vectorised :func:`check_unveil` for single committed bits.

    ``records``, ``challenges`` and ``keys`` are (n, L) bit arrays and
    ``values`` has length n; returns one acceptance flag per row.
    """
    s = np.asarray(records, dtype=np.uint8)
    r = np.asarray(challenges, dtype=np.uint8)
    k = np.asarray(keys, dtype=np.uint8)
    v = np.asarray(values, dtype=np.uint8).reshape(-1, 1)
    if s.ndim != 2 or s.shape != r.shape or s.shape != k.shape or v.shape[0] != s.shape[0]:
        raise ParameterError("shapes of records, challenges, keys and values disagree")
    return ~np.any((k ^ (v & r)) != s, axis=1)


def forge_success_probability(L: int) -> float:
    """Chance that a committer who picks the value only at unveil passes, per bit."""
    if L < 1:
        raise ParameterError("L must be at least 1")
    return 2.0 ** (-L)


def equivocation_key(original_value, original_key, new_value, challenge_guess) -> np.ndarray:
    """Key that would open the record as ``new_value`` if the guess of r is right."""
    v = as_bits(original_value)
    v2 = as_bits(new_value, v.size)
    k = as_bits(original_key)
    r = as_bits(challenge_guess)
    L = r.size // v.size
    return k[: r.size] ^ (np.repeat(v ^ v2, L) & r)


class SessionState(enum.Enum):
    OPEN = "open"
    COMMITTED = "committed"
    UNVEILED = "unveiled"
    FAILED = "failed"


class RejectReason(enum.Enum):
    TIMING = "timing"
    MISMATCH = "mismatch"


@dataclass(frozen=True)
class UnveilResult:
    accepted: bool
    reason: RejectReason | None = None
    value: np.ndarray | None = None


@dataclass
class CommitmentSession:
    """State of one commitment between ``committer`` and ``receiver``."""

    committer: str
    receiver: str
    n_bits: int
    L: int
    challenge: np.ndarray | None = None
    challenge_event: Event | None = None
    masked_record: np.ndarray | None = None
    commit_event: Event | None = None
    unveil_event: Event | None = None
    sustain_until: float | None = None
    state: SessionState = SessionState.OPEN
    history: list = field(default_factory=list)

    def __post_init__(self):
        if self.n_bits < 1 or self.L < 1:
            raise ParameterError("need n_bits >= 1 and L >= 1")

    @property
    def record_length(self) -> int:
        return self.n_bits * self.L

    def commit(self, value, challenge, shared_key, *, challenge_event: Event | None = None,
               commit_event: Event | None = None) -> np.ndarray:
        if self.state is not SessionState.OPEN:
            raise ContractError(f"cannot commit from state {self.state.value}")
        v = as_bits(value, self.n_bits)
        r = as_bits(challenge, self.record_length)
        self.masked_record = commit(v, r, shared_key)
        self.challenge = r
        self.challenge_event = challenge_event
        self.commit_event = commit_event
        self.state = SessionState.COMMITTED
        self.history.append(self.state)
        return self.masked_record

    def accept_record(self, challenge, record, *, challenge_event: Event | None = None,
                      commit_event: Event | None = None) -> None:
        """Receiver-side bookkeeping when the committer's record is all we see."""
        if self.state is not SessionState.OPEN:
            raise ContractError(f"cannot commit from state {self.state.value}")
        self.challenge = as_bits(challenge, self.record_length)
        self.masked_record = as_bits(record, self.record_length)
        self.challenge_event = challenge_event
        self.commit_event = commit_event
        self.state = SessionState.COMMITTED
        self.history.append(self.state)

    def timing_ok(self, unveil_event: Event) -> bool:
        """Unveil must not lie in the causal future of the challenge reception,
        unless it falls inside an explicit sustain window."""
        if self.challenge_event is None:
            return True
        if interval_class(self.challenge_event, unveil_event) is IntervalClass.SPACELIKE:
            return True
        if unveil_event.time < self.challenge_event.time:
            # unveil sent before the challenge even arrived; cannot depend on it
            return True
        return self.sustain_until is not None and unveil_event.time <= self.sustain_until


def unveil(session: CommitmentSession, claimed_value, claimed_key,
           unveil_event: Event | None = None) -> UnveilResult:
    if session.state is not SessionState.COMMITTED:
        raise ContractError(f"cannot unveil from state {session.state.value}")
    session.unveil_event = unveil_event
    if unveil_event is not None and not session.timing_ok(unveil_event):
        session.state = SessionState.FAILED
        session.history.append(session.state)
        return UnveilResult(False, RejectReason.TIMING)
    v = as_bits(claimed_value)
    if v.size != session.n_bits or not check_unveil(session.masked_record, session.challenge, v, claimed_key):
        session.state = SessionState.FAILED
        session.history.append(session.state)
        return UnveilResult(False, RejectReason.MISMATCH)
    session.state = SessionState.UNVEILED
    session.history.append(session.state)
    return UnveilResult(True, None, v)


def open_positions(session: CommitmentSession, positions, values, key_blocks,
                   unveil_event: Event | None = None, *, final: bool = False) -> UnveilResult:
    """Unveil a subset of the committed bits.

    ``key_blocks`` holds one L-bit key block per position. The session stays
    committed after a valid partial unveil (other bits remain bound) unless
    ``final`` is set; any failure moves it to FAILED.
    """
    if session.state is not SessionState.COMMITTED:
        raise ContractError(f"cannot unveil from state {session.state.value}")
    pos = np.asarray(positions, dtype=np.int64).reshape(-1)
    v = as_bits(values, pos.size)
    k = np.asarray(key_blocks, dtype=np.uint8).reshape(pos.size, session.L)
    if pos.size and (pos.min() < 0 or pos.max() >= session.n_bits):
        raise ContractError("unveil position outside the committed value")
    session.unveil_event = unveil_event
    if unveil_event is not None and not session.timing_ok(unveil_event):
        session.state = SessionState.FAILED
        session.history.append(session.state)
        return UnveilResult(False, RejectReason.TIMING)
    L = session.L
    r = session.challenge.reshape(session.n_bits, L)[pos]
    s = session.masked_record.reshape(session.n_bits, L)[pos]
    if not np.array_equal(k ^ (v[:, None] & r), s):
        session.state = SessionState.FAILED
        session.history.append(session.state)
        return UnveilResult(False, RejectReason.MISMATCH)
    if final:
        session.state = SessionState.UNVEILED
        session.history.append(session.state)
    return UnveilResult(True, None, v)


def int_to_bits(value: int, width: int) -> np.ndarray:
    if value < 0 or value >= 2**width:
        raise ParameterError(f"{value} does not fit in {width} bits")
    return np.array([(value >> (width - 1 - j)) & 1 for j in range(width)], dtype=np.uint8)


def bits_to_int(bits: Sequence[int]) -> int:
    out = 0
    for b in np.asarray(bits).reshape(-1):
        out = (out << 1) | int(b)
    return out
