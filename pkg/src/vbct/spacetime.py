"""Flat-spacetime timing model: sites, events, messages and schedule checks.

Units have c = 1: times in seconds, positions in light-seconds.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, NamedTuple, Sequence

from vbct.errors import ContractError, ParameterError

# Events closer than this to the light cone count as lightlike.
LIGHT_TOL = 1e-9


class IntervalClass(enum.Enum):
    SPACELIKE = "spacelike"
    LIGHTLIKE = "lightlike"
    TIMELIKE = "timelike"


class Event(NamedTuple):
    time: float
    position: tuple[float, ...]


@dataclass(frozen=True)
class Site:
    owner: str
    index: int
    position: tuple[float, ...]
    # laboratory extent; loosens every timing check made at this site
    slack: float = 0.0

    @property
    def name(self) -> str:
        return f"{self.owner}{self.index}"

    def event(self, time: float) -> Event:
        return Event(time, self.position)


_DIST_CACHE: dict[tuple, float] = {}


def distance(a: Sequence[float], b: Sequence[float]) -> float:
    key = (a, b)
    try:
        return _DIST_CACHE[key]
    except (KeyError, TypeError):
        pass
    if len(a) != len(b):
        raise ContractError(f"coordinate dimensions differ: {len(a)} vs {len(b)}")
    d = math.dist(a, b)
    if isinstance(a, tuple) and isinstance(b, tuple) and len(_DIST_CACHE) < 4096:
        _DIST_CACHE[key] = d
    return d


def interval_class(a: Event, b: Event) -> IntervalClass:
    dt = b.time - a.time
    dx = distance(a.position, b.position)
    s = dt * dt - dx * dx
    if abs(s) <= LIGHT_TOL:
        return IntervalClass.LIGHTLIKE
    return IntervalClass.TIMELIKE if s > 0 else IntervalClass.SPACELIKE


def earliest_arrival(src: Site, dst: Site, emit_time: float) -> float:
    return emit_time + distance(src.position, dst.position)


class TimedMessage:
    """One classical or quantum transmission between two sites.

    The constructor enforces that nothing travels faster than light. The
    only way to build a message that breaks this is :meth:`fault`, which
    exists so tests and adversarial fixtures can check that the verifier
    catches it.
    """

    __slots__ = ("label", "sender", "receiver", "emission", "reception", "payload", "faulty")

    def __init__(self, label: str, sender: Site, receiver: Site, emission: Event,
                 reception: Event, payload: Any = None, *, _faulty: bool = False):
        if emission.position != sender.position or reception.position != receiver.position:
            raise ContractError(f"{label}: events are not located at the sender/receiver sites")
        if not _faulty:
            travel = distance(sender.position, receiver.position)
            if reception.time < emission.time + travel - LIGHT_TOL:
                raise ContractError(f"{label}: reception earlier than light allows")
        self.label = label
        self.sender = sender
        self.receiver = receiver
        self.emission = emission
        self.reception = reception
        self.payload = payload
        self.faulty = _faulty

    @classmethod
    def send(cls, label: str, sender: Site, receiver: Site, emit_time: float,
             payload: Any = None, delay: float = 0.0) -> "TimedMessage":
        """Message travelling at light speed, plus ``delay`` seconds of processing."""
        if delay < 0:
            raise ParameterError("delay must be non-negative")
        # causal by construction, so skip the constructor's checks
        m = object.__new__(cls)
        m.label = label
        m.sender = sender
        m.receiver = receiver
        m.emission = Event(emit_time, sender.position)
        m.reception = Event(emit_time + distance(sender.position, receiver.position) + delay,
                            receiver.position)
        m.payload = payload
        m.faulty = False
        return m

    @classmethod
    def fault(cls, label: str, sender: Site, receiver: Site, emit_time: float,
              receive_time: float, payload: Any = None) -> "TimedMessage":
        """Build a message with arbitrary timing, superluminal included."""
        return cls(label, sender, receiver, sender.event(emit_time), receiver.event(receive_time),
                   payload, _faulty=True)

    def is_superluminal(self) -> bool:
        travel = distance(self.sender.position, self.receiver.position)
        return self.reception.time < self.emission.time + travel - LIGHT_TOL

    def __repr__(self):
        return (f"TimedMessage({self.label!r}, {self.sender.name}->{self.receiver.name}, "
                f"t={self.emission.time:.6g}->{self.reception.time:.6g})")


def _spacelike_with_slack(a: Event, b: Event, slack: float) -> bool:
    if interval_class(a, b) is not IntervalClass.SPACELIKE:
        return False
    if slack <= 0.0:
        return True
    return distance(a.position, b.position) - abs(b.time - a.time) > slack


def verify_independence(m1: TimedMessage, m2: TimedMessage) -> bool:
    """True iff the two emissions are spacelike separated (lightlike is causal)."""
    slack = m1.sender.slack + m2.sender.slack
    return _spacelike_with_slack(m1.emission, m2.emission, slack)


# --------------------------------------------------------------------------
# schedule constraints
# --------------------------------------------------------------------------

class ViolationKind(enum.Enum):
    SUPERLUMINAL = "superluminal"
    NOT_SPACELIKE = "not_spacelike"
    DELAY_TOO_SHORT = "delay_too_short"
    DELAY_TOO_LONG = "delay_too_long"
    ORDER = "order"
    SUSTAIN_EXPIRED = "sustain_expired"


class EventRef(NamedTuple):
    """Emission or reception of the message with the given label."""
    label: str
    which: str = "emission"


def _ref(r) -> EventRef:
    if isinstance(r, EventRef):
        return r
    if isinstance(r, str):
        return EventRef(r)
    return EventRef(*r)


class Spacelike(NamedTuple):
    """The two referenced events must be spacelike separated."""
    a: EventRef
    b: EventRef
    name: str = ""

    @property
    def refs(self) -> tuple[EventRef, ...]:
        return (self.a, self.b)


def spacelike(a, b, name: str = "") -> Spacelike:
    """Constraint between two event references (labels mean emissions)."""
    return Spacelike(_ref(a), _ref(b), name)


def independent(label1: str, label2: str, name: str = "") -> Spacelike:
    """The two messages must have been emitted independently."""
    return Spacelike(EventRef(label1, "emission"), EventRef(label2, "emission"), name)


@dataclass(frozen=True)
class Delay:
    """``end`` must follow ``start`` by at least ``minimum`` and at most ``maximum``.

    ``kind`` overrides the violation type reported for a short delay; a
    plain ordering rule uses ``minimum=0`` with ``kind=ORDER`` and a sustain
    window uses only ``maximum`` with ``long_kind=SUSTAIN_EXPIRED``.
    """
    start: EventRef
    end: EventRef
    minimum: float | None = None
    maximum: float | None = None
    tolerance: float = 0.0
    name: str = ""
    kind: ViolationKind = ViolationKind.DELAY_TOO_SHORT
    long_kind: ViolationKind = ViolationKind.DELAY_TOO_LONG

    def __post_init__(self):
        object.__setattr__(self, "start", _ref(self.start))
        object.__setattr__(self, "end", _ref(self.end))

    @property
    def refs(self) -> tuple[EventRef, ...]:
        return (self.start, self.end)


def ordered(before, after, name: str = "") -> Delay:
    return Delay(before, after, minimum=0.0, name=name, kind=ViolationKind.ORDER)


def sustain_window(start, end, length: float, name: str = "") -> Delay:
    return Delay(start, end, maximum=length, name=name, long_kind=ViolationKind.SUSTAIN_EXPIRED)


Constraint = Spacelike | Delay


@dataclass(frozen=True)
class Violation:
    kind: ViolationKind
    constraint: str
    events: tuple[Event, ...] = field(default=())


def _resolve(index: dict[str, TimedMessage], ref: EventRef) -> tuple[Event, Site]:
    try:
        m = index[ref.label]
    except KeyError:
        raise ContractError(f"constraint references unknown message {ref.label!r}") from None
    if ref.which == "emission":
        return m.emission, m.sender
    if ref.which == "reception":
        return m.reception, m.receiver
    raise ContractError(f"bad event selector {ref.which!r}")


def check_constraint(index: dict[str, TimedMessage], c: Constraint) -> Violation | None:
    if type(c) is Spacelike:
        ea, sa = _resolve(index, c.a)
        eb, sb = _resolve(index, c.b)
        dt = eb.time - ea.time
        dx = distance(ea.position, eb.position)
        slack = sa.slack + sb.slack
        if dx * dx - dt * dt <= LIGHT_TOL or (slack > 0.0 and dx - abs(dt) <= slack):
            return Violation(ViolationKind.NOT_SPACELIKE, c.name or f"{c.a} ~ {c.b}", (ea, eb))
        return None
    if isinstance(c, Delay):
        es, ss = _resolve(index, c.start)
        ee, se = _resolve(index, c.end)
        gap = ee.time - es.time
        slack = ss.slack + se.slack + c.tolerance
        if c.minimum is not None and gap < c.minimum - slack - LIGHT_TOL:
            return Violation(c.kind, c.name or f"{c.start} -> {c.end}", (es, ee))
        if c.maximum is not None and gap > c.maximum + slack + LIGHT_TOL:
            return Violation(c.long_kind, c.name or f"{c.start} -> {c.end}", (es, ee))
        return None
    raise ContractError(f"unknown constraint type {type(c).__name__}")


def index_messages(messages: Iterable[TimedMessage]) -> dict[str, TimedMessage]:
    index: dict[str, TimedMessage] = {}
    for m in messages:
        if m.label in index:
            raise ContractError(f"duplicate message label {m.label!r}")
        index[m.label] = m
    return index


def verify_schedule(messages: Sequence[TimedMessage], constraints: Sequence[Constraint]) -> list[Violation]:
    """Every violated constraint, superluminal messages first, in input order."""
    index = index_messages(messages)
    out = [Violation(ViolationKind.SUPERLUMINAL, m.label, (m.emission, m.reception))
           for m in messages if m.is_superluminal()]
    for c in constraints:
        v = check_constraint(index, c)
        if v is not None:
            out.append(v)
    return out


# --------------------------------------------------------------------------
# site layouts
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SiteConfig:
    """Laboratories for both parties near ``points`` agreed points.

    Agreed point k sits at (k-1)*D on the first axis; Alice's lab A_k is on
    the point and Bob's B_k is ``gap`` further along, so d(A_k, B_k) = gap
    while d(A_1, A_2) = D.
    """
    points: int = 2
    D: float = 1.0
    gap: float = 1e-3
    spatial_dims: int = 1
    slack: float = 0.0

    def __post_init__(self):
        if self.points < 2:
            raise ParameterError("need at least two agreed points")
        if not 0 < self.gap < self.D / 4:
            raise ParameterError("gap must be positive and well below D")
        if not 1 <= self.spatial_dims <= 3:
            raise ParameterError("spatial_dims must be 1, 2 or 3")
        if self.slack < 0:
            raise ParameterError("slack must be non-negative")

    def site(self, name: str) -> Site:
        return self.sites[name]

    @property
    def sites(self) -> dict[str, Site]:
        cached = self.__dict__.get("_sites")
        if cached is None:
            cached = {}
            pad = (0.0,) * (self.spatial_dims - 1)
            for k in range(1, self.points + 1):
                x = (k - 1) * self.D
                cached[f"A{k}"] = Site("A", k, (x,) + pad, self.slack)
                cached[f"B{k}"] = Site("B", k, (x + self.gap,) + pad, self.slack)
            object.__setattr__(self, "_sites", cached)
        return cached
