"""Line-delimited JSON for transcripts.

One run is a header line followed by one line per message and one per
timing constraint. Floats go through ``repr`` (Python's JSON encoder), which
round-trips IEEE doubles exactly, so the text is bit-stable across platforms.
"""
from __future__ import annotations

import enum
import hashlib
import json
from typing import Any, Iterable, Iterator

import numpy as np

from vbct.errors import ContractError
from vbct.protocols.base import Transcript
from vbct.spacetime import Delay, EventRef, Site, Spacelike, TimedMessage, ViolationKind


def _default(obj: Any):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=_default, allow_nan=False)


def payload_digest(payload: Any) -> str:
    return hashlib.sha256(canonical_json(payload).encode()).hexdigest()


def _site(s: Site) -> dict:
    return {"name": s.name, "pos": list(s.position), "slack": s.slack}


def _ref(r: EventRef) -> list:
    return [r.label, r.which]


def constraint_record(c) -> dict:
    if isinstance(c, Spacelike):
        return {"type": "constraint", "rule": "spacelike", "a": _ref(c.a), "b": _ref(c.b), "name": c.name}
    return {"type": "constraint", "rule": "delay", "a": _ref(c.start), "b": _ref(c.end), "name": c.name,
            "min": c.minimum, "max": c.maximum, "tol": c.tolerance,
            "kind": c.kind.value, "long_kind": c.long_kind.value}


def transcript_records(t: Transcript, trial: int | None = None) -> Iterator[dict]:
    head = {
        "type": "run",
        "protocol": t.protocol.value,
        "seed": t.seed,
        "bob_input": t.bob_input,
        "alice": t.alice_strategy,
        "bob": t.bob_strategy,
        "outcome": t.outcome.value,
        "abort_reason": t.outcome.abort_reason,
        "records": t.records,
        "flags": t.flags,
        "violations": [[v.kind.value, v.constraint] for v in t.violations],
    }
    if trial is not None:
        head["trial"] = trial
    yield head
    for m in t.messages:
        rec = {
            "type": "msg",
            "label": m.label,
            "from": _site(m.sender),
            "to": _site(m.receiver),
            "emit": [m.emission.time, *m.emission.position],
            "recv": [m.reception.time, *m.reception.position],
            "digest": payload_digest(m.payload),
        }
        if m.faulty:
            rec["fault"] = True
        yield rec
    for c in t.constraints:
        yield constraint_record(c)


def transcript_lines(t: Transcript, trial: int | None = None) -> list[str]:
    return [canonical_json(r) for r in transcript_records(t, trial)]


# --------------------------------------------------------------------------
# reading back
# --------------------------------------------------------------------------

def _parse_site(d: dict) -> Site:
    name = d["name"]
    return Site(name[0], int(name[1:]), tuple(float(x) for x in d["pos"]), float(d.get("slack", 0.0)))


def parse_message(rec: dict) -> TimedMessage:
    s, r = _parse_site(rec["from"]), _parse_site(rec["to"])
    emit, recv = rec["emit"][0], rec["recv"][0]
    # rebuild through the fault path: the file may hold anything
    m = TimedMessage.fault(rec["label"], s, r, emit, recv, rec["digest"])
    m.faulty = bool(rec.get("fault", False))
    return m


def parse_constraint(rec: dict):
    a, b = EventRef(*rec["a"]), EventRef(*rec["b"])
    if rec["rule"] == "spacelike":
        return Spacelike(a, b, rec.get("name", ""))
    if rec["rule"] == "delay":
        return Delay(a, b, rec.get("min"), rec.get("max"), rec.get("tol", 0.0), rec.get("name", ""),
                     ViolationKind(rec.get("kind", "delay_too_short")),
                     ViolationKind(rec.get("long_kind", "delay_too_long")))
    raise ContractError(f"unknown constraint rule {rec['rule']!r}")


def read_runs(lines: Iterable[str]) -> Iterator[tuple[dict, list[TimedMessage], list]]:
    """Group a transcript file into (header, messages, constraints) per run."""
    head = None
    msgs: list[TimedMessage] = []
    cons: list = []
    for n, line in enumerate(lines, 1):
        line = line.strip()
        if not line:
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ContractError(f"line {n}: {exc}") from None
        kind = rec.get("type")
        if kind == "run":
            if head is not None:
                yield head, msgs, cons
            head, msgs, cons = rec, [], []
        elif kind == "msg":
            if head is None:
                raise ContractError(f"line {n}: message before any run header")
            msgs.append(parse_message(rec))
        elif kind == "constraint":
            if head is None:
                raise ContractError(f"line {n}: constraint before any run header")
            cons.append(parse_constraint(rec))
        elif kind == "scenario":
            continue
        else:
            raise ContractError(f"line {n}: unknown record type {kind!r}")
    if head is not None:
        yield head, msgs, cons
