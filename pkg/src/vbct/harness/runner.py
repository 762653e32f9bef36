"""Batch execution and persistence.

Trials are split into fixed chunks; each chunk is simulated (possibly in a
worker process) into transcript lines plus a :class:`Tally`. Chunks are
written in trial order, so the output never depends on completion order or
on the number of workers.
"""
from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from vbct import analysis
from vbct.harness.config import ScenarioConfig, dumps, loads, to_mapping
from vbct.protocols import run
from vbct.protocols.base import trial_seed
from vbct.protocols.serialize import canonical_json, read_runs, transcript_lines
from vbct.spacetime import verify_schedule

EXIT_OK, EXIT_CONFIG, EXIT_BOUND, EXIT_IO = 0, 2, 3, 4
CHUNK = 500


@dataclass
class ScenarioResult:
    transcripts: Path
    report_path: Path
    summary_path: Path
    report: analysis.SecurityReport
    tally: analysis.Tally
    violations: dict[str, int]
    exit_code: int


def _simulate_chunk(config_text: str, start: int, stop: int) -> tuple[list[str], analysis.Tally, dict]:
    cfg = loads(config_text)
    alice, bob = cfg.alice.build(), cfg.bob.build()
    lines: list[str] = []
    tally = analysis.Tally()
    violations: dict[str, int] = {}
    for i in range(start, stop):
        t = run(cfg.params, alice, bob, trial_seed(cfg.seed, i))
        lines.extend(transcript_lines(t, trial=i))
        tally.add(t)
        for v in t.violations:
            violations[v.kind.value] = violations.get(v.kind.value, 0) + 1
    return lines, tally, violations


def _chunks(trials: int) -> list[tuple[int, int]]:
    return [(s, min(s + CHUNK, trials)) for s in range(0, trials, CHUNK)]


def simulate(config: ScenarioConfig, parallelism: int = 1) -> Iterator[tuple[list[str], analysis.Tally, dict]]:
    """Yield per-chunk results in trial order."""
    text = dumps(config)
    spans = _chunks(config.trials)
    if parallelism <= 1 or len(spans) == 1:
        for s, e in spans:
            yield _simulate_chunk(text, s, e)
        return
    with ProcessPoolExecutor(max_workers=parallelism) as pool:
        futures = [pool.submit(_simulate_chunk, text, s, e) for s, e in spans]
        for f in futures:
            yield f.result()


def scenario_line(config: ScenarioConfig) -> str:
    return canonical_json({"type": "scenario", "config": to_mapping(config)})


def report_document(config: ScenarioConfig, report: analysis.SecurityReport, tally: analysis.Tally,
                    violations: dict[str, int]) -> str:
    doc = {
        "config": to_mapping(config),
        "report": report.to_dict(),
        "tally": tally.as_dict(),
        "schedule_violations": dict(sorted(violations.items())),
    }
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False, default=str) + "\n"


SUMMARY_COLUMNS = ["scenario", "protocol", "alice", "bob", "trials", "p0_hat", "p0_ci",
                   "detection", "leakage_bits", "bounds_satisfied"]


def summary_table(rows: list[dict]) -> str:
    out = ["\t".join(SUMMARY_COLUMNS)]
    for r in rows:
        out.append("\t".join("" if r.get(c) is None else str(r.get(c)) for c in SUMMARY_COLUMNS))
    return "\n".join(out) + "\n"


def run_scenario(config: ScenarioConfig, out_dir: str | Path, parallelism: int = 1) -> ScenarioResult:
    """Run every trial, write transcripts, report and summary; I/O errors propagate as OSError."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tpath, rpath, spath = out / config.transcripts, out / config.report, out / config.summary
    tally = analysis.Tally()
    violations: dict[str, int] = {}
    with open(tpath, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(scenario_line(config) + "\n")
        for lines, part, viol in simulate(config, parallelism):
            fh.write("\n".join(lines) + "\n")
            tally = tally.merge(part)
            for k, v in viol.items():
                violations[k] = violations.get(k, 0) + v
    report = analysis.build_report(tally, config.analytic_context())
    rpath.write_text(report_document(config, report, tally, violations), encoding="utf-8", newline="\n")
    row = {"scenario": config.name, **report.summary_row()}
    spath.write_text(summary_table([row]), encoding="utf-8", newline="\n")
    code = EXIT_OK if report.all_satisfied else EXIT_BOUND
    return ScenarioResult(tpath, rpath, spath, report, tally, violations, code)


# --------------------------------------------------------------------------
# verification of a transcript file
# --------------------------------------------------------------------------

@dataclass
class VerifyResult:
    runs: int
    timing_mismatches: list[int]
    replay_mismatches: list[int]
    violations: dict[str, int]

    @property
    def ok(self) -> bool:
        return not self.timing_mismatches and not self.replay_mismatches and not self.violations

    def as_dict(self) -> dict:
        return {"runs": self.runs, "timing_mismatches": self.timing_mismatches,
                "replay_mismatches": self.replay_mismatches,
                "violations": dict(sorted(self.violations.items())), "ok": self.ok}


def _complete(constraints, labels: set[str]):
    return [c for c in constraints if all(r.label in labels for r in c.refs)]


def verify_file(path: str | Path, replay: bool = True) -> VerifyResult:
    """Re-check every run's timing rules from the stored events and, if the
    file starts with a scenario line, re-simulate each run and compare bytes."""
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]
    cfg = None
    if lines:
        first = json.loads(lines[0])
        if first.get("type") == "scenario":
            cfg = loads("".join(f"{k} = {v}\n" for k, v in first["config"].items()))
    alice = bob = None
    if cfg is not None and replay:
        alice, bob = cfg.alice.build(), cfg.bob.build()
    # group raw lines per run so replays can be compared byte for byte
    raw_runs: list[list[str]] = []
    for line in lines:
        kind = json.loads(line).get("type")
        if kind == "run":
            raw_runs.append([line])
        elif kind != "scenario" and raw_runs:
            raw_runs[-1].append(line)
    timing_bad: list[int] = []
    replay_bad: list[int] = []
    violations: dict[str, int] = {}
    for k, (head, msgs, cons) in enumerate(read_runs(lines)):
        labels = {m.label for m in msgs}
        found = verify_schedule(msgs, _complete(cons, labels))
        got = sorted((v.kind.value, v.constraint) for v in found)
        want = sorted((kind, name) for kind, name in head["violations"])
        trial = head.get("trial", k)
        if got != want:
            timing_bad.append(trial)
        for kind, _ in got:
            violations[kind] = violations.get(kind, 0) + 1
        if alice is not None:
            t = run(cfg.params, alice, bob, head["seed"])
            if transcript_lines(t, trial=head.get("trial")) != raw_runs[k]:
                replay_bad.append(trial)
    return VerifyResult(len(raw_runs), timing_bad, replay_bad, violations)
