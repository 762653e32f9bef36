"""Monte Carlo estimates and their comparison with the analytic bounds.

Transcripts are folded into a :class:`Tally` (plain counts, so merging shards
is associative and order independent) and a :class:`SecurityReport` is built
from the tally.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

import numpy as np
from scipy import stats

from vbct import qstate
from vbct.errors import ContractError, ParameterError
from vbct.protocols.base import ProtocolId, ProtocolParams, Transcript
from vbct.protocols.serialize import canonical_json

CONFIDENCE = 0.99
SIGMAS = 3.0
# leakage below this is indistinguishable from estimator noise at desk scale
NOISE_FLOOR_BITS = 0.02
MAX_VIEWS = 4096


# --------------------------------------------------------------------------
# elementary estimators
# --------------------------------------------------------------------------

def wilson_interval(k: int, n: int, confidence: float = CONFIDENCE) -> tuple[float, float]:
    if n <= 0:
        raise ParameterError("need at least one trial")
    ci = stats.binomtest(int(k), int(n)).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


def binomial_se(p: float, n: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / n) if n else float("inf")


def _mi_from_table(table: np.ndarray) -> float:
    n = table.sum()
    if n == 0:
        return 0.0
    pxy = table / n
    px = pxy.sum(axis=1, keepdims=True)
    py = pxy.sum(axis=0, keepdims=True)
    nz = pxy > 0
    return float((pxy[nz] * np.log2(pxy[nz] / (px @ py)[nz])).sum())


def mutual_information(table: np.ndarray, jackknife: bool = True) -> float:
    """Plug-in I(X;Y) in bits from a contingency table, optionally with the
    leave-one-out jackknife bias correction."""
    table = np.asarray(table, dtype=float)
    n = table.sum()
    full = _mi_from_table(table)
    if not jackknife or n < 2:
        return full
    # removing any one sample from cell (i, j) gives the same estimate
    acc = 0.0
    for i, j in zip(*np.nonzero(table)):
        t = table.copy()
        t[i, j] -= 1
        acc += table[i, j] * _mi_from_table(t)
    return float(n * full - (n - 1) * acc / n)


def contingency(pairs: Counter) -> tuple[np.ndarray, list, list]:
    xs = sorted({x for x, _ in pairs}, key=repr)
    ys = sorted({y for _, y in pairs}, key=repr)
    xi = {x: k for k, x in enumerate(xs)}
    yi = {y: k for k, y in enumerate(ys)}
    table = np.zeros((len(xs), len(ys)))
    for (x, y), c in pairs.items():
        table[xi[x], yi[y]] += c
    return table, xs, ys


def leakage_from_counts(view_pairs: Counter, outcome_pairs: Counter, jackknife: bool = True) -> float:
    """I(W; View) - I(W; Outcome), clipped at zero."""
    tv, _, _ = contingency(view_pairs)
    to, _, _ = contingency(outcome_pairs)
    return max(0.0, mutual_information(tv, jackknife) - mutual_information(to, jackknife))


# --------------------------------------------------------------------------
# views
# --------------------------------------------------------------------------

def _strip_batch(label: str) -> str:
    head, sep, tail = label.rpartition("_")
    return head if sep and tail.isdigit() else label


# Uniformly random commitment material and Alice's own choices echoed back.
# Given the unveiled value these carry nothing about Bob's input (hiding is
# checked exhaustively elsewhere), and keeping them would make every view
# unique and the plug-in estimate meaningless.
_OPAQUE = frozenset({"batch", "record", "key", "record_bits", "column", "challenge_bits"})


def _reduce_payload(payload):
    if not isinstance(payload, dict):
        return payload
    out = {k: v for k, v in payload.items() if k not in _OPAQUE}
    if "values" in out and "rows" in out:
        rows = list(out.pop("rows"))
        vals = np.asarray(out.pop("values"))
        if rows:
            # audit openings: keep each row's zero count, not the bit pattern
            out["row_zeros"] = (vals.reshape(len(rows), -1) == 0).sum(axis=1).tolist()
    return out


def alice_view(t: Transcript) -> str:
    """Discretized record of what Alice's agents received, plus the outcome.

    Only the batch in which the run ended is kept: earlier batches were
    fully audited and carry no information about Bob's input.
    """
    last = None
    for m in t.messages:
        head, sep, tail = m.label.rpartition("_")
        if sep and tail.isdigit():
            last = tail
    items = []
    for m in t.messages:
        if m.receiver.owner != "A":
            continue
        head, sep, tail = m.label.rpartition("_")
        if sep and tail.isdigit() and tail != last:
            continue
        items.append([_strip_batch(m.label), _reduce_payload(m.payload)])
    items.sort(key=lambda x: x[0])
    return canonical_json([t.outcome.label(), items])


# --------------------------------------------------------------------------
# analytic bounds
# --------------------------------------------------------------------------

def n_distribution_pmf(poisson_mean: float, distribution: str = "poisson",
                       mass: float = 1.0 - 1e-12) -> tuple[np.ndarray, np.ndarray]:
    """Support and weights of the round count n (zero-truncated Poisson or fixed)."""
    if distribution == "fixed":
        return np.array([max(1, round(poisson_mean))]), np.array([1.0])
    if distribution != "poisson":
        raise ParameterError(f"unknown n distribution {distribution!r}")
    if poisson_mean <= 0:
        raise ParameterError("poisson_mean must be positive")
    top = int(stats.poisson.ppf(mass, poisson_mean)) + 1
    n = np.arange(1, top + 1)
    w = stats.poisson.pmf(n, poisson_mean)
    return n, w / w.sum()


def detection_bound_vbct1(delta: float, gamma: float, poisson_mean: float,
                          distribution: str = "poisson") -> float:
    """Upper bound gamma (1 - delta^2)^(gamma n) on Alice's undetected
    substitution success, averaged over the distribution of n."""
    if not 0.0 <= gamma <= 1.0:
        raise ParameterError("gamma must lie in [0, 1]")
    if abs(delta) > 1.0:
        raise ParameterError("|delta| must not exceed 1")
    n, w = n_distribution_pmf(poisson_mean, distribution)
    return float(gamma * (w * (1.0 - delta * delta) ** (gamma * n)).sum())


def expected_undetected_vbct1(p_max: float, delta: float, gamma: float, poisson_mean: float,
                              distribution: str = "poisson") -> float:
    """Exact chance that the substitution attack reaches round n unnoticed
    with a substituted state in that round."""
    P = qstate.pass_probability(p_max, delta)
    n, w = n_distribution_pmf(poisson_mean, distribution)
    return float(gamma * (w * (1.0 - gamma * (1.0 - P)) ** (n - 1)).sum())


def vbct2_detection_lower_bound(delta: float, delta_prime: float, M: int) -> float:
    """Chance that some audited batch fails before a trusted one arrives when
    each audit fails with probability at least delta' delta^2."""
    f = delta_prime * delta * delta
    z0 = 2.0 ** (-M)
    if f == 0.0:
        return 0.0
    return float((1 - z0) * f / (1 - (1 - z0) * (1 - f)))


@dataclass(frozen=True)
class CurvePoint:
    N: int
    sigma_distance: float
    full_distance: float
    helstrom: float


def exact_distinguishability_curve(N_values: Iterable[int], alpha0_sq: float, alpha1_sq: float):
    """Exact D(sigma0, sigma1) and the Helstrom success for the whole state
    (chosen half plus the rest) per N, and the large-N limit 1/2(1 + D(rho0, rho1))."""
    rho0 = qstate.pair_reduced_state(alpha0_sq)
    rho1 = qstate.pair_reduced_state(alpha1_sq)
    points = []
    for N in N_values:
        s0 = qstate.sigma_mixtures(N, alpha0_sq, alpha1_sq, 0)
        s1 = qstate.sigma_mixtures(N, alpha0_sq, alpha1_sq, 1)
        full = qstate.product_trace_distance(rho0, s0, rho1, s1)
        points.append(CurvePoint(int(N), qstate.trace_distance(s0, s1), full, 0.5 * (1.0 + full)))
    limit = 0.5 * (1.0 + qstate.trace_distance(rho0, rho1))
    return points, limit


# --------------------------------------------------------------------------
# tallies
# --------------------------------------------------------------------------

@dataclass
class Tally:
    """Additive summary of a set of runs."""

    protocol: ProtocolId | None = None
    n: int = 0
    values: Counter = field(default_factory=Counter)
    aborts: Counter = field(default_factory=Counter)
    by_input: Counter = field(default_factory=Counter)
    flags: Counter = field(default_factory=Counter)
    counters: Counter = field(default_factory=Counter)
    view_pairs: Counter = field(default_factory=Counter)
    outcome_pairs: Counter = field(default_factory=Counter)

    def add(self, t: Transcript, view: Callable[[Transcript], Any] | None = alice_view) -> "Tally":
        if self.protocol is None:
            self.protocol = t.protocol
        elif self.protocol is not t.protocol:
            raise ParameterError(f"mixed protocols: {self.protocol.value} and {t.protocol.value}")
        o = t.outcome
        self.n += 1
        key = o.label()
        self.values[key] += 1
        if o.aborted:
            self.aborts[o.abort_reason.value] += 1
        self.by_input[(t.bob_input, key)] += 1
        for k, v in t.flags.items():
            if v:
                self.flags[k] += 1
        r = t.records
        if t.protocol is ProtocolId.VBCT1:
            for _, cheat, passed in r.get("tests", ()):
                self.counters["tests"] += 1
                if cheat:
                    self.counters["cheat_tests"] += 1
                    self.counters["cheat_tests_passed"] += int(passed)
            if "guess" in r:
                self.counters["guesses"] += 1
                self.counters["guesses_correct"] += int(r["guess"] == r["a"])
        for k in ("audited_states", "cheat_states_audited", "cheat_states_passed", "batches"):
            if k in r:
                self.counters[k] += int(r[k])
        if "committed_index" in r and ("unveiled_index" in r or "unveil_reject" in r):
            self.counters["unveils"] += 1
            self.counters["unveils_accepted"] += int("unveiled_index" in r)
            self.counters["equivocations_accepted"] += int(bool(t.flags.get("equivocated")))
        if view is not None:
            self.view_pairs[(t.bob_input, view(t))] += 1
            self.outcome_pairs[(t.bob_input, key)] += 1
        return self

    def merge(self, other: "Tally") -> "Tally":
        if self.protocol and other.protocol and self.protocol is not other.protocol:
            raise ParameterError("cannot merge tallies of different protocols")
        out = Tally(self.protocol or other.protocol, self.n + other.n)
        for name in ("values", "aborts", "by_input", "flags", "counters", "view_pairs", "outcome_pairs"):
            # Counter.update keeps zero entries, which + would drop
            merged = Counter(getattr(self, name))
            merged.update(getattr(other, name))
            setattr(out, name, merged)
        return out

    __add__ = merge

    def __eq__(self, other):
        if not isinstance(other, Tally):
            return NotImplemented
        return self.as_dict() == other.as_dict()

    def as_dict(self) -> dict:
        return {
            "protocol": self.protocol.value if self.protocol else None,
            "n": self.n,
            "values": dict(self.values),
            "aborts": dict(self.aborts),
            "by_input": {f"{w}:{k}": c for (w, k), c in self.by_input.items()},
            "flags": dict(self.flags),
            "counters": dict(self.counters),
            "views": len({v for _, v in self.view_pairs}),
        }


def tally(transcripts: Iterable[Transcript], view=alice_view) -> Tally:
    out = Tally()
    for t in transcripts:
        out.add(t, view)
    return out


# --------------------------------------------------------------------------
# public estimators
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BiasEstimate:
    n: int
    p0: float
    p1: float
    abort_rate: float
    ci0: tuple[float, float]
    ci1: tuple[float, float]
    abort_reasons: dict[str, int]


def _bias(t: Tally, confidence: float = CONFIDENCE) -> BiasEstimate:
    if t.n == 0:
        raise ParameterError("no transcripts")
    k0, k1 = t.values.get("0", 0), t.values.get("1", 0)
    return BiasEstimate(t.n, k0 / t.n, k1 / t.n, (t.n - k0 - k1) / t.n,
                        wilson_interval(k0, t.n, confidence), wilson_interval(k1, t.n, confidence),
                        dict(sorted(t.aborts.items())))


def estimate_bias(transcripts: Sequence[Transcript], confidence: float = CONFIDENCE) -> BiasEstimate:
    return _bias(tally(transcripts, view=None), confidence)


def estimate_leakage(transcripts: Sequence[Transcript], view_extractor=alice_view,
                     max_views: int = MAX_VIEWS) -> float:
    """Extra information (bits) Alice's view carries about Bob's input beyond the outcome."""
    t = tally(transcripts, view=view_extractor)
    return _leakage(t, max_views)


def _leakage(t: Tally, max_views: int = MAX_VIEWS) -> float:
    views = {v for _, v in t.view_pairs}
    if len(views) > max_views:
        raise ContractError(f"{len(views)} distinct views exceed the limit of {max_views}; discretize the view")
    return leakage_from_counts(t.view_pairs, t.outcome_pairs)


def bootstrap_leakages(t: Tally, resamples: int = 200, seed: int = 0) -> np.ndarray:
    """Leakage estimates on multinomial resamples of the (input, view) table."""
    views = dict(t.view_pairs)
    cells = sorted(views, key=repr)
    counts = np.array([views[c] for c in cells], dtype=float)
    if counts.sum() == 0 or resamples <= 0:
        return np.zeros(0)
    # the outcome is the first element of every alice_view; recover it when possible
    outcome_of = [_view_outcome(v) for _, v in cells]
    rng = np.random.default_rng(seed)
    out = np.empty(resamples)
    for r in range(resamples):
        draw = rng.multinomial(int(counts.sum()), counts / counts.sum())
        vp, op = Counter(), Counter()
        for (w, v), o, c in zip(cells, outcome_of, draw):
            if c:
                vp[(w, v)] += c
                op[(w, o)] += c
        out[r] = leakage_from_counts(vp, op, jackknife=True)
    return out


def bootstrap_exceedance(t: Tally, threshold: float, resamples: int = 200, seed: int = 0) -> float:
    """Share of resamples whose leakage estimate exceeds ``threshold``."""
    boots = bootstrap_leakages(t, resamples, seed)
    return float((boots > threshold).mean()) if boots.size else 0.0


def _view_outcome(view) -> Any:
    if isinstance(view, str) and view.startswith('["'):
        return view[2:view.index('"', 2)]
    return view


# --------------------------------------------------------------------------
# report
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundComparison:
    name: str
    bound: float
    empirical: float
    relation: str  # "<=" or ">="
    satisfied: bool
    slack: float = 0.0

    @classmethod
    def check(cls, name: str, empirical: float, relation: str, bound: float, slack: float = 0.0):
        if relation == "<=":
            ok = empirical <= bound + slack
        elif relation == ">=":
            ok = empirical >= bound - slack
        else:
            raise ParameterError(f"bad relation {relation!r}")
        return cls(name, float(bound), float(empirical), relation, bool(ok), float(slack))


@dataclass(frozen=True)
class AnalyticContext:
    """What the report needs besides the runs: parameters and strategy recipes."""

    params: ProtocolParams
    alice: Any = None  # StrategyDescriptor
    bob: Any = None
    confidence: float = CONFIDENCE
    sigmas: float = SIGMAS
    noise_floor: float = NOISE_FLOOR_BITS
    bootstrap: int = 200
    bootstrap_seed: int = 0
    max_views: int = MAX_VIEWS


@dataclass
class SecurityReport:
    protocol: str
    params: dict
    strategies: dict
    trials: int
    p0_hat: float
    p1_hat: float
    p0_ci: tuple[float, float]
    p1_ci: tuple[float, float]
    abort_rate: float
    abort_reasons: dict
    detection_frequency: float
    leakage_bits: float | None
    epsilon_hat: float
    zeta_hat: float | None
    delta_bits_hat: float | None
    bias_by_input: dict
    counters: dict
    bound_comparisons: list[BoundComparison]

    @property
    def all_satisfied(self) -> bool:
        return all(b.satisfied for b in self.bound_comparisons)

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["p0_ci"] = list(self.p0_ci)
        d["p1_ci"] = list(self.p1_ci)
        d["bound_comparisons"] = [b.__dict__ for b in self.bound_comparisons]
        d["all_satisfied"] = self.all_satisfied
        return d

    def summary_row(self) -> dict:
        return {
            "protocol": self.protocol,
            "alice": self.strategies.get("alice", {}).get("name", "honest"),
            "bob": self.strategies.get("bob", {}).get("name", "honest"),
            "trials": self.trials,
            "p0_hat": round(self.p0_hat, 6),
            "p0_ci": f"[{self.p0_ci[0]:.4f}, {self.p0_ci[1]:.4f}]",
            "detection": round(self.detection_frequency, 6),
            "leakage_bits": None if self.leakage_bits is None else round(self.leakage_bits, 6),
            "bounds_satisfied": self.all_satisfied,
        }


def _descriptor_dict(d) -> dict:
    if d is None:
        return {"name": "honest", "parameters": {}}
    return {"name": d.name, "parameters": dict(d.parameters)}


def params_dict(p: ProtocolParams) -> dict:
    out = {
        "protocol": p.protocol.value,
        "N": p.N,
        "M": p.M,
        "L": p.L,
        "poisson_mean": p.poisson_mean,
        "n_distribution": p.n_distribution,
        "supplementary_test": p.supplementary_test,
        "timing_tolerance": p.tolerance,
        "sites": {"points": p.sites.points, "D": p.sites.D, "gap": p.sites.gap,
                  "spatial_dims": p.sites.spatial_dims, "slack": p.sites.slack},
    }
    if p.bias is not None:
        out["bias"] = {"theta": p.bias.theta, "alpha0_sq": p.bias.alpha0_sq, "alpha1_sq": p.bias.alpha1_sq,
                       "p_min": p.bias.p_min, "p_max": p.bias.p_max}
    if p.dice:
        out["dice"] = [list(d) for d in p.dice]
    return out


def _ceilings(p: ProtocolParams) -> list[tuple[str, float]]:
    """Per-outcome ceilings the security condition p_k <= ceiling + eps imposes."""
    if p.protocol is ProtocolId.DIE_ROLL:
        dice = np.array(p.dice)
        return [(str(j), float(dice[:, j].max())) for j in range(dice.shape[1])]
    return [("0", p.bias.p_max), ("1", 1.0 - p.bias.p_min)]


def build_report(transcripts_or_tally, context: AnalyticContext) -> SecurityReport:
    t = transcripts_or_tally if isinstance(transcripts_or_tally, Tally) else tally(transcripts_or_tally)
    if t.n == 0:
        raise ParameterError("no transcripts")
    p = context.params
    if t.protocol is not p.protocol:
        raise ParameterError(f"transcripts are {t.protocol.value}, context is {p.protocol.value}")
    b = _bias(t, context.confidence)
    k = context.sigmas
    comps: list[BoundComparison] = []

    # security condition p_k <= ceiling + eps, per Bob input
    inputs = sorted({w for w, _ in t.by_input})
    by_input = {}
    eps = 0.0
    for w in inputs:
        n_w = sum(c for (ww, _), c in t.by_input.items() if ww == w)
        row = {}
        for label, ceiling in _ceilings(p):
            freq = t.by_input.get((w, label), 0) / n_w
            row[label] = freq
            eps = max(eps, freq - ceiling)
            comps.append(BoundComparison.check(f"p{label} ceiling (w={w})", freq, "<=", ceiling,
                                               k * binomial_se(ceiling, n_w)))
        row["n"] = n_w
        by_input[str(w)] = row

    detected = t.flags.get("detected", 0) / t.n
    c = t.counters
    alice = context.alice
    bob = context.bob
    a_name = alice.name if alice else "honest"
    b_name = bob.name if bob else "honest"
    a_par = alice.parameters if alice else {}
    b_par = bob.parameters if bob else {}

    if p.protocol is ProtocolId.VBCT1 and a_name == "vbct1_substitution":
        delta, gamma = float(a_par["delta"]), float(a_par.get("gamma", 1.0))
        P = qstate.pass_probability(p.bias.p_max, delta)
        comps.append(BoundComparison.check("analytic pass probability vs 1-delta^2", P, "<=", 1 - delta**2))
        if c["cheat_tests"]:
            freq = c["cheat_tests_passed"] / c["cheat_tests"]
            comps.append(BoundComparison.check("substituted-state pass frequency", freq, "<=", P,
                                               k * binomial_se(P, c["cheat_tests"])))
            comps.append(BoundComparison.check("substituted-state pass frequency", freq, ">=", P,
                                               k * binomial_se(P, c["cheat_tests"])))
        und = t.flags.get("cheat_success", 0)
        # cheat_success is only set on completed runs
        comps.append(BoundComparison.check(
            "undetected cheat frequency", und / t.n, "<=",
            detection_bound_vbct1(delta, gamma, p.poisson_mean, p.n_distribution)))
    if p.protocol in (ProtocolId.VBCT2, ProtocolId.VBCT3) and b_name == "vbct2_substitution":
        delta = float(b_par["delta"])
        P = qstate.pass_probability(p.bias.p_max, delta)
        comps.append(BoundComparison.check("analytic pass probability vs 1-delta^2", P, "<=", 1 - delta**2))
        if c["cheat_states_audited"]:
            freq = c["cheat_states_passed"] / c["cheat_states_audited"]
            comps.append(BoundComparison.check("audited substituted-state pass frequency", freq, "<=",
                                               1 - delta**2, k * binomial_se(P, c["cheat_states_audited"])))
        lb = vbct2_detection_lower_bound(delta, float(b_par.get("fraction", 1.0)), p.M)
        comps.append(BoundComparison.check("detection frequency vs delta' delta^2 argument", detected, ">=",
                                           lb, k * binomial_se(lb, t.n)))
    if a_name == "z_mismatch":
        comps.append(BoundComparison.check("cheat-evident detection", detected, ">=", 1.0))
    if b_name == "vbct4_malformed":
        expect = (p.M - 1) / p.M
        comps.append(BoundComparison.check("malformed pair detection", detected, ">=", expect,
                                           k * binomial_se(expect, t.n)))
    if b_name == "vbct3_equivocate" and c["unveils"]:
        bound = 2.0 ** (-p.L * p.index_bits)
        freq = c["equivocations_accepted"] / c["unveils"]
        comps.append(BoundComparison.check("equivocation acceptance", freq, "<=", bound,
                                           k * binomial_se(bound, c["unveils"])))
    if p.protocol is ProtocolId.VBCT1 and b_name in ("honest", "vbct1_measure") and c["guesses"] \
            and a_name == "honest":
        best = p.bias.p_max
        freq = c["guesses_correct"] / c["guesses"]
        comps.append(BoundComparison.check("guess success vs Helstrom optimum", freq, "<=", best,
                                           k * binomial_se(best, c["guesses"])))

    leakage = zeta = None
    views = {v for _, v in t.view_pairs}
    if views and len(views) <= context.max_views:
        leakage = _leakage(t, context.max_views)
        boots = bootstrap_leakages(t, context.bootstrap, context.bootstrap_seed)
        zeta = float((boots > leakage + context.noise_floor).mean()) if boots.size else 0.0
        # sampling spread of the estimator; negligible at the calibrated 1e5 trials
        spread = float(boots.std(ddof=1)) if boots.size > 1 else 0.0
        pairs = p.protocol in (ProtocolId.VBCT2, ProtocolId.VBCT3)
        if pairs and b_name == "honest" and bob is not None and bob.parameters.get("w") is None:
            if a_name == "honest" or (a_name == "z_mismatch" and p.protocol is ProtocolId.VBCT3):
                comps.append(BoundComparison.check("leakage vs noise floor", leakage, "<=", context.noise_floor,
                                                   k * spread))
            elif a_name == "z_mismatch":
                # the attack reveals Bob's uniformly chosen input: one bit
                comps.append(BoundComparison.check("z-mismatch leakage vs H(W)", leakage, ">=", 1.0, 0.05))
                comps.append(BoundComparison.check("z-mismatch leakage vs H(W)", leakage, "<=", 1.0, 0.05))

    return SecurityReport(
        protocol=p.protocol.value,
        params=params_dict(p),
        strategies={"alice": _descriptor_dict(alice), "bob": _descriptor_dict(bob)},
        trials=t.n,
        p0_hat=b.p0,
        p1_hat=b.p1,
        p0_ci=b.ci0,
        p1_ci=b.ci1,
        abort_rate=b.abort_rate,
        abort_reasons=b.abort_reasons,
        detection_frequency=detected,
        leakage_bits=leakage,
        epsilon_hat=max(0.0, eps),
        zeta_hat=zeta,
        delta_bits_hat=leakage,
        bias_by_input=by_input,
        counters=dict(sorted(c.items())),
        bound_comparisons=comps,
    )
