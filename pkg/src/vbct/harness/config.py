"""Scenario configuration: flat ``dotted.key = value`` text with one canonical form.

Recognised keys::

    protocol            vbct1 | vbct2 | vbct3 | vbct4 | die_roll
    trials, seed
    bias.theta | bias.alpha0_sq + bias.alpha1_sq | bias.p_min + bias.p_max
    params.N, params.M, params.L, params.lambda, params.n_distribution,
    params.supplementary_test, params.timing_tolerance, params.sustain_length,
    params.dice          faces comma separated, dice separated by ';'
    sites.points, sites.D, sites.gap, sites.spatial_dims, sites.slack
    alice.strategy, bob.strategy, alice.<param>, bob.<param>
    alice.timing.<step>, alice.superluminal.<step>   (same for bob)
    analysis.confidence, analysis.sigmas, analysis.noise_floor,
    analysis.bootstrap, analysis.bootstrap_seed, analysis.max_views
    output.transcripts, output.report, output.summary
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from vbct.adversary import StrategyDescriptor
from vbct.analysis import CONFIDENCE, MAX_VIEWS, NOISE_FLOOR_BITS, SIGMAS, AnalyticContext
from vbct.errors import ParameterError
from vbct.protocols.base import ProtocolId, ProtocolParams
from vbct.qstate import BiasParams
from vbct.spacetime import SiteConfig

UINT64 = (1 << 64) - 1


class ConfigError(ParameterError):
    """Invalid scenario configuration (exit code 2)."""


def _int(v: str) -> int:
    return int(v, 0)


def _float(v: str) -> float:
    x = float(v)
    if not math.isfinite(x):
        raise ValueError("not finite")
    return x


def _bool(v: str) -> bool:
    low = v.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError("not a boolean")


def _dice(v: str) -> tuple[tuple[float, ...], ...]:
    return tuple(tuple(_float(x) for x in die.split(",")) for die in v.split(";") if die.strip())


def _scalar(v: str) -> Any:
    """Strategy parameters: int, float, bool, 'none' or plain string."""
    if v.lower() == "none":
        return None
    for conv in (_int, _float, _bool):
        try:
            return conv(v)
        except ValueError:
            pass
    return v


SCHEMA: dict[str, Any] = {
    "protocol": str,
    "trials": _int,
    "seed": _int,
    "bias.theta": _float,
    "bias.alpha0_sq": _float,
    "bias.alpha1_sq": _float,
    "bias.p_min": _float,
    "bias.p_max": _float,
    "params.N": _int,
    "params.M": _int,
    "params.L": _int,
    "params.lambda": _float,
    "params.n_distribution": str,
    "params.supplementary_test": _bool,
    "params.timing_tolerance": _float,
    "params.sustain_length": _float,
    "params.dice": _dice,
    "sites.points": _int,
    "sites.D": _float,
    "sites.gap": _float,
    "sites.spatial_dims": _int,
    "sites.slack": _float,
    "alice.strategy": str,
    "bob.strategy": str,
    "analysis.confidence": _float,
    "analysis.sigmas": _float,
    "analysis.noise_floor": _float,
    "analysis.bootstrap": _int,
    "analysis.bootstrap_seed": _int,
    "analysis.max_views": _int,
    "output.transcripts": str,
    "output.report": str,
    "output.summary": str,
}

_PARTY_KEY = re.compile(r"^(alice|bob)\.(timing|superluminal)\.([A-Za-z_][\w]*)$|^(alice|bob)\.([A-Za-z_]\w*)$")


@dataclass(frozen=True)
class ScenarioConfig:
    params: ProtocolParams
    alice: StrategyDescriptor
    bob: StrategyDescriptor
    trials: int = 1000
    seed: int = 0
    confidence: float = CONFIDENCE
    sigmas: float = SIGMAS
    noise_floor: float = NOISE_FLOOR_BITS
    bootstrap: int = 200
    bootstrap_seed: int = 0
    max_views: int = MAX_VIEWS
    transcripts: str = "transcripts.jsonl"
    report: str = "report.json"
    summary: str = "summary.tsv"
    name: str = field(default="scenario", compare=False)

    @property
    def protocol(self) -> ProtocolId:
        return self.params.protocol

    def analytic_context(self) -> AnalyticContext:
        return AnalyticContext(self.params, self.alice, self.bob, self.confidence, self.sigmas,
                               self.noise_floor, self.bootstrap, self.bootstrap_seed, self.max_views)

    def with_overrides(self, trials: int | None = None, seed: int | None = None) -> "ScenarioConfig":
        out = self
        if trials is not None:
            if trials < 1:
                raise ConfigError("trials: must be at least 1")
            out = replace(out, trials=trials)
        if seed is not None:
            if not 0 <= seed <= UINT64:
                raise ConfigError("seed: must fit in 64 unsigned bits")
            out = replace(out, seed=seed)
        return out


# --------------------------------------------------------------------------
# parsing
# --------------------------------------------------------------------------

def parse_text(text: str) -> dict[str, str]:
    raw: dict[str, str] = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        if not k:
            raise ConfigError(f"line {n}: empty key")
        if k in raw:
            raise ConfigError(f"line {n}: duplicate key {k!r}")
        raw[k] = v
    return raw


def _convert(raw: dict[str, str]) -> tuple[dict[str, Any], dict[str, dict]]:
    typed: dict[str, Any] = {}
    party: dict[str, dict] = {"alice": {}, "bob": {}}
    for k, v in raw.items():
        if k in SCHEMA:
            try:
                typed[k] = SCHEMA[k](v)
            except ValueError:
                raise ConfigError(f"{k}: cannot parse {v!r}") from None
            continue
        m = _PARTY_KEY.match(k)
        if not m:
            raise ConfigError(f"unknown key {k!r}")
        if m.group(1):
            try:
                party[m.group(1)].setdefault(m.group(2), {})[m.group(3)] = _float(v)
            except ValueError:
                raise ConfigError(f"{k}: cannot parse {v!r}") from None
        else:
            party[m.group(4)][m.group(5)] = _scalar(v)
    return typed, party


def _bias(protocol: ProtocolId, t: dict) -> BiasParams | None:
    if protocol is ProtocolId.DIE_ROLL:
        if any(k.startswith("bias.") for k in t):
            raise ConfigError("bias.*: not used by die_roll (give params.dice)")
        return None
    pmin, pmax = t.get("bias.p_min"), t.get("bias.p_max")
    if (pmin is None) != (pmax is None):
        raise ConfigError("bias.p_min: give both bias.p_min and bias.p_max")
    if pmin is not None:
        if not 0.0 <= pmin < pmax <= 1.0:
            raise ConfigError(f"bias.p_min: need 0 <= p_min < p_max <= 1, got p_min={pmin}, p_max={pmax}")
    if protocol is ProtocolId.VBCT1:
        theta = t.get("bias.theta")
        if pmin is not None:
            if theta is not None:
                raise ConfigError("bias.theta: give theta or p_min/p_max, not both")
            if abs(pmin + pmax - 1.0) > 1e-12:
                raise ConfigError("bias.p_min: vbct1 needs p_min + p_max = 1")
            theta = math.asin(pmax - pmin)
        if theta is None:
            raise ConfigError("bias.theta: required for vbct1")
        return BiasParams(theta=theta)
    a0, a1 = t.get("bias.alpha0_sq"), t.get("bias.alpha1_sq")
    if pmin is not None:
        if a0 is not None or a1 is not None:
            raise ConfigError("bias.alpha0_sq: give alphas or p_min/p_max, not both")
        a0, a1 = pmax, pmin
    if a0 is None or a1 is None:
        raise ConfigError(f"bias.alpha0_sq: {protocol.value} needs bias.alpha0_sq and bias.alpha1_sq")
    if not a0 > a1:
        raise ConfigError(f"bias.alpha0_sq: must exceed bias.alpha1_sq (got {a0} and {a1})")
    return BiasParams(alpha0_sq=a0, alpha1_sq=a1)


def _field_of(msg: str) -> str:
    for key in SCHEMA:
        leaf = key.split(".")[-1]
        if re.search(rf"\b{re.escape(leaf)}\b", msg):
            return key
    return "params"


def from_mapping(raw: dict[str, str], name: str = "scenario") -> ScenarioConfig:
    """Validate a raw key/value mapping; every failure is a ConfigError naming the field."""
    t, party = _convert(raw)
    if "protocol" not in t:
        raise ConfigError("protocol: required")
    try:
        protocol = ProtocolId(t["protocol"])
    except ValueError:
        raise ConfigError(f"protocol: unknown {t['protocol']!r}; valid: "
                          + ", ".join(p.value for p in ProtocolId)) from None
    if protocol is not ProtocolId.VBCT1:
        for k in ("params.lambda", "params.n_distribution"):
            if k in t:
                raise ConfigError(f"{k}: only used by vbct1")
    if protocol is not ProtocolId.DIE_ROLL and "params.dice" in t:
        raise ConfigError("params.dice: only used by die_roll")
    try:
        bias = _bias(protocol, t)
        default_sites = SiteConfig(points=3 if protocol is ProtocolId.VBCT1 else 2)
        sites = SiteConfig(
            points=t.get("sites.points", default_sites.points),
            D=t.get("sites.D", default_sites.D),
            gap=t.get("sites.gap", default_sites.gap),
            spatial_dims=t.get("sites.spatial_dims", default_sites.spatial_dims),
            slack=t.get("sites.slack", default_sites.slack),
        )
        params = ProtocolParams(
            protocol=protocol,
            bias=bias,
            N=t.get("params.N", 8),
            M=t.get("params.M", 2),
            poisson_mean=t.get("params.lambda", 50.0),
            n_distribution=t.get("params.n_distribution", "poisson"),
            L=t.get("params.L", 8),
            supplementary_test=t.get("params.supplementary_test", False),
            sites=sites,
            timing_tolerance=t.get("params.timing_tolerance"),
            dice=t.get("params.dice", ()),
            sustain_length=t.get("params.sustain_length"),
        )
    except ConfigError:
        raise
    except ParameterError as exc:
        raise ConfigError(f"{_field_of(str(exc))}: {exc}") from None

    descriptors = {}
    for who in ("alice", "bob"):
        params_ = dict(party[who])
        for m in ("timing", "superluminal"):
            if m in params_ and not isinstance(params_[m], dict):
                raise ConfigError(f"{who}.{m}: give one {who}.{m}.<step> key per step")
        try:
            d = StrategyDescriptor(who, protocol, t.get(f"{who}.strategy", "honest"), params_)
            d.build()
        except ParameterError as exc:
            raise ConfigError(f"{who}.strategy: {exc}") from None
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{who}.strategy: {exc}") from None
        descriptors[who] = d

    trials = t.get("trials", 1000)
    if trials < 1:
        raise ConfigError("trials: must be at least 1")
    seed = t.get("seed", 0)
    if not 0 <= seed <= UINT64:
        raise ConfigError("seed: must fit in 64 unsigned bits")
    conf = t.get("analysis.confidence", CONFIDENCE)
    if not 0.0 < conf < 1.0:
        raise ConfigError("analysis.confidence: must lie in (0, 1)")
    for k in ("analysis.sigmas", "analysis.noise_floor"):
        if t.get(k, 1.0) < 0:
            raise ConfigError(f"{k}: must be non-negative")
    if t.get("analysis.bootstrap", 1) < 0 or t.get("analysis.max_views", 1) < 1:
        raise ConfigError("analysis.bootstrap: bad resampling settings")
    outs = {k: t.get(f"output.{k}", v) for k, v in
            (("transcripts", "transcripts.jsonl"), ("report", "report.json"), ("summary", "summary.tsv"))}
    for k, v in outs.items():
        if not v or "/" in v or "\\" in v or v in (".", ".."):
            raise ConfigError(f"output.{k}: must be a plain file name")
    if len(set(outs.values())) != 3:
        raise ConfigError("output.transcripts: output file names must differ")
    return ScenarioConfig(
        params=params,
        alice=descriptors["alice"],
        bob=descriptors["bob"],
        trials=trials,
        seed=seed,
        confidence=conf,
        sigmas=t.get("analysis.sigmas", SIGMAS),
        noise_floor=t.get("analysis.noise_floor", NOISE_FLOOR_BITS),
        bootstrap=t.get("analysis.bootstrap", 200),
        bootstrap_seed=t.get("analysis.bootstrap_seed", 0),
        max_views=t.get("analysis.max_views", MAX_VIEWS),
        name=name,
        **outs,
    )


def loads(text: str, name: str = "scenario") -> ScenarioConfig:
    return from_mapping(parse_text(text), name)


def load_config(path: str | Path) -> ScenarioConfig:
    """Read and validate a config file. I/O errors propagate as OSError."""
    p = Path(path)
    return loads(p.read_text(encoding="utf-8"), p.stem)


# --------------------------------------------------------------------------
# canonical form
# --------------------------------------------------------------------------

def _fmt(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "none"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple) and v and isinstance(v[0], tuple):
        return ";".join(",".join(repr(float(x)) for x in die) for die in v)
    return str(v)


def to_mapping(c: ScenarioConfig) -> dict[str, str]:
    p = c.params
    out: dict[str, Any] = {
        "protocol": p.protocol.value,
        "trials": c.trials,
        "seed": c.seed,
        "params.N": p.N,
        "params.M": p.M,
        "params.L": p.L,
        "params.supplementary_test": p.supplementary_test,
        "sites.points": p.sites.points,
        "sites.D": float(p.sites.D),
        "sites.gap": float(p.sites.gap),
        "sites.spatial_dims": p.sites.spatial_dims,
        "sites.slack": float(p.sites.slack),
        "alice.strategy": c.alice.name,
        "bob.strategy": c.bob.name,
        "analysis.confidence": float(c.confidence),
        "analysis.sigmas": float(c.sigmas),
        "analysis.noise_floor": float(c.noise_floor),
        "analysis.bootstrap": c.bootstrap,
        "analysis.bootstrap_seed": c.bootstrap_seed,
        "analysis.max_views": c.max_views,
        "output.transcripts": c.transcripts,
        "output.report": c.report,
        "output.summary": c.summary,
    }
    if p.protocol is ProtocolId.VBCT1:
        out["bias.theta"] = float(p.bias.theta)
        out["params.lambda"] = float(p.poisson_mean)
        out["params.n_distribution"] = p.n_distribution
    elif p.protocol is ProtocolId.DIE_ROLL:
        out["params.dice"] = p.dice
    else:
        out["bias.alpha0_sq"] = float(p.bias.alpha0_sq)
        out["bias.alpha1_sq"] = float(p.bias.alpha1_sq)
    if p.timing_tolerance is not None:
        out["params.timing_tolerance"] = float(p.timing_tolerance)
    if p.sustain_length is not None:
        out["params.sustain_length"] = float(p.sustain_length)
    for who, d in (("alice", c.alice), ("bob", c.bob)):
        for k, v in d.parameters.items():
            if isinstance(v, dict):
                for step, x in v.items():
                    out[f"{who}.{k}.{step}"] = float(x)
            else:
                out[f"{who}.{k}"] = v
    return {k: _fmt(v) for k, v in out.items()}


def dumps(c: ScenarioConfig) -> str:
    m = to_mapping(c)
    return "".join(f"{k} = {m[k]}\n" for k in sorted(m))
