import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chi2_contingency

from vbct.errors import ParameterError
from vbct.protocols import (
    AbortReason,
    AliceStrategy,
    BobStrategy,
    Outcome,
    ProtocolParams,
    make_rng,
    run,
    trial_seed,
)
from vbct.protocols.serialize import read_runs, transcript_lines
from vbct.qstate import BiasParams
from vbct.spacetime import verify_schedule

SIN08 = math.asin(0.8)


def vbct1(theta=SIN08, **kw):
    kw.setdefault("poisson_mean", 1.0)
    kw.setdefault("n_distribution", "fixed")
    return ProtocolParams("vbct1", BiasParams(theta=theta), **kw)


def pairs(pid="vbct2", a0=0.9, a1=0.1, **kw):
    kw.setdefault("N", 4)
    kw.setdefault("M", 2)
    return ProtocolParams(pid, BiasParams(alpha0_sq=a0, alpha1_sq=a1), **kw)


def vbct4(a0=0.75, a1=0.25, **kw):
    kw.setdefault("N", 4)
    kw.setdefault("M", 3)
    return ProtocolParams("vbct4", BiasParams(alpha0_sq=a0, alpha1_sq=a1), **kw)


DIE = ProtocolParams("die_roll", dice=((0.5, 0.3, 0.2), (0.2, 0.3, 0.5)), N=4, M=1)

ALL = {
    "vbct1": vbct1(poisson_mean=4.0, n_distribution="poisson"),
    "vbct2": pairs(),
    "vbct2_supp": pairs(supplementary_test=True),
    "vbct3": pairs("vbct3", 0.8, 0.2),
    "vbct4": vbct4(),
    "die_roll": DIE,
}


def outcomes(params, w, n, seed=0):
    a, b = AliceStrategy(), BobStrategy(w=w)
    return np.array([run(params, a, b, trial_seed(seed, i)).outcome.value for i in range(n)])


def within(freq, p, n, k=4.0):
    return abs(freq - p) <= k * math.sqrt(p * (1 - p) / n)


def test_params_validation():
    with pytest.raises(ParameterError):
        pairs(N=1)
    with pytest.raises(ParameterError):
        pairs(M=0)
    with pytest.raises(ParameterError):
        pairs(L=0)
    with pytest.raises(ParameterError):
        vbct1(poisson_mean=0.0)
    with pytest.raises(ParameterError):
        vbct4(0.7, 0.3, N=4)  # 2.8 zeros per row
    with pytest.raises(ParameterError):
        ProtocolParams("vbct1")
    with pytest.raises(ParameterError):
        ProtocolParams("die_roll", dice=((0.5, 0.6), (0.5, 0.5)))


def test_outcome_contract():
    with pytest.raises(Exception):
        Outcome(None)
    assert Outcome.abort(AbortReason.TIMING).aborted
    assert Outcome(1).label() == "1"


def test_rng_is_seed_determined():
    a = make_rng(5).random(4)
    make_rng(6).random(3)
    assert np.array_equal(make_rng(5).random(4), a)
    assert trial_seed(3, 7) == (3 << 32) | 7
    with pytest.raises(ParameterError):
        make_rng(-1)


@pytest.mark.parametrize("name", sorted(ALL))
def test_determinism(name):
    p = ALL[name]
    a, b = AliceStrategy(), BobStrategy()
    for s in range(5):
        assert transcript_lines(run(p, a, b, s)) == transcript_lines(run(p, a, b, s))


@pytest.mark.parametrize("name", sorted(ALL))
@settings(max_examples=25)
@given(seed=st.integers(0, 2**40))
def test_honest_never_aborts_and_schedule_clean(name, seed):
    t = run(ALL[name], AliceStrategy(), BobStrategy(), seed)
    assert not t.outcome.aborted
    assert t.violations == []
    assert verify_schedule(t.messages, t.constraints) == []
    assert not t.flags["detected"]


@settings(max_examples=30)
@given(seed=st.integers(0, 2**40), N=st.integers(2, 9), M=st.integers(1, 3),
       pid=st.sampled_from(["vbct2", "vbct3"]), a0=st.floats(0.55, 0.99))
def test_pairs_honest_over_parameter_grid(seed, N, M, pid, a0):
    t = run(pairs(pid, a0, 1 - a0, N=N, M=M), AliceStrategy(), BobStrategy(), seed)
    assert not t.outcome.aborted and t.violations == []


@settings(max_examples=30)
@given(seed=st.integers(0, 2**40), theta=st.floats(0.0, math.pi / 2))
def test_vbct1_outcome_is_xor(seed, theta):
    t = run(vbct1(theta, poisson_mean=3.0, n_distribution="poisson"), AliceStrategy(), BobStrategy(), seed)
    assert t.outcome.value == t.records["a"] ^ t.records["b"]


def test_vbct1_theta_zero_is_uniform():
    n = 4000
    for w in (0, 1):
        assert within(outcomes(vbct1(0.0), w, n).mean(), 0.5, n)


@pytest.mark.parametrize("w,p0", [(0, 0.9), (1, 0.1)])
def test_vbct1_bias(w, p0):
    n = 6000
    assert within(1 - outcomes(vbct1(), w, n).mean(), p0, n)


@pytest.mark.parametrize("pid,a0,w,p0", [("vbct2", 0.9, 0, 0.9), ("vbct3", 0.8, 1, 0.2)])
def test_pairs_bias(pid, a0, w, p0):
    n = 3000
    assert within(1 - outcomes(pairs(pid, a0, 1 - a0), w, n).mean(), p0, n)


def test_vbct2_batches_geometric():
    # with z=0 drawn with probability 2^-M the batch count is geometric with mean 2^M
    p = pairs(M=3)
    n = 2000
    counts = np.array([run(p, AliceStrategy(), BobStrategy(), s).records["batches"] for s in range(n)])
    mean, sd = 8.0, math.sqrt((1 - 1 / 8) / (1 / 8) ** 2)
    assert abs(counts.mean() - mean) <= 4 * sd / math.sqrt(n)
    assert counts.min() >= 1


def test_vbct4_bias_and_bookkeeping():
    p = vbct4(N=100, M=8)
    n = 1500
    vals = []
    for s in range(n):
        t = run(p, AliceStrategy(), BobStrategy(w=0), s)
        assert t.records["audit_valid"]
        assert len(t.records["audited_pairs"]) == 7
        assert t.records["pair"] not in t.records["audited_pairs"]
        assert len(t.records["opened_after_choice"]) == 1
        vals.append(t.outcome.value)
    assert within(1 - np.mean(vals), 0.75, n)


def test_die_roll_frequencies():
    n = 3000
    for w, probs in enumerate(DIE.dice):
        vals = outcomes(DIE, w, n)
        for face, p in enumerate(probs):
            assert within(np.mean(vals == face), p, n)


def test_die_roll_fair():
    p = ProtocolParams("die_roll", dice=((1 / 3,) * 3, (0.5, 0.25, 0.25)), N=3, M=1)
    n = 3000
    vals = outcomes(p, 0, n)
    for face in range(3):
        assert within(np.mean(vals == face), 1 / 3, n)


def test_two_faced_die_matches_vbct2():
    n = 2500
    die = ProtocolParams("die_roll", dice=((0.9, 0.1), (0.1, 0.9)), N=4, M=2)
    a = outcomes(die, 0, n, seed=1)
    b = outcomes(pairs(), 0, n, seed=2)
    table = [[np.sum(a == 0), np.sum(a == 1)], [np.sum(b == 0), np.sum(b == 1)]]
    assert chi2_contingency(table).pvalue > 1e-3


def test_bad_die_input():
    with pytest.raises(ValueError):
        run(DIE, AliceStrategy(), BobStrategy(w=2), 0)


@pytest.mark.parametrize("name", sorted(ALL))
def test_serialization_round_trip(name):
    t = run(ALL[name], AliceStrategy(), BobStrategy(), 11)
    lines = transcript_lines(t, trial=3)
    [(head, msgs, cons)] = list(read_runs(lines))
    assert head["trial"] == 3 and head["seed"] == 11
    assert [m.label for m in msgs] == t.labels()
    assert [m.emission for m in msgs] == [m.emission for m in t.messages]
    assert [m.reception for m in msgs] == [m.reception for m in t.messages]
    assert len(cons) == len(t.constraints)
    assert verify_schedule(msgs, cons) == []
