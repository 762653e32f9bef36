"""Oracle tests for the linear-algebra layer.

Independent oracles: hand-built numpy arrays, mpmath at high precision and
brute-force enumeration of label sequences.
"""
import itertools
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vbct import qstate
from vbct.errors import ContractError, ParameterError
from vbct.qstate import (
    BiasParams,
    DensityMatrix,
    StateVector,
    helstrom_success,
    make_pair_state,
    make_vbct1_state,
    measure_projective,
    partial_trace,
    pass_probability,
    sigma_mixtures,
    trace_distance,
)

from oracles import brute_sigma

PM = [qstate.projector(qstate.PLUS), qstate.projector(qstate.MINUS)]


def dm(m):
    return DensityMatrix(np.asarray(m, dtype=complex))


def random_density(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m = a @ a.conj().T
    return dm(m / np.trace(m).real)


# --- state constructors -------------------------------------------------

def test_vbct1_state_theta_zero_is_ket0():
    for label in (0, 1):
        np.testing.assert_allclose(make_vbct1_state(0.0, label).amplitudes, [1, 0], atol=1e-15)


def test_vbct1_state_half_pi():
    np.testing.assert_allclose(make_vbct1_state(math.pi / 2, 0).amplitudes,
                               np.array([1, 1]) / math.sqrt(2), atol=1e-15)


def test_vbct1_state_third_pi_label1_against_mpmath():
    mpmath.mp.dps = 40
    want = [float(mpmath.cos(mpmath.pi / 6)), float(-mpmath.sin(mpmath.pi / 6))]
    np.testing.assert_allclose(make_vbct1_state(math.pi / 3, 1).amplitudes, want, atol=1e-15)


@pytest.mark.parametrize("theta,label", [(-0.1, 0), (2.0, 0), (0.5, 2)])
def test_vbct1_state_rejects_bad_input(theta, label):
    with pytest.raises(ParameterError):
        make_vbct1_state(theta, label)


def test_pair_state_examples():
    np.testing.assert_allclose(make_pair_state(1.0).amplitudes, [1, 0, 0, 0])
    np.testing.assert_allclose(make_pair_state(0.5).amplitudes, np.array([1, 0, 0, 1]) / math.sqrt(2))
    amps = make_pair_state(0.9).amplitudes.real
    np.testing.assert_allclose(amps ** 2, [0.9, 0, 0, 0.1], atol=1e-15)
    assert amps[0] == pytest.approx(0.9486832980505138, abs=1e-15)


def test_state_invariants_enforced():
    with pytest.raises(ContractError):
        StateVector([1.0, 1.0])
    with pytest.raises(ContractError):
        StateVector([1.0, 0.0, 0.0])
    with pytest.raises(ContractError):
        dm([[0.5, 0.1], [0.2, 0.5]])
    with pytest.raises(ContractError):
        dm([[1.2, 0], [0, -0.2]])


def test_bias_params():
    b = BiasParams(theta=math.asin(0.8))
    assert (b.p_min, b.p_max) == pytest.approx((0.1, 0.9))
    assert BiasParams(alpha0_sq=0.9, alpha1_sq=0.1).p_max == 0.9
    with pytest.raises(ParameterError):
        BiasParams(alpha0_sq=0.1, alpha1_sq=0.9)
    with pytest.raises(ParameterError):
        BiasParams(theta=2.0)


# --- measurement ---------------------------------------------------------

@given(st.floats(0, 1, exclude_max=True))
def test_measure_plus_in_pm_basis_always_zero(r):
    k, post = measure_projective(qstate.PLUS, PM, r)
    assert k == 0
    assert trace_distance(post, qstate.PLUS.density()) < 1e-12


@given(st.floats(0, 1, exclude_max=True))
def test_measure_ket0_in_pm_basis_is_fair(r):
    k, _ = measure_projective(qstate.basis_state(0), PM, r)
    assert k == (0 if r < 0.5 else 1)


@given(st.floats(0, 1, exclude_max=True))
def test_measure_pair_state_computational(r):
    k, post = measure_projective(make_pair_state(0.9), qstate.computational_projectors(4), r)
    assert k == (0 if r < 0.9 else 3)
    assert np.trace(post.matrix).real == pytest.approx(1.0, abs=1e-12)


def test_measure_rejects_incomplete_basis():
    with pytest.raises(ContractError):
        measure_projective(qstate.PLUS, PM[:1], 0.3)


# --- partial trace -------------------------------------------------------

def test_partial_trace_examples():
    ket00 = qstate.basis_state(0, (2, 2))
    np.testing.assert_allclose(partial_trace(ket00, 1).matrix, [[1, 0], [0, 0]])
    np.testing.assert_allclose(partial_trace(make_pair_state(0.9), 0).matrix, np.diag([0.9, 0.1]), atol=1e-15)
    np.testing.assert_allclose(partial_trace(make_pair_state(0.5), 0).matrix, np.eye(2) / 2, atol=1e-15)


def test_partial_trace_matches_einsum_oracle():
    rng = np.random.default_rng(3)
    rho = random_density(rng, 8)
    t = rho.matrix.reshape(2, 2, 2, 2, 2, 2)
    want = np.einsum("abcdbf->acdf", t).reshape(4, 4)
    np.testing.assert_allclose(partial_trace(rho, 1).matrix, want, atol=1e-12)


# --- distinguishability ---------------------------------------------------

def test_trace_distance_examples():
    r = dm(np.diag([0.9, 0.1]))
    assert trace_distance(r, r) == 0.0
    assert trace_distance(dm(np.diag([1, 0])), dm(np.diag([0, 1]))) == pytest.approx(1.0)
    assert trace_distance(r, dm(np.diag([0.1, 0.9]))) == pytest.approx(0.8, abs=1e-15)


@pytest.mark.parametrize("theta,want", [(math.pi / 2, 1.0), (math.pi / 6, 0.75), (0.0, 0.5)])
def test_helstrom_vbct1(theta, want):
    a, b = (make_vbct1_state(theta, k).density() for k in (0, 1))
    assert helstrom_success(a, b) == pytest.approx(want, abs=1e-12)


@given(st.floats(0, math.pi / 2))
def test_helstrom_vbct1_closed_form(theta):
    a, b = (make_vbct1_state(theta, k).density() for k in (0, 1))
    assert abs(helstrom_success(a, b) - 0.5 * (1 + math.sin(theta))) < 1e-12


@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 4]))
def test_trace_distance_metric(seed, dim):
    rng = np.random.default_rng(seed)
    a, b, c = (random_density(rng, dim) for _ in range(3))
    assert trace_distance(a, a) < 1e-10
    assert abs(trace_distance(a, b) - trace_distance(b, a)) < 1e-12
    assert trace_distance(a, c) <= trace_distance(a, b) + trace_distance(b, c) + 1e-10
    assert 0.0 <= trace_distance(a, b) <= 1.0
    assert helstrom_success(a, b, 0.5) == 0.5 * (1.0 + trace_distance(a, b))


@given(st.integers(0, 2**32 - 1), st.floats(0, 1))
def test_helstrom_with_prior_matches_eigen_oracle(seed, prior):
    rng = np.random.default_rng(seed)
    a, b = random_density(rng, 2), random_density(rng, 2)
    # optimal success = max over projectors P of prior tr(P a) + (1-prior) tr((1-P) b)
    ev = np.linalg.eigvalsh(prior * a.matrix - (1 - prior) * b.matrix)
    want = (1 - prior) + ev[ev > 0].sum()
    assert helstrom_success(a, b, prior) == pytest.approx(want, abs=1e-12)


# --- pass probability -------------------------------------------------

def test_pass_probability_examples():
    assert pass_probability(0.9, 0.0) == pytest.approx(1.0)
    assert pass_probability(0.5, 0.5) == pytest.approx(0.5)
    # (sqrt(0.9 * 1.0) + sqrt(0.1 * 0.0))^2
    v = pass_probability(0.9, 0.1)
    assert v == pytest.approx(0.9, abs=1e-15)
    assert v <= 1 - 0.01
    v = pass_probability(0.9, 0.05)
    assert v == pytest.approx((math.sqrt(0.9 * 0.95) + math.sqrt(0.1 * 0.05)) ** 2, abs=1e-15)
    assert v <= 1 - 0.0025


def test_pass_probability_is_fidelity():
    # independent oracle: squared overlap of the two real amplitude vectors
    for p, d in [(0.6, 0.3), (0.75, 0.2), (0.9, -0.4), (0.3, 0.05)]:
        honest = np.sqrt([p, 1 - p])
        tilted = np.sqrt([p + d, 1 - p - d])
        assert pass_probability(p, d) == pytest.approx(float(honest @ tilted) ** 2, abs=1e-14)


@st.composite
def p_delta(draw):
    p = draw(st.floats(0, 1))
    d = draw(st.floats(-p, 1 - p))
    return p, d


@given(p_delta())
def test_pass_probability_bound(pd):
    p, d = pd
    assert pass_probability(p, d) <= 1 - d * d + 1e-12


def test_pass_probability_bound_grid():
    for p in np.linspace(0, 1, 41):
        for d in np.linspace(-p, 1 - p, 41):
            assert pass_probability(p, d) <= 1 - d * d + 1e-12


def test_pass_probability_rejects_out_of_range():
    with pytest.raises(ParameterError):
        pass_probability(0.9, 0.2)


# --- sigma mixtures ---------------------------------------------------

@pytest.mark.parametrize("N", range(2, 7))
@pytest.mark.parametrize("a0,a1", [(0.9, 0.1), (0.6, 0.4), (0.75, 0.25)])
def test_sigma_mixtures_match_enumeration(N, a0, a1):
    for sel in (0, 1):
        got = sigma_mixtures(N, a0, a1, sel).to_density().matrix.real
        np.testing.assert_allclose(got, brute_sigma(N, a0, a1, sel), atol=1e-12, rtol=0)
    s0, s1 = brute_sigma(N, a0, a1, 0), brute_sigma(N, a0, a1, 1)
    want = 0.5 * np.abs(np.linalg.eigvalsh(s0 - s1)).sum()
    assert trace_distance(sigma_mixtures(N, a0, a1, 0), sigma_mixtures(N, a0, a1, 1)) == pytest.approx(want, abs=1e-12)


def test_sigma_n2_is_other_label():
    s0 = sigma_mixtures(2, 0.9, 0.1, 0).to_density().matrix.real
    s1 = sigma_mixtures(2, 0.9, 0.1, 1).to_density().matrix.real
    np.testing.assert_allclose(s0, np.diag([0.1, 0.9]), atol=1e-15)
    np.testing.assert_allclose(s1, np.diag([0.9, 0.1]), atol=1e-15)
    assert trace_distance(sigma_mixtures(2, 0.9, 0.1, 0), sigma_mixtures(2, 0.9, 0.1, 1)) == pytest.approx(0.8)


@given(st.integers(2, 40), st.floats(0, 1))
def test_sigma_equal_alphas_indistinguishable(N, a):
    assert trace_distance(sigma_mixtures(N, a, a, 0), sigma_mixtures(N, a, a, 1)) < 1e-12


@given(st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_sigma_distance_strictly_decreasing(x, y):
    a0, a1 = max(x, y), min(x, y)
    if a0 - a1 < 1e-3:
        return
    d = [trace_distance(sigma_mixtures(N, a0, a1, 0), sigma_mixtures(N, a0, a1, 1)) for N in range(2, 13)]
    assert all(u > v for u, v in zip(d, d[1:]))
    assert d[-1] < d[0] * 0.01


def test_distance_accepts_pure_states():
    a, b = make_vbct1_state(0.7, 0), make_vbct1_state(0.7, 1)
    assert trace_distance(a, b) == pytest.approx(trace_distance(a.density(), b.density()), abs=1e-15)
    assert helstrom_success(a, b) == pytest.approx(0.5 * (1 + math.sin(0.7)), abs=1e-12)
    assert helstrom_success(a, b, 0.3) == pytest.approx(helstrom_success(a.density(), b.density(), 0.3), abs=1e-15)
