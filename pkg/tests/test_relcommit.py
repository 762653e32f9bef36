import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vbct.errors import ContractError, ParameterError
from vbct.relcommit import (
    CommitmentSession,
    RejectReason,
    SessionState,
    as_bits,
    bits_to_int,
    bits_to_str,
    check_unveil,
    check_unveil_many,
    commit,
    equivocation_key,
    forge_success_probability,
    int_to_bits,
    open_positions,
    unveil,
)
from vbct.spacetime import Event


def all_blocks(L):
    return np.array(list(itertools.product((0, 1), repeat=L)), dtype=np.uint8)


def test_commit_examples():
    assert bits_to_str(commit([0], "110", "101")) == "101"
    assert bits_to_str(commit([1], "110", "101")) == "011"
    assert check_unveil("011", "110", [1], "101")
    assert not check_unveil("011", "110", [0], "101")


@given(st.integers(1, 4), st.integers(1, 6), st.data())
def test_round_trip(n, L, data):
    v = data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    r = data.draw(st.lists(st.integers(0, 1), min_size=n * L, max_size=n * L))
    k = data.draw(st.lists(st.integers(0, 1), min_size=n * L, max_size=n * L))
    s = commit(v, r, k)
    assert check_unveil(s, r, v, k)
    flipped = np.array(v) ^ 1
    # the honest key never opens the other value unless the challenge block is all zero
    blocks = np.array(r).reshape(n, L)
    if blocks.any(axis=1).all():
        assert not check_unveil(s, r, flipped, k)


@pytest.mark.parametrize("L", range(1, 9))
def test_hiding_exhaustive(L):
    # for every challenge the record distribution over uniform keys is identical for v=0 and v=1
    keys = all_blocks(L)
    for r in all_blocks(L):
        rec0 = sorted(bits_to_str(k ^ (0 & r)) for k in keys)
        rec1 = sorted(bits_to_str(k ^ (1 & r)) for k in keys)
        assert rec0 == rec1


@pytest.mark.parametrize("L", range(1, 9))
def test_forge_exhaustive(L):
    # committer fixes (s, k) for v=0, later guesses r and opens as 1; success over uniform r is exactly 2^-L
    blocks = all_blocks(L)
    n = len(blocks)
    k = np.zeros(L, dtype=np.uint8)
    best = 0
    for guess in blocks:
        k1 = equivocation_key([0], k, [1], guess)
        wins = 0
        for r in blocks:
            s = commit([0], r, k)
            wins += check_unveil(s, r, [1], k1)
        best = max(best, wins)
    assert best / n == forge_success_probability(L) == 2.0**-L


def test_l3_enumeration():
    blocks = all_blocks(3)
    table = {(v, bits_to_str(r), bits_to_str(k)): bits_to_str(commit([v], r, k))
             for v in (0, 1) for r in blocks for k in blocks}
    assert len(table) == 128
    for r in blocks:
        for v in (0, 1):
            assert len({table[(v, bits_to_str(r), bits_to_str(k))] for k in blocks}) == 8


def test_check_unveil_many_matches_scalar():
    rng = np.random.default_rng(3)
    n, L = 300, 5
    r = rng.integers(0, 2, (n, L), dtype=np.uint8)
    k = rng.integers(0, 2, (n, L), dtype=np.uint8)
    v = rng.integers(0, 2, n, dtype=np.uint8)
    s = k ^ (v[:, None] & r)
    claim = v ^ rng.integers(0, 2, n, dtype=np.uint8)
    got = check_unveil_many(s, r, claim, k)
    want = [check_unveil(s[i], r[i], [claim[i]], k[i]) for i in range(n)]
    assert got.tolist() == want
    with pytest.raises(ParameterError):
        check_unveil_many(s, r[:, :2], v, k)


def test_bad_inputs():
    with pytest.raises(ParameterError):
        as_bits("012")
    with pytest.raises(ParameterError):
        commit([0, 1], "101", "101")
    with pytest.raises(ParameterError):
        commit([1], "101", "1")
    with pytest.raises(ParameterError):
        forge_success_probability(0)
    assert not check_unveil("011", "110", [1], "1")


@given(st.integers(1, 16), st.data())
def test_int_bits_round_trip(width, data):
    x = data.draw(st.integers(0, 2**width - 1))
    assert bits_to_int(int_to_bits(x, width)) == x


def test_session_transitions():
    s = CommitmentSession("A", "B", n_bits=1, L=3)
    assert s.state is SessionState.OPEN
    with pytest.raises(ContractError):
        unveil(s, [0], "000")
    s.commit([1], "110", "101")
    assert s.state is SessionState.COMMITTED
    with pytest.raises(ContractError):
        s.commit([1], "110", "101")
    res = unveil(s, [1], "101")
    assert res.accepted and s.state is SessionState.UNVEILED
    with pytest.raises(ContractError):
        unveil(s, [1], "101")


def test_session_mismatch_fails():
    s = CommitmentSession("A", "B", n_bits=1, L=3)
    s.commit([1], "110", "101")
    res = unveil(s, [0], "101")
    assert not res.accepted and res.reason is RejectReason.MISMATCH
    assert s.history == [SessionState.COMMITTED, SessionState.FAILED]


def test_session_timing():
    s = CommitmentSession("A", "B", n_bits=1, L=2)
    s.commit([0], "11", "01", challenge_event=Event(0.0, (0.0,)))
    res = unveil(s, [0], "01", Event(2.0, (1.0,)))
    assert res.reason is RejectReason.TIMING and s.state is SessionState.FAILED
    s = CommitmentSession("A", "B", n_bits=1, L=2)
    s.commit([0], "11", "01", challenge_event=Event(0.0, (0.0,)))
    assert unveil(s, [0], "01", Event(0.5, (1.0,))).accepted
    s = CommitmentSession("A", "B", n_bits=1, L=2, sustain_until=3.0)
    s.commit([0], "11", "01", challenge_event=Event(0.0, (0.0,)))
    assert unveil(s, [0], "01", Event(2.0, (1.0,))).accepted


def test_open_positions():
    s = CommitmentSession("A", "B", n_bits=3, L=2)
    value, r, k = [1, 0, 1], "111011", "010110"
    s.commit(value, r, k)
    kb = as_bits(k).reshape(3, 2)
    res = open_positions(s, [0, 2], [1, 1], kb[[0, 2]])
    assert res.accepted and s.state is SessionState.COMMITTED
    assert open_positions(s, [1], [0], kb[[1]], final=True).accepted
    assert s.state is SessionState.UNVEILED

    s = CommitmentSession("A", "B", n_bits=3, L=2)
    s.commit(value, r, k)
    with pytest.raises(ContractError):
        open_positions(s, [3], [0], kb[[0]])
    assert not open_positions(s, [1], [1], kb[[1]]).accepted
    assert s.state is SessionState.FAILED
