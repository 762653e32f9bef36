import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from vbct.errors import ContractError, ParameterError
from vbct.spacetime import (
    Delay,
    Event,
    EventRef,
    IntervalClass,
    Site,
    SiteConfig,
    TimedMessage,
    ViolationKind,
    earliest_arrival,
    independent,
    interval_class,
    ordered,
    spacelike,
    sustain_window,
    verify_independence,
    verify_schedule,
)


def site(owner, index, x, slack=0.0):
    return Site(owner, index, (float(x),), slack)


def msg_at(label, x, t):
    s = site("A", 1, x)
    return TimedMessage.send(label, s, s, t)


def test_interval_examples():
    assert interval_class(Event(0, (0.0,)), Event(0, (1.0,))) is IntervalClass.SPACELIKE
    assert interval_class(Event(0, (0.0,)), Event(2, (1.0,))) is IntervalClass.TIMELIKE
    assert interval_class(Event(0, (0.0,)), Event(1, (1.0,))) is IntervalClass.LIGHTLIKE


def test_earliest_arrival_examples():
    assert earliest_arrival(site("A", 1, 0), site("B", 1, 1), 0.0) == 1.0
    assert earliest_arrival(site("A", 1, 0), site("A", 1, 0), 5.0) == 5.0
    assert earliest_arrival(site("A", 1, 0), site("B", 1, 3), 2.0) == 5.0


def test_earliest_arrival_3d():
    a = Site("A", 1, (0.0, 0.0, 0.0))
    b = Site("B", 1, (1.0, 2.0, 2.0))
    assert earliest_arrival(a, b, 1.0) == pytest.approx(4.0)


@pytest.mark.parametrize("t2,x2,want", [(0, 10, True), (20, 10, False), (10, 10, False)])
def test_verify_independence_examples(t2, x2, want):
    m1, m2 = msg_at("a", 0, 0), msg_at("b", x2, t2)
    assert verify_independence(m1, m2) is want
    assert verify_independence(m2, m1) is want


@given(st.floats(-50, 50), st.floats(-50, 50), st.floats(-50, 50), st.floats(-50, 50))
def test_verify_independence_symmetric(t1, x1, t2, x2):
    m1, m2 = msg_at("a", x1, t1), msg_at("b", x2, t2)
    assert verify_independence(m1, m2) == verify_independence(m2, m1)


def test_slack_tightens_independence():
    a, b = site("A", 1, 0, slack=0.3), site("A", 2, 1, slack=0.3)
    m1 = TimedMessage.send("a", a, a, 0.0)
    m2 = TimedMessage.send("b", b, b, 0.5)
    assert not verify_independence(m1, m2)
    m3 = TimedMessage.send("c", b, b, 0.3)
    assert verify_independence(m1, m3)


def test_constructor_refuses_superluminal():
    a, b = site("A", 1, 0), site("B", 1, 1)
    with pytest.raises(ContractError):
        TimedMessage("x", a, b, a.event(0.0), b.event(0.5))
    with pytest.raises(ContractError):
        TimedMessage("x", a, b, Event(0.0, (3.0,)), b.event(2.0))
    with pytest.raises(ParameterError):
        TimedMessage.send("x", a, b, 0.0, delay=-1.0)


def test_fault_api_is_reported():
    a, b = site("A", 1, 0), site("B", 1, 1)
    m = TimedMessage.fault("x", a, b, 0.0, 0.5)
    assert m.is_superluminal()
    v = verify_schedule([m], [])
    assert [x.kind for x in v] == [ViolationKind.SUPERLUMINAL]


@given(st.floats(1e-3, 1e3), st.floats(-1e3, 1e3), st.floats(0, 10))
def test_two_site_light_delay(D, t0, extra):
    cfg = SiteConfig(points=2, D=D, gap=D / 10)
    a1, a2 = cfg.sites["A1"], cfg.sites["A2"]
    m = TimedMessage.send("x", a1, a2, t0, delay=extra)
    assert m.reception.time - m.emission.time >= D - 1e-9 * max(1.0, abs(t0))
    with pytest.raises(ContractError):
        TimedMessage("y", a1, a2, a1.event(t0), a2.event(t0 + 0.99 * D))


def vbct1_like_schedule(shift=0.0):
    cfg = SiteConfig(points=3)
    s = cfg.sites
    q = TimedMessage.send("q", s["A1"], s["B1"], 1.0)
    ident = TimedMessage.send("id", s["A2"], s["B2"], 1.0)
    ann = TimedMessage.send("announce", s["B3"], s["A3"], 1.0 + shift)
    cons = [independent("q", "id"), independent("announce", "q"), independent("announce", "id")]
    return [q, ident, ann], cons


def test_honest_schedule_clean():
    msgs, cons = vbct1_like_schedule()
    assert verify_schedule(msgs, cons) == []


def test_late_announcement_flagged_once():
    # B3 at 2D+gap: past 1 + 2.001 it is inside A1's future light cone, not yet A2's at 1 + 1.001 + ...
    msgs, cons = vbct1_like_schedule(shift=2.05)
    v = verify_schedule(msgs, cons)
    assert len(v) == 2  # causal future of both emissions once past the farther one
    msgs, cons = vbct1_like_schedule(shift=1.5)
    v = verify_schedule(msgs, cons)
    assert [x.kind for x in v] == [ViolationKind.NOT_SPACELIKE]


def test_premature_delay_flagged():
    cfg = SiteConfig()
    s = cfg.sites
    z = TimedMessage.send("z2", s["A2"], s["B2"], 0.0)
    ch = TimedMessage.send("challenge", s["A2"], s["B2"], 0.25)
    rule = Delay(EventRef("z2", "reception"), EventRef("challenge", "reception"), minimum=0.5, maximum=0.5)
    v = verify_schedule([z, ch], [rule])
    assert [x.kind for x in v] == [ViolationKind.DELAY_TOO_SHORT]
    ch = TimedMessage.send("challenge", s["A2"], s["B2"], 0.5)
    assert verify_schedule([z, ch], [rule]) == []


def test_order_and_sustain_rules():
    a = msg_at("a", 0, 1.0)
    b = msg_at("b", 0, 0.5)
    assert verify_schedule([a, b], [ordered("a", "b")])[0].kind is ViolationKind.ORDER
    assert verify_schedule([a, b], [ordered("b", "a")]) == []
    c = msg_at("c", 0, 6.0)
    assert verify_schedule([a, c], [sustain_window("a", "c", 4.0)])[0].kind is ViolationKind.SUSTAIN_EXPIRED
    assert verify_schedule([a, c], [sustain_window("a", "c", 5.0)]) == []


def test_dangling_reference_is_contract_error():
    with pytest.raises(ContractError):
        verify_schedule([msg_at("a", 0, 0)], [spacelike("a", "missing")])


def test_duplicate_labels_rejected():
    with pytest.raises(ContractError):
        verify_schedule([msg_at("a", 0, 0), msg_at("a", 1, 0)], [])


def test_lightlike_is_not_independent():
    a = msg_at("a", 0, 0.0)
    b = msg_at("b", 1, 1.0)
    assert verify_schedule([a, b], [independent("a", "b")])[0].kind is ViolationKind.NOT_SPACELIKE


def test_site_config_geometry():
    cfg = SiteConfig(points=3, D=2.0, gap=0.01, spatial_dims=2)
    s = cfg.sites
    assert len({x.position for x in s.values()}) == 6
    assert math.dist(s["A1"].position, s["A2"].position) == 2.0
    assert math.dist(s["A1"].position, s["B1"].position) == pytest.approx(0.01)
    for bad in (dict(points=1), dict(gap=0.5), dict(spatial_dims=4), dict(slack=-1)):
        with pytest.raises(ParameterError):
            SiteConfig(**bad)
