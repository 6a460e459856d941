import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cftsim.connectivity import (
    Channel,
    Connectivity,
    GroupConfig,
    LinkProcess,
    MobileHostLinks,
    ScriptedLink,
    build_connectivity,
)
from cftsim.engine import RngStreams


def _gen(seed=0):
    return np.random.default_rng(seed)


def test_fixed_availability_extremes():
    up = LinkProcess(1.0, 4.0, _gen())
    down = LinkProcess(0.0, 4.0, _gen())
    for t in (0.0, 10.0, 1e6):
        assert up.is_up(t) and not down.is_up(t)
    assert down.next_up(3.0) is None
    assert up.next_up(3.0) == 3.0


@settings(max_examples=8, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(1.0, 8.0), st.integers(0, 2**32 - 1))
def test_long_run_on_fraction_matches_availability(a, mean_off, seed):
    link = LinkProcess(a, mean_off, _gen(seed))
    assert abs(link.on_fraction(1e6) - a) < 0.01


def test_point_sampled_up_share_at_95_percent_disconnection():
    link = LinkProcess(0.05, 4.0, _gen(1))
    ts = np.random.default_rng(2).uniform(0, 1e6, 100_000)
    share = np.mean([link.is_up(t) for t in ts])
    assert abs(share - 0.05) < 0.01


def test_out_of_order_queries_see_the_same_trace():
    a, b = LinkProcess(0.5, 4.0, _gen(9)), LinkProcess(0.5, 4.0, _gen(9))
    ts = np.random.default_rng(0).uniform(0, 5000, 500)
    fwd = {t: a.is_up(t) for t in sorted(ts)}
    rev = {t: b.is_up(t) for t in sorted(ts, reverse=True)}
    assert fwd == rev


def test_scripted_next_up():
    link = ScriptedLink(True, (10.0, 14.0))
    assert link.is_up(9.99) and not link.is_up(10.0) and link.is_up(14.0)
    assert link.next_up(12.0) == 14.0
    assert link.next_up(5.0) == 5.0
    assert ScriptedLink(True, (10.0,)).next_up(12.0) is None


def test_scripted_rejects_unsorted_toggles():
    with pytest.raises(ValueError):
        ScriptedLink(True, (5.0, 3.0))


def _one_host(std, adh):
    return Connectivity({0: MobileHostLinks(0, std, adh)})


def test_standard_takes_precedence_over_adhoc():
    net = _one_host(ScriptedLink.always(True), ScriptedLink.always(True))
    assert net.effective_channel(0, 1.0, adhoc_enabled=True) is Channel.STANDARD


def test_adhoc_used_only_when_enabled():
    net = _one_host(ScriptedLink.always(False), ScriptedLink.always(True))
    assert net.effective_channel(0, 1.0, adhoc_enabled=True) is Channel.ADHOC
    assert net.effective_channel(0, 1.0, adhoc_enabled=False) is Channel.NONE
    assert net.next_channel_available(0, 1.0, adhoc_enabled=False) is None


def test_next_channel_takes_earliest_of_both_links():
    net = _one_host(ScriptedLink(False, (20.0,)), ScriptedLink(False, (12.0,)))
    assert net.next_channel_available(0, 5.0, adhoc_enabled=True) == 12.0
    assert net.next_channel_available(0, 5.0, adhoc_enabled=False) == 20.0


def test_unknown_host_raises():
    net = _one_host(ScriptedLink.always(True), ScriptedLink.always(True))
    with pytest.raises(KeyError):
        net.effective_channel(7, 0.0, True)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 20_000))
def test_next_channel_available_is_usable(t):
    net = build_connectivity(4, 0.7, GroupConfig((0.3,)), RngStreams(3))
    for mh in range(4):
        nxt = net.next_channel_available(mh, t, True)
        assert nxt is not None and nxt >= t
        assert net.effective_channel(mh, nxt, True) is not Channel.NONE


def test_standard_and_adhoc_uncorrelated():
    net = build_connectivity(1, 0.5, GroupConfig((0.5,)), RngStreams(4))
    ts = np.random.default_rng(5).uniform(0, 1e6, 100_000)
    s = np.array([net.is_standard_up(0, t) for t in ts], float)
    a = np.array([net.is_adhoc_up(0, t) for t in ts], float)
    assert abs(np.corrcoef(s, a)[0, 1]) < 0.02


def test_groups_round_robin_and_limits():
    g = GroupConfig((0.1, 0.2, 0.3))
    assert [g.level_of(m) for m in range(6)] == [0.1, 0.2, 0.3, 0.1, 0.2, 0.3]
    with pytest.raises(ValueError):
        GroupConfig((0.1, 0.2, 0.3, 0.4))
    with pytest.raises(ValueError):
        GroupConfig(())


def test_standard_trace_independent_of_adhoc_levels():
    a = build_connectivity(5, 0.5, GroupConfig((0.1,)), RngStreams(8))
    b = build_connectivity(5, 0.5, GroupConfig((0.9,)), RngStreams(8))
    ts = np.linspace(0, 3600, 2000)
    for mh in range(5):
        assert [a.is_standard_up(mh, t) for t in ts] == [b.is_standard_up(mh, t) for t in ts]
