"""Travel times, logit split, and its invariances."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mixroad import (
    DesignVector,
    LogitParams,
    Route,
    logit_probabilities,
    route_travel_time,
    split_demand,
)
from mixroad.assignment import location_length
from mixroad.routes import ExpresswayNode, SubregionNode

from helpers import logit_oracle

# Kept where exp(-mu*t) stays normal, so the plain-float oracle is
# well-defined; the max-shift extension has its own test below.
times_lists = st.lists(
    st.floats(min_value=0.0, max_value=10000.0, allow_nan=False),
    min_size=1,
    max_size=8,
)


def free_flow_speed_of(network):
    def speed_of(loc):
        if loc[0] == "sub":
            return 15.0
        if loc[0] in ("on", "off", "conn"):
            return network.ramp_fd.free_flow_speed
        return network.mainline_fd.free_flow_speed

    return speed_of


def test_logit_params_reject_negative_mu():
    LogitParams(0.0)
    with pytest.raises(ValueError):
        LogitParams(-0.001)


def test_location_lengths(case_study):
    net = case_study.network
    assert location_length(("sub", 1), net) == 4800.0
    assert location_length(("sub", 5), net) == 4500.0
    assert location_length(("on", 4, 5), net) == 500.0
    assert location_length(("main", 4, 5, 3), net) == 500.0
    assert location_length(("conn", 4, 5, 2), net) == 500.0


def test_single_subregion_route_time(case_study):
    # 4800 m at the 15 m/s empty-network speed.
    net = case_study.network
    r = Route((SubregionNode(1),))
    assert route_travel_time(r, net, free_flow_speed_of(net)) == pytest.approx(
        320.0, rel=1e-12
    )


def test_expressway_route_time_decomposition(case_study):
    # 12-cell expressway entered from a subregion: the on-ramp cell at
    # 40 km/h plus 12 mainline cells at 80 km/h is 45 + 270 = 315 s.
    # The destination subregion then adds its off-ramp cell (45 s) and
    # its own trip time.
    net = case_study.network
    speed_of = free_flow_speed_of(net)
    r = Route((SubregionNode(4), ExpresswayNode(4, 5), SubregionNode(5)))
    t = route_travel_time(r, net, speed_of)
    sub4 = 5500.0 / 15.0
    sub5 = 4500.0 / 15.0
    assert t == pytest.approx(sub4 + 315.0 + 45.0 + sub5, rel=1e-12)
    direct = Route((SubregionNode(4), SubregionNode(5)))
    assert route_travel_time(direct, net, speed_of) == pytest.approx(
        sub4 + sub5, rel=1e-12
    )
    # Free-flow expressway detour over a 6 km pair costs 360 s extra.
    assert t - route_travel_time(direct, net, speed_of) == pytest.approx(360.0)


def test_speed_floor_keeps_time_finite(case_study):
    net = case_study.network
    r = Route((SubregionNode(1),))
    t = route_travel_time(r, net, lambda loc: 0.0, speed_floor=0.1)
    assert t == pytest.approx(4800.0 / 0.1, rel=1e-12)
    with pytest.raises(ValueError):
        route_travel_time(r, net, lambda loc: 0.0, speed_floor=0.0)


def test_logit_frozen_pair():
    # exp(-0.01*600) vs exp(-0.01*900): the 300 s gap at mu = 0.01/s
    # gives odds e^3.
    p = logit_probabilities([600.0, 900.0], mu=0.01)
    assert p[0] == pytest.approx(0.9525741268224331, rel=1e-12)
    assert p[1] == pytest.approx(0.04742587317756678, rel=1e-12)
    assert p[0] == pytest.approx(1 / (1 + np.exp(-3.0)), rel=1e-12)


def test_logit_uniform_cases():
    np.testing.assert_allclose(
        logit_probabilities([500.0, 500.0, 500.0], mu=0.02), np.full(3, 1 / 3)
    )
    np.testing.assert_allclose(
        logit_probabilities([100.0, 900.0, 1e4], mu=0.0), np.full(3, 1 / 3)
    )


def test_logit_rejects_bad_input():
    with pytest.raises(ValueError):
        logit_probabilities([], mu=0.01)
    with pytest.raises(ValueError):
        logit_probabilities([100.0], mu=-0.5)


def test_logit_survives_huge_times():
    # Max-shift: all raw exponentials underflow, probabilities do not.
    p = logit_probabilities([1e6, 1e6 + 300.0], mu=0.01)
    assert p[0] == pytest.approx(1 / (1 + np.exp(-3.0)), rel=1e-12)
    assert np.isfinite(p).all()


@given(times=times_lists, mu=st.floats(min_value=0.0, max_value=0.05))
@settings(max_examples=200, deadline=None)
def test_logit_matches_plain_float_oracle(times, mu):
    got = logit_probabilities(times, mu)
    expected = logit_oracle(times, mu)
    np.testing.assert_allclose(got, expected, rtol=1e-12, atol=1e-15)


@given(
    times=times_lists,
    mu=st.floats(min_value=0.0, max_value=0.05),
    shift=st.floats(min_value=-1e4, max_value=1e4),
)
@settings(max_examples=200, deadline=None)
def test_logit_normalized_and_shift_invariant(times, mu, shift):
    t = np.asarray(times)
    p = logit_probabilities(t, mu)
    assert abs(p.sum() - 1.0) <= 1e-12
    q = logit_probabilities(t + shift, mu)
    np.testing.assert_allclose(p, q, rtol=0, atol=1e-12)


def test_split_demand_conserves_total():
    p = logit_probabilities([600.0, 900.0], mu=0.01)
    rates = split_demand(3400 / 3600.0, p)
    assert rates.sum() == pytest.approx(3400 / 3600.0, rel=1e-12)
    # veh/h view of the split, for the books: 3238.75 and 161.25.
    np.testing.assert_allclose(
        rates * 3600.0, [3238.7520311962726, 161.24796880372705], rtol=1e-12
    )
    with pytest.raises(ValueError):
        split_demand(-1.0, p)
