"""Route enumeration against a brute-force oracle, plus node helpers."""

import pytest

from mixroad import DesignVector, ExpresswayNode, Route, SubregionNode, enumerate_routes
from mixroad.routes import next_node, prev_node, route_locations

from helpers import brute_force_routes, route_to_labels


def S(i):
    return SubregionNode(i)


def E(i, j):
    return ExpresswayNode(i, j)


def test_route_constructor_rules():
    Route((S(1),))
    with pytest.raises(ValueError):
        Route(())
    with pytest.raises(ValueError):
        Route((S(1), E(1, 2)))
    with pytest.raises(ValueError):
        Route((E(1, 2), S(2)))
    with pytest.raises(ValueError):
        Route((S(1), S(2), S(1)))


def test_route_str_and_endpoints():
    r = Route((S(4), E(4, 5), S(5), S(2)))
    assert str(r) == "4 -> E4-5 -> 5 -> 2"
    assert r.origin == 4 and r.destination == 2
    assert len(r) == 4


def test_next_prev_node():
    r = Route((S(4), E(4, 5), S(5), S(2)))
    assert next_node(r, S(4)) == E(4, 5)
    assert next_node(r, S(2)) is None
    assert prev_node(r, S(5)) == E(4, 5)
    assert prev_node(r, S(4)) is None
    with pytest.raises(KeyError):
        next_node(r, S(3))


def test_same_origin_destination_single_node(case_study):
    net = case_study.network
    routes = enumerate_routes(net, DesignVector.full(net), 1, 1, max_nodes=5)
    assert routes == (Route((S(1),)),)


def test_three_node_routes_with_empty_design(case_study):
    net = case_study.network
    routes = enumerate_routes(net, DesignVector.empty(net), 4, 2, max_nodes=3)
    assert [str(r) for r in routes] == ["4 -> 1 -> 2", "4 -> 3 -> 2", "4 -> 5 -> 2"]


def test_empty_design_route_count(case_study):
    # Ring 1-2-3-4 with hub 5: nine subregion-only paths from 4 to 2
    # within five nodes.
    net = case_study.network
    routes = enumerate_routes(net, DesignVector.empty(net), 4, 2, max_nodes=5)
    assert len(routes) == 9


def test_expressway_routes_appear_when_built(case_study):
    net = case_study.network
    d = DesignVector.from_pairs(net, [(4, 5), (2, 5)])
    routes = enumerate_routes(net, d, 4, 2, max_nodes=5)
    rendered = {str(r) for r in routes}
    assert "4 -> E4-5 -> 5 -> 2" in rendered
    assert "4 -> 5 -> E5-2 -> 2" in rendered
    assert "4 -> E4-5 -> 5 -> E5-2 -> 2" in rendered
    # Connecting ramp bypasses the intermediate subregion node.
    assert "4 -> E4-5 -> E5-2 -> 2" in rendered


def test_routes_sorted_by_node_keys(case_study):
    net = case_study.network
    routes = enumerate_routes(net, DesignVector.full(net), 4, 2, max_nodes=5)
    keys = [r.sort_key() for r in routes]
    assert keys == sorted(keys)
    assert len(set(keys)) == len(keys)


@pytest.mark.parametrize("bits", [0, 1, 0b10010100, 0b00101111, 0b11111111, 0b01010101])
@pytest.mark.parametrize("od", [(4, 2), (1, 3), (5, 5), (2, 4)])
def test_enumeration_matches_brute_force(case_study, bits, od):
    net = case_study.network
    d = DesignVector.from_bits(net, f"{bits:08b}")
    for max_nodes in (3, 4, 5):
        got = enumerate_routes(net, d, od[0], od[1], max_nodes=max_nodes)
        expected = brute_force_routes(net, d.built_pairs, od[0], od[1], max_nodes)
        assert {route_to_labels(r) for r in got} == expected


def test_route_invariants_across_designs(case_study):
    net = case_study.network
    for bits in range(0, 256, 7):
        d = DesignVector.from_bits(net, f"{bits:08b}")
        for o in net.subregion_ids:
            for dest in net.subregion_ids:
                routes = enumerate_routes(net, d, o, dest, max_nodes=4)
                for r in routes:
                    assert r.origin == o and r.destination == dest
                    assert len(set(r.nodes)) == len(r.nodes)
                    for n in r.nodes:
                        if isinstance(n, ExpresswayNode):
                            assert d.is_built(n.origin, n.destination)


def test_route_set_grows_with_design(case_study):
    # Building more pairs never removes a route.
    net = case_study.network
    small = DesignVector.from_pairs(net, [(4, 5)])
    large = DesignVector.from_pairs(net, [(4, 5), (2, 5), (1, 2)])
    for od in [(4, 2), (3, 1), (5, 4)]:
        low = set(map(str, enumerate_routes(net, small, *od, max_nodes=5)))
        high = set(map(str, enumerate_routes(net, large, *od, max_nodes=5)))
        assert low <= high


def test_route_locations_chain(case_study):
    net = case_study.network
    r = Route((S(4), E(4, 5), S(5), E(5, 2), S(2)))
    locs = route_locations(r, net)
    # 4-5 and 2-5 mainlines are 6000 m, 12 cells each.
    assert locs[0] == ("sub", 4)
    assert locs[1] == ("on", 4, 5)
    assert locs[2:14] == tuple(("main", 4, 5, k) for k in range(1, 13))
    assert locs[14] == ("off", 4, 5)
    assert locs[15] == ("sub", 5)
    assert locs[16] == ("on", 5, 2)
    assert locs[29] == ("off", 5, 2)
    assert locs[30] == ("sub", 2)
    assert len(locs) == 31


def test_route_locations_connecting_ramp(case_study):
    net = case_study.network
    r = Route((S(4), E(4, 5), E(5, 2), S(2)))
    locs = route_locations(r, net)
    assert ("conn", 4, 5, 2) in locs
    i = locs.index(("conn", 4, 5, 2))
    assert locs[i - 1] == ("main", 4, 5, 12)
    assert locs[i + 1] == ("main", 5, 2, 1)
    assert ("off", 4, 5) not in locs
    assert ("on", 5, 2) not in locs
    assert ("sub", 5) not in locs
