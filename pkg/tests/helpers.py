"""Shared builders and independent oracle implementations.

The oracles here deliberately re-derive results with plain Python
scalars and brute-force enumeration, not by calling the library's
vectorized code paths; tests compare the two routes against each other.
"""

from __future__ import annotations

import math

from mixroad import (
    BoundaryLink,
    CandidateExpressway,
    CostParams,
    DemandEntry,
    DemandProfile,
    FundamentalDiagram,
    LogitParams,
    MixedNetwork,
    PsoSettings,
    Scenario,
    SimConfig,
    SubregionParams,
)

# Case-study calibration constants reused by inline scenarios.
MFD = (1.4877e-7, -2.9815e-3, 15.0)
MAINLINE_FD = FundamentalDiagram(
    free_flow_speed=80 / 3.6, capacity=6000 / 3600.0, jam_density=0.375
)
RAMP_FD = FundamentalDiagram(
    free_flow_speed=40 / 3.6, capacity=3000 / 3600.0, jam_density=0.225
)


def build_network(
    n_sub: int = 2,
    adjacency: tuple[tuple[int, int], ...] | None = None,
    candidate_pairs: tuple[tuple[int, int, float], ...] = (),
    trip_lengths: dict[int, float] | None = None,
    n_max: float = 4000.0,
    c_max_veh_h: float = 12000.0,
    boundary_veh_h: float = 2000.0,
    cell_length: float = 500.0,
    unit_cost_per_m: float = 5000.0,
) -> MixedNetwork:
    """Small network with uniform parameters; adjacency defaults to a chain."""
    ids = tuple(range(1, n_sub + 1))
    trip_lengths = trip_lengths or {}
    subs = tuple(
        SubregionParams(
            id=i,
            mfd_coeffs=MFD,
            avg_trip_length=trip_lengths.get(i, 3000.0),
            n_max=n_max,
            c_max=c_max_veh_h / 3600.0,
        )
        for i in ids
    )
    if adjacency is None:
        adjacency = tuple((i, i + 1) for i in ids[:-1])
    boundaries = []
    for i, j in adjacency:
        boundaries.append(BoundaryLink(i, j, boundary_veh_h / 3600.0))
        boundaries.append(BoundaryLink(j, i, boundary_veh_h / 3600.0))
    candidates = []
    for i, j, length in candidate_pairs:
        for o, d in ((i, j), (j, i)):
            candidates.append(
                CandidateExpressway(
                    origin=o,
                    destination=d,
                    mainline_length=length,
                    cell_length=cell_length,
                    cost=unit_cost_per_m * length,
                )
            )
    return MixedNetwork(
        subregions=subs,
        boundaries=tuple(boundaries),
        candidates=tuple(candidates),
        mainline_fd=MAINLINE_FD,
        ramp_fd=RAMP_FD,
    )


def build_scenario(
    network: MixedNetwork,
    demand: dict[tuple[int, int], float] | None = None,
    demand_veh_h: float = 0.0,
    demand_until_s: float | None = None,
    horizon_s: float = 600.0,
    step_s: float = 10.0,
    mu: float = 0.005,
    name: str = "inline",
    **sim_kwargs,
) -> Scenario:
    """Scenario with constant od rates up to demand_until_s, then zero.

    demand maps (o, d) to veh/h; unlisted pairs fall back to
    demand_veh_h (so 0.0 keeps them silent but defined).
    """
    ids = tuple(s.id for s in network.subregions)
    demand = demand or {}
    if demand_until_s is None:
        demand_until_s = horizon_s / 2
    entries = []
    for o in ids:
        for d in ids:
            rate = demand.get((o, d), demand_veh_h) / 3600.0
            if demand_until_s > 0 and rate > 0:
                entries.append(DemandEntry(o, d, 0.0, demand_until_s, rate))
                if demand_until_s < horizon_s:
                    entries.append(DemandEntry(o, d, demand_until_s, horizon_s, 0.0))
            else:
                entries.append(DemandEntry(o, d, 0.0, horizon_s, 0.0))
    n_steps = int(round(horizon_s / step_s))
    return Scenario(
        network=network,
        demand=DemandProfile(entries=tuple(entries)),
        sim=SimConfig(step_s=step_s, n_steps=n_steps, **sim_kwargs),
        logit=LogitParams(mu=mu),
        pso=PsoSettings(swarm_size=8, iterations=10),
        costs=CostParams(),
        name=name,
    )


# -- independent oracles ------------------------------------------------


def allocate_oracle(flow: float, capacity: float, total: float, supply: float) -> float:
    """Scalar min-of-three with the 0/0 share convention."""
    share = flow * (supply / total) if total > 0 else flow
    return min(flow, capacity, share)


def logit_oracle(times, mu: float) -> list[float]:
    """Plain-float softmin without the max-shift."""
    weights = [math.exp(-mu * t) for t in times]
    total = sum(weights)
    return [w / total for w in weights]


def brute_force_routes(
    network: MixedNetwork, built_pairs, origin: int, destination: int, max_nodes: int
) -> set[tuple]:
    """All legal node sequences, found by plain DFS over explicit labels.

    Nodes are ("S", i) or ("E", i, j); the successor relation is read
    directly off the boundary list and the built pair set.
    """
    built = set()
    for i, j in built_pairs:
        built.add((i, j))
        built.add((j, i))
    adjacency = {(b.from_id, b.to_id) for b in network.boundaries}
    ids = network.subregion_ids

    def successors(node):
        if node[0] == "S":
            i = node[1]
            for j in ids:
                if (i, j) in adjacency:
                    yield ("S", j)
            for (a, b) in sorted(built):
                if a == i:
                    yield ("E", a, b)
        else:
            _, h, i = node
            yield ("S", i)
            for (a, b) in sorted(built):
                if a == i and b != h:
                    yield ("E", a, b)

    results: set[tuple] = set()
    start = ("S", origin)
    goal = ("S", destination)
    if origin == destination:
        return {(start,)}

    def walk(path: tuple, seen: frozenset) -> None:
        if path[-1] == goal:
            results.add(path)
            return
        if len(path) >= max_nodes:
            return
        for nxt in successors(path[-1]):
            if nxt not in seen:
                walk(path + (nxt,), seen | {nxt})

    walk((start,), frozenset([start]))
    return results


def route_to_labels(route) -> tuple:
    """Convert a library Route to the oracle's label tuples."""
    out = []
    for node in route.nodes:
        if hasattr(node, "origin"):
            out.append(("E", node.origin, node.destination))
        else:
            out.append(("S", node.id))
    return tuple(out)


def brute_force_connecting_ramps(built_pairs) -> set[tuple]:
    """All (upstream, downstream) directed expressway pairs sharing an
    interchange, U-turns excluded."""
    directed = set()
    for i, j in built_pairs:
        directed.add((i, j))
        directed.add((j, i))
    out = set()
    for h, i in directed:
        for a, j in directed:
            if a == i and j not in (h, i):
                out.add(((h, i), (i, j)))
    return out
