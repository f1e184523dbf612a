"""Route graph over subregions and built expressways.

A route is an ordered node sequence.  Nodes are either subregions or
directional expressways; consecutive nodes must be linked by a real
transfer facility:

    subregion i  -> subregion j     boundary (j adjacent to i)
    subregion i  -> expressway i->j on-ramp
    expressway h->i -> subregion i  off-ramp
    expressway h->i -> expressway i->j  connecting ramp (j != h)

Routes start and end at subregions, never revisit a node, and the
origin-equals-destination case is the single-node route.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Union

from .network import DesignVector, MixedNetwork

__all__ = [
    "SubregionNode",
    "ExpresswayNode",
    "RouteNode",
    "Route",
    "enumerate_routes",
    "next_node",
    "prev_node",
    "route_locations",
]


@dataclass(frozen=True)
class SubregionNode:
    id: int

    def sort_key(self) -> tuple:
        return (0, self.id, self.id)

    def __str__(self) -> str:
        return str(self.id)


@dataclass(frozen=True)
class ExpresswayNode:
    origin: int
    destination: int

    def sort_key(self) -> tuple:
        return (1, self.origin, self.destination)

    def __str__(self) -> str:
        return f"E{self.origin}-{self.destination}"


RouteNode = Union[SubregionNode, ExpresswayNode]


@dataclass(frozen=True)
class Route:
    nodes: tuple[RouteNode, ...]

    def __post_init__(self) -> None:
        if not self.nodes:
            raise ValueError("route cannot be empty")
        if not isinstance(self.nodes[0], SubregionNode) or not isinstance(
            self.nodes[-1], SubregionNode
        ):
            raise ValueError("route must start and end at a subregion")
        if len(set(self.nodes)) != len(self.nodes):
            raise ValueError("route visits a node twice")

    @property
    def origin(self) -> int:
        return self.nodes[0].id  # type: ignore[union-attr]

    @property
    def destination(self) -> int:
        return self.nodes[-1].id  # type: ignore[union-attr]

    def sort_key(self) -> tuple:
        return tuple(n.sort_key() for n in self.nodes)

    def __str__(self) -> str:
        return " -> ".join(str(n) for n in self.nodes)

    def __len__(self) -> int:
        return len(self.nodes)


def next_node(route: Route, node: RouteNode) -> RouteNode | None:
    """Successor of node on the route; None at the final node.

    Raises KeyError when the node is not part of the route, so absence
    is signalled distinctly from reaching the end.
    """
    idx = _index(route, node)
    if idx == len(route.nodes) - 1:
        return None
    return route.nodes[idx + 1]


def prev_node(route: Route, node: RouteNode) -> RouteNode | None:
    """Predecessor of node on the route; None at the first node."""
    idx = _index(route, node)
    if idx == 0:
        return None
    return route.nodes[idx - 1]


def _index(route: Route, node: RouteNode) -> int:
    try:
        return route.nodes.index(node)
    except ValueError:
        raise KeyError(f"node {node} is not on route {route}") from None


def _successors(
    network: MixedNetwork, design: DesignVector, node: RouteNode
) -> list[RouteNode]:
    out: list[RouteNode] = []
    if isinstance(node, SubregionNode):
        i = node.id
        for j in network.neighbors(i):
            out.append(SubregionNode(j))
        for j in network.candidate_destinations(i):
            if design.is_built(i, j):
                out.append(ExpresswayNode(i, j))
    else:
        h, i = node.origin, node.destination
        out.append(SubregionNode(i))
        for j in network.candidate_destinations(i):
            if j != h and design.is_built(i, j):
                out.append(ExpresswayNode(i, j))
    return out


@lru_cache(maxsize=64)
def _design_graph(
    network: MixedNetwork, design: DesignVector
) -> tuple[tuple[RouteNode, ...], tuple[tuple[int, ...], ...]]:
    """Integer successor graph of a design; subregions come first, in id
    order, so a subregion's node index equals its position in
    network.subregion_ids."""
    nodes: list[RouteNode] = [SubregionNode(i) for i in network.subregion_ids]
    for i, j in design.built_pairs:
        nodes.extend([ExpresswayNode(i, j), ExpresswayNode(j, i)])
    index = {node: k for k, node in enumerate(nodes)}
    succs = tuple(
        tuple(index[nxt] for nxt in _successors(network, design, node)) for node in nodes
    )
    return tuple(nodes), succs


def enumerate_routes(
    network: MixedNetwork,
    design: DesignVector,
    origin: int,
    destination: int,
    max_nodes: int,
) -> tuple[Route, ...]:
    """All legal routes from origin to destination with at most max_nodes nodes.

    Expressway nodes are admitted only for built pairs.  The result is
    sorted lexicographically by node sort keys (subregions order before
    expressways with the same leading id), which fixes the class order
    used everywhere downstream.
    """
    if origin not in network.subregion_ids or destination not in network.subregion_ids:
        raise KeyError(f"unknown od pair ({origin}, {destination})")
    if max_nodes < 1:
        raise ValueError("max_nodes must be >= 1")
    if origin == destination:
        return (Route((SubregionNode(origin),)),)

    nodes, succs = _design_graph(network, design)
    start = network.subregion_ids.index(origin)
    dest = network.subregion_ids.index(destination)
    visited = bytearray(len(nodes))
    visited[start] = 1
    path = [start]
    found: list[tuple[int, ...]] = []

    def extend() -> None:
        current = path[-1]
        if current == dest:
            found.append(tuple(path))
            return
        if len(path) == max_nodes:
            return
        for nxt in succs[current]:
            if not visited[nxt]:
                visited[nxt] = 1
                path.append(nxt)
                extend()
                path.pop()
                visited[nxt] = 0

    extend()
    routes = [Route(tuple(nodes[k] for k in p)) for p in found]
    return tuple(sorted(routes, key=Route.sort_key))


# Physical locations a vehicle traverses along a route.  Tuples keep the
# compiler and the travel-time rule on the same single chain definition:
#   ("sub", i)            subregion i, length = avg trip length of i
#   ("on", i, j)          on-ramp from subregion i onto expressway i->j
#   ("off", h, i)         off-ramp from expressway h->i into subregion i
#   ("conn", h, i, j)     connecting ramp from h->i onto i->j
#   ("main", i, j, k)     mainline cell k (1-based) of expressway i->j
Location = tuple


def route_locations(route: Route, network: MixedNetwork) -> tuple[Location, ...]:
    """Expand a route into its ordered chain of physical locations."""
    chain: list[Location] = []
    nodes = route.nodes
    for idx, node in enumerate(nodes):
        if isinstance(node, SubregionNode):
            chain.append(("sub", node.id))
            continue
        i, j = node.origin, node.destination
        prev = nodes[idx - 1]
        if isinstance(prev, SubregionNode):
            chain.append(("on", i, j))
        else:
            chain.append(("conn", prev.origin, prev.destination, j))
        cells = network.candidate(i, j).cell_count
        for k in range(1, cells + 1):
            chain.append(("main", i, j, k))
        nxt = nodes[idx + 1]
        if isinstance(nxt, SubregionNode):
            chain.append(("off", i, j))
    return tuple(chain)
