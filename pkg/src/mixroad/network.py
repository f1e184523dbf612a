"""Static description of a mixed urban/expressway road network.

A network couples two layers:

* an urban layer of subregions, each governed by an aggregate
  production function P(n) = a3*n^3 + a2*n^2 + a1*n (veh*m/s), with
  directional boundary links between adjacent subregions;
* an expressway layer of candidate links, each a directional mainline
  divided into equal cells plus an on-ramp at its origin subregion and
  an off-ramp at its destination subregion.  Candidates always come in
  symmetric twins (i->j and j->i) and are built or skipped per
  unordered pair.

UNIT CONVENTIONS (everything internal is SI):
    length m, time s, speed m/s, flow veh/s, density veh/m,
    accumulation veh, money $.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Iterator

__all__ = [
    "SubregionParams",
    "BoundaryLink",
    "FundamentalDiagram",
    "CandidateExpressway",
    "MixedNetwork",
    "DesignVector",
    "ValidationReport",
    "validate_network",
    "design_cost",
    "is_budget_feasible",
    "connecting_ramps",
]

# Grid size for the positivity check of the production polynomial.
_P_CHECK_SAMPLES = 513


@dataclass(frozen=True)
class SubregionParams:
    """Aggregate parameters of one urban subregion.

    mfd_coeffs are (a3, a2, a1) of the cubic production function; there
    is no constant term, so P(0) = 0 holds by construction.  P must be
    nonnegative on [0, n_max], which is checked on a sample grid.
    """

    id: int
    mfd_coeffs: tuple[float, float, float]
    avg_trip_length: float  # m
    n_max: float            # veh
    c_max: float            # veh/s, receiving capacity at n = 0

    def __post_init__(self) -> None:
        if len(self.mfd_coeffs) != 3:
            raise ValueError(f"subregion {self.id}: need exactly (a3, a2, a1)")
        if self.avg_trip_length <= 0:
            raise ValueError(f"subregion {self.id}: avg_trip_length must be > 0")
        if self.n_max <= 0:
            raise ValueError(f"subregion {self.id}: n_max must be > 0")
        if self.c_max <= 0:
            raise ValueError(f"subregion {self.id}: c_max must be > 0")
        a3, a2, a1 = self.mfd_coeffs
        for k in range(_P_CHECK_SAMPLES):
            n = self.n_max * k / (_P_CHECK_SAMPLES - 1)
            p = ((a3 * n + a2) * n + a1) * n
            if p < -1e-9:
                raise ValueError(
                    f"subregion {self.id}: production negative at n={n:.1f} (P={p:.3g})"
                )


@dataclass(frozen=True)
class BoundaryLink:
    """Directional transfer boundary between two adjacent subregions."""

    from_id: int
    to_id: int
    capacity: float  # veh/s; 0 closes the boundary

    def __post_init__(self) -> None:
        if self.from_id == self.to_id:
            raise ValueError(f"boundary {self.from_id}->{self.to_id}: self loop")
        if self.capacity < 0:
            raise ValueError(f"boundary {self.from_id}->{self.to_id}: capacity < 0")


@dataclass(frozen=True)
class FundamentalDiagram:
    """Triangular flow-density relation for expressway cells.

    Derived quantities: critical density K_c = C / V_f and congestion
    wave speed w = C / (K_j - K_c).  A capacity of 0 degenerates to an
    always-closed link (all demands and supplies evaluate to 0).
    """

    free_flow_speed: float  # m/s
    capacity: float         # veh/s
    jam_density: float      # veh/m

    def __post_init__(self) -> None:
        if self.free_flow_speed <= 0:
            raise ValueError("free_flow_speed must be > 0")
        if self.capacity < 0:
            raise ValueError("capacity must be >= 0")
        if self.jam_density <= 0:
            raise ValueError("jam_density must be > 0")
        if self.critical_density >= self.jam_density:
            raise ValueError("critical density must stay below jam density")

    @property
    def critical_density(self) -> float:
        return self.capacity / self.free_flow_speed

    @property
    def wave_speed(self) -> float:
        return self.capacity / (self.jam_density - self.critical_density)


@dataclass(frozen=True)
class CandidateExpressway:
    """One directional candidate expressway from origin to destination.

    The mainline is split into cells of cell_length; validity of the
    exact-multiple requirement is reported by validate_network rather
    than enforced here, so that malformed inputs can be diagnosed.
    cost is the construction cost charged once per unordered pair (the
    symmetric twin carries the same number).
    """

    origin: int
    destination: int
    mainline_length: float  # m
    cell_length: float      # m
    cost: float             # $

    def __post_init__(self) -> None:
        if self.origin == self.destination:
            raise ValueError(f"candidate {self.origin}->{self.destination}: self loop")
        if self.mainline_length <= 0 or self.cell_length <= 0:
            raise ValueError(
                f"candidate {self.origin}->{self.destination}: lengths must be > 0"
            )
        if self.cost < 0:
            raise ValueError(f"candidate {self.origin}->{self.destination}: cost < 0")

    @property
    def pair(self) -> tuple[int, int]:
        return (min(self.origin, self.destination), max(self.origin, self.destination))

    @property
    def cell_count(self) -> int:
        count = self.mainline_length / self.cell_length
        rounded = round(count)
        if abs(count - rounded) > 1e-9 or rounded < 1:
            raise ValueError(
                f"candidate {self.origin}->{self.destination}: mainline_length "
                f"{self.mainline_length} is not a multiple of cell_length {self.cell_length}"
            )
        return int(rounded)


@dataclass(frozen=True)
class MixedNetwork:
    """Immutable container for subregions, boundaries and candidates."""

    subregions: tuple[SubregionParams, ...]
    boundaries: tuple[BoundaryLink, ...]
    candidates: tuple[CandidateExpressway, ...]
    mainline_fd: FundamentalDiagram
    ramp_fd: FundamentalDiagram

    def __post_init__(self) -> None:
        ids = [s.id for s in self.subregions]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate subregion ids")

    @property
    def subregion_ids(self) -> tuple[int, ...]:
        return tuple(sorted(s.id for s in self.subregions))

    def subregion(self, sid: int) -> SubregionParams:
        for s in self.subregions:
            if s.id == sid:
                return s
        raise KeyError(f"unknown subregion id {sid}")

    def neighbors(self, sid: int) -> tuple[int, ...]:
        """Subregions reachable from sid over a directional boundary."""
        return tuple(sorted(b.to_id for b in self.boundaries if b.from_id == sid))

    def boundary_capacity(self, from_id: int, to_id: int) -> float:
        for b in self.boundaries:
            if b.from_id == from_id and b.to_id == to_id:
                return b.capacity
        raise KeyError(f"no boundary {from_id}->{to_id}")

    @property
    def candidate_pairs(self) -> tuple[tuple[int, int], ...]:
        """Unordered candidate pairs, sorted by (min id, max id).

        This ordering defines the bit positions of every DesignVector
        over this network.
        """
        return tuple(sorted({c.pair for c in self.candidates}))

    def candidate_destinations(self, origin: int) -> tuple[int, ...]:
        return tuple(sorted(c.destination for c in self.candidates if c.origin == origin))

    def candidate(self, origin: int, destination: int) -> CandidateExpressway:
        for c in self.candidates:
            if c.origin == origin and c.destination == destination:
                return c
        raise KeyError(f"no candidate expressway {origin}->{destination}")

    def pair_cost(self, pair: tuple[int, int]) -> float:
        return self.candidate(pair[0], pair[1]).cost


@dataclass(frozen=True)
class DesignVector:
    """Build decision per unordered candidate pair, in candidate_pairs order."""

    pairs: tuple[tuple[int, int], ...]
    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.pairs) != len(self.bits):
            raise ValueError("pairs and bits length mismatch")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("bits must be 0 or 1")

    @classmethod
    def from_bits(cls, network: MixedNetwork, bits: Iterable[int] | str) -> "DesignVector":
        if isinstance(bits, str):
            if not set(bits) <= {"0", "1"}:
                raise ValueError(f"design string {bits!r} must contain only 0/1")
            values = tuple(int(ch) for ch in bits)
        else:
            values = tuple(int(b) for b in bits)
        pairs = network.candidate_pairs
        if len(values) != len(pairs):
            raise ValueError(
                f"design has {len(values)} bits but network has {len(pairs)} candidate pairs"
            )
        return cls(pairs, values)

    @classmethod
    def from_pairs(
        cls, network: MixedNetwork, built: Iterable[tuple[int, int]]
    ) -> "DesignVector":
        wanted = {(min(i, j), max(i, j)) for i, j in built}
        pairs = network.candidate_pairs
        unknown = wanted - set(pairs)
        if unknown:
            raise ValueError(f"not candidate pairs: {sorted(unknown)}")
        return cls(pairs, tuple(1 if p in wanted else 0 for p in pairs))

    @classmethod
    def empty(cls, network: MixedNetwork) -> "DesignVector":
        pairs = network.candidate_pairs
        return cls(pairs, (0,) * len(pairs))

    @classmethod
    def full(cls, network: MixedNetwork) -> "DesignVector":
        pairs = network.candidate_pairs
        return cls(pairs, (1,) * len(pairs))

    @property
    def bit_string(self) -> str:
        return "".join(str(b) for b in self.bits)

    @property
    def built_pairs(self) -> tuple[tuple[int, int], ...]:
        return tuple(p for p, b in zip(self.pairs, self.bits) if b)

    def is_built(self, i: int, j: int) -> bool:
        pair = (min(i, j), max(i, j))
        try:
            return bool(self.bits[self.pairs.index(pair)])
        except ValueError:
            return False


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, message: str) -> None:
        self.violations.append(message)


def validate_network(network: MixedNetwork) -> ValidationReport:
    """Cross-check structural consistency; returns all violations found."""
    report = ValidationReport()
    ids = set(s.id for s in network.subregions)

    seen_boundaries = set()
    for b in network.boundaries:
        for sid in (b.from_id, b.to_id):
            if sid not in ids:
                report.add(f"boundary {b.from_id}->{b.to_id}: dangling subregion id {sid}")
        if (b.from_id, b.to_id) in seen_boundaries:
            report.add(f"boundary {b.from_id}->{b.to_id}: duplicate")
        seen_boundaries.add((b.from_id, b.to_id))
    for i, j in sorted(seen_boundaries):
        if (j, i) not in seen_boundaries:
            report.add(f"boundary asymmetry: {i}->{j} without {j}->{i}")

    for sid in sorted(ids):
        if not any(b.from_id == sid for b in network.boundaries):
            report.add(f"subregion {sid}: no outgoing boundary (isolated)")

    directed = {}
    for c in network.candidates:
        key = (c.origin, c.destination)
        if key in directed:
            report.add(f"candidate {c.origin}->{c.destination}: duplicate")
        directed[key] = c
        for sid in key:
            if sid not in ids:
                report.add(
                    f"candidate {c.origin}->{c.destination}: dangling subregion id {sid}"
                )
        count = c.mainline_length / c.cell_length
        if abs(count - round(count)) > 1e-9 or round(count) < 1:
            report.add(
                f"candidate {c.origin}->{c.destination}: mainline_length "
                f"{c.mainline_length:g} m is not a cell multiple of {c.cell_length:g} m"
            )
    for (i, j), c in sorted(directed.items()):
        twin = directed.get((j, i))
        if twin is None:
            report.add(f"candidate asymmetry: {i}->{j} without {j}->{i}")
            continue
        if not math.isclose(twin.mainline_length, c.mainline_length, rel_tol=1e-12):
            report.add(f"candidate pair {{{min(i,j)},{max(i,j)}}}: twin lengths differ")
        if not math.isclose(twin.cost, c.cost, rel_tol=1e-12):
            report.add(f"candidate pair {{{min(i,j)},{max(i,j)}}}: twin costs differ")

    return report


def design_cost(network: MixedNetwork, design: DesignVector) -> float:
    """Total construction cost of the built pairs, in $."""
    if design.pairs != network.candidate_pairs:
        raise ValueError("design does not index this network's candidate pairs")
    return float(sum(network.pair_cost(p) for p in design.built_pairs))


def is_budget_feasible(
    network: MixedNetwork, design: DesignVector, budget: float
) -> bool:
    """True when the design's cost does not exceed the budget."""
    return design_cost(network, design) <= budget


def connecting_ramps(
    network: MixedNetwork, design: DesignVector
) -> tuple[tuple[tuple[int, int], tuple[int, int]], ...]:
    """All directional expressway-to-expressway transfers the design admits.

    A ramp ((h, i), (i, j)) connects built expressway h->i to built
    expressway i->j at their shared subregion i.  U-turns (j == h) are
    excluded, so h, i, j are pairwise distinct.
    """
    built_directed = []
    for i, j in design.built_pairs:
        built_directed.append((i, j))
        built_directed.append((j, i))
    built = set(built_directed)
    ramps = []
    for h, i in built:
        for i2, j in built:
            if i2 == i and j != h and j != i and h != i:
                ramps.append(((h, i), (i, j)))
    return tuple(sorted(ramps))
