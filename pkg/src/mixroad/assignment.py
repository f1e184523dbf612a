"""Instantaneous route travel times and logit route choice.

Travel time of a route is the sum over its location chain: each
subregion contributes avg_trip_length / speed (plus the off-ramp cell
when entered from an expressway), each expressway contributes its entry
ramp cell plus every mainline cell at current cell speeds.  Speeds are
floored so times stay finite in gridlock.

Newly generated demand is split across the od pair's routes with a
multinomial logit on current travel times; vehicles already in the
network never re-route.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .network import MixedNetwork
from .routes import Location, Route, route_locations

__all__ = [
    "LogitParams",
    "location_length",
    "route_travel_time",
    "logit_probabilities",
    "split_demand",
]


@dataclass(frozen=True)
class LogitParams:
    """Route choice sensitivity; larger mu concentrates flow on fast routes."""

    mu: float  # 1/s

    def __post_init__(self) -> None:
        if self.mu < 0:
            raise ValueError("logit mu must be >= 0")


def location_length(location: Location, network: MixedNetwork) -> float:
    """Traversal length in m of one chain location."""
    kind = location[0]
    if kind == "sub":
        return network.subregion(location[1]).avg_trip_length
    if kind == "on" or kind == "off":
        return network.candidate(location[1], location[2]).cell_length
    if kind == "conn":
        return network.candidate(location[2], location[3]).cell_length
    if kind == "main":
        return network.candidate(location[1], location[2]).cell_length
    raise ValueError(f"unknown location {location!r}")


def route_travel_time(
    route: Route,
    network: MixedNetwork,
    speed_of: Callable[[Location], float],
    speed_floor: float = 0.0,
) -> float:
    """Sum of length/speed over the route's location chain, in s."""
    total = 0.0
    for loc in route_locations(route, network):
        v = max(float(speed_of(loc)), speed_floor)
        if v <= 0.0:
            raise ValueError(f"non-positive speed at {loc!r} with zero speed floor")
        total += location_length(loc, network) / v
    return total


def logit_probabilities(travel_times, mu: float) -> np.ndarray:
    """Choice probabilities exp(-mu*t_r) / sum_x exp(-mu*t_x).

    Computed with the max-shift so arbitrarily large times cannot
    underflow all terms at once; invariant under adding a constant to
    every travel time.
    """
    t = np.asarray(travel_times, dtype=float)
    if t.size == 0:
        raise ValueError("need at least one route")
    if mu < 0:
        raise ValueError("mu must be >= 0")
    z = -mu * t
    z = z - np.max(z)
    e = np.exp(z)
    return e / np.sum(e)


def split_demand(total_rate: float, probabilities) -> np.ndarray:
    """Per-route demand rates total_rate * theta_r (veh/s in, veh/s out)."""
    p = np.asarray(probabilities, dtype=float)
    if total_rate < 0:
        raise ValueError("demand rate must be >= 0")
    return total_rate * p
