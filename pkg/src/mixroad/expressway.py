"""Cell-transmission dynamics for expressway mainlines and ramps.

Every mainline, on-ramp, off-ramp and connecting ramp is a chain of
cells with a triangular flow-density relation.  Cells carry per-class
densities; demands and supplies are evaluated on the class and total
densities respectively, and transfers use the shared capped
proportional allocation.

Merge/diverge conventions:
  * the on-ramp and all connecting ramps feeding an expressway compete
    for the first mainline cell's supply in one pool;
  * interior cells form one pool per cell, gated by the next cell;
  * the last mainline cell splits by class target: off-ramp bound
    classes pool against the off-ramp's supply, classes continuing to
    another expressway pool per connecting ramp.
"""

from __future__ import annotations

import numpy as np

from .flows import allocate
from .network import FundamentalDiagram

__all__ = [
    "cell_demand",
    "cell_supply",
    "cell_speed",
    "onramp_outflow",
    "mainline_flow",
    "offramp_entry",
    "offramp_exit",
    "connramp_entry",
    "update_cell_density",
]


def cell_demand(fd: FundamentalDiagram, density):
    """Sending flow min(V_f * K, C) in veh/s."""
    k = np.asarray(density, dtype=float)
    return np.minimum(fd.free_flow_speed * k, fd.capacity)


def cell_supply(fd: FundamentalDiagram, density):
    """Receiving flow min(w * (K_jam - K), C), clamped below at 0."""
    k = np.asarray(density, dtype=float)
    return np.maximum(np.minimum(fd.wave_speed * (fd.jam_density - k), fd.capacity), 0.0)


def cell_speed(fd: FundamentalDiagram, density):
    """Space-mean speed: free-flow below critical density, else flow/density."""
    k = np.asarray(density, dtype=float)
    congested = fd.wave_speed * (fd.jam_density - k) / np.where(k > 0.0, k, 1.0)
    v = np.where(k > fd.critical_density, congested, fd.free_flow_speed)
    return np.maximum(v, 0.0)


def onramp_outflow(ramp_demand, ramp_capacity, competing_total, first_cell_supply):
    """Discharge from an on-ramp into the first mainline cell.

    competing_total sums the demands of the on-ramp and of every
    connecting ramp merging into the same expressway.
    """
    return allocate(ramp_demand, ramp_capacity, competing_total, first_cell_supply)


def mainline_flow(cell_class_demand, mainline_capacity, competing_total, downstream_supply):
    """Class flow from one interior mainline cell to the next."""
    return allocate(cell_class_demand, mainline_capacity, competing_total, downstream_supply)


def offramp_entry(last_cell_demand, ramp_capacity, competing_total, offramp_supply):
    """Flow from the last mainline cell onto the off-ramp.

    competing_total sums only the off-ramp bound class demands in the
    last cell; classes continuing to other expressways diverge through
    their own connecting-ramp pools.
    """
    return allocate(last_cell_demand, ramp_capacity, competing_total, offramp_supply)


def offramp_exit(offramp_demand, ramp_capacity, competing_total, receiving):
    """Discharge from an off-ramp into its subregion.

    competing_total must be the subregion's whole incoming demand pool
    (boundary transfers plus every off-ramp), matching the pool used
    for subregion-to-subregion transfers.
    """
    return allocate(offramp_demand, ramp_capacity, competing_total, receiving)


def connramp_entry(last_cell_demand, ramp_capacity, competing_total, connramp_supply):
    """Flow from the last mainline cell onto a connecting ramp."""
    return allocate(last_cell_demand, ramp_capacity, competing_total, connramp_supply)


def update_cell_density(density, inflow, outflow, step, cell_length, jam_density=None):
    """Advance per-class densities one step; outflow clamped at content/step.

    Flows are veh/s, densities veh/m.  When jam_density is given the
    updated total is checked against it (supply accounting failure if
    exceeded).
    """
    k = np.asarray(density, dtype=float)
    out = np.minimum(np.asarray(outflow, dtype=float), k * cell_length / step)
    new = k + (step / cell_length) * (np.asarray(inflow, dtype=float) - out)
    if np.any(new < -1e-9):
        raise ValueError(f"cell density went negative ({float(np.min(new)):.3g} veh/m)")
    new = np.maximum(new, 0.0)
    if jam_density is not None and float(np.sum(new)) > jam_density + 1e-9:
        raise ValueError(
            f"cell density {float(np.sum(new)):.4g} veh/m exceeds jam density {jam_density:g}"
        )
    return new
