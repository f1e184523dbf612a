"""Aggregate subregion dynamics.

A subregion holds per-class accumulations (one class per route passing
through it).  Production P(n) depends on the total accumulation only;
each class completes or transfers trips at its share of P(n) divided by
the subregion's average trip length.  Transfers out are gated by the
crossed facility's capacity and by a demand-proportional share of the
receiver's supply; trip completions at a class's destination leave the
network ungated.
"""

from __future__ import annotations

import numpy as np

from .flows import allocate
from .network import SubregionParams

__all__ = [
    "production",
    "speed",
    "trip_completion_rate",
    "receiving_capacity",
    "transfer_to_subregion",
    "transfer_to_onramp",
    "update_accumulation",
]


def production(params: SubregionParams, n):
    """P(n) = a3 n^3 + a2 n^2 + a1 n in veh*m/s, clamped below at 0."""
    n = np.asarray(n, dtype=float)
    if np.any(n < 0.0) or np.any(n > params.n_max):
        raise ValueError(
            f"subregion {params.id}: accumulation outside [0, {params.n_max:g}]"
        )
    a3, a2, a1 = params.mfd_coeffs
    return np.maximum(((a3 * n + a2) * n + a1) * n, 0.0)


def speed(params: SubregionParams, n):
    """Space-mean speed P(n)/n in m/s; tends to a1 as n goes to 0."""
    n = np.asarray(n, dtype=float)
    p = production(params, n)
    return np.where(n > 0.0, p / np.where(n > 0.0, n, 1.0), params.mfd_coeffs[2])


def trip_completion_rate(class_accumulation, total_accumulation, production_value, trip_length):
    """Class outflow demand (n_class / n) * P(n) / trip_length, veh/s.

    Defined as 0 for an empty subregion.
    """
    n_cls = np.asarray(class_accumulation, dtype=float)
    n_tot = np.asarray(total_accumulation, dtype=float)
    safe = np.where(n_tot > 0.0, n_tot, 1.0)
    return np.where(n_tot > 0.0, (n_cls / safe) * production_value / trip_length, 0.0)


def receiving_capacity(params: SubregionParams, n):
    """Boundary supply c_max * (1 - n / n_max), clamped below at 0."""
    n = np.asarray(n, dtype=float)
    return np.maximum(params.c_max * (1.0 - n / params.n_max), 0.0)


def transfer_to_subregion(flow, boundary_capacity, competing_total, receiving):
    """Actual flow across a boundary into a neighbouring subregion.

    competing_total must sum every flow demand bound for the receiving
    subregion (boundary transfers and off-ramp discharges alike), so
    the shares partition its receiving capacity.
    """
    return allocate(flow, boundary_capacity, competing_total, receiving)


def transfer_to_onramp(flow, ramp_capacity, competing_total, onramp_supply):
    """Actual flow from a subregion onto an expressway on-ramp."""
    return allocate(flow, ramp_capacity, competing_total, onramp_supply)


def update_accumulation(n, inflow, outflow, step):
    """Advance accumulations one step; outflow is clamped at n/step.

    Raises on a materially negative result, which would indicate an
    accounting bug upstream rather than a modelling condition.
    """
    n = np.asarray(n, dtype=float)
    out = np.minimum(np.asarray(outflow, dtype=float), n / step)
    new = n + step * (np.asarray(inflow, dtype=float) - out)
    if np.any(new < -1e-9):
        worst = float(np.min(new))
        raise ValueError(f"accumulation went negative ({worst:.3g} veh)")
    return np.maximum(new, 0.0)
