"""Shared capped proportional flow allocation.

Every transfer in the model is the minimum of (i) what the sending side
wants to send, (ii) the capacity of the facility crossed, and (iii) a
share of the receiving side's supply proportional to demand.  The
competing total includes the flow itself; when it is zero the share
degenerates to the flow (0/0 convention), which keeps the rule total
when nothing competes.

All arguments broadcast, so the same rule serves scalar unit tests and
the vectorized engine.
"""

from __future__ import annotations

import numpy as np

__all__ = ["allocate"]


def allocate(flow, capacity, competing_total, supply):
    """min(flow, capacity, flow / competing_total * supply)."""
    flow = np.asarray(flow, dtype=float)
    total = np.asarray(competing_total, dtype=float)
    safe_total = np.where(total > 0.0, total, 1.0)
    # Ratio clamped at 1: an oversupplied pool cannot push a flow above
    # its own demand, and the clamp keeps tiny totals from overflowing
    # into inf (and 0 * inf into nan).
    with np.errstate(over="ignore"):
        ratio = np.minimum(np.asarray(supply, dtype=float) / safe_total, 1.0)
    share = np.where(total > 0.0, flow * ratio, flow)
    return np.minimum(np.minimum(flow, capacity), share)
