"""Result export: trajectory CSV, JSON summaries, design matrices, plots.

Exported JSON is deterministic: keys are sorted, floats keep full repr
precision, and nothing time- or host-dependent is written, so identical
runs produce byte-identical files.  Every numeric key carries its unit
as a suffix (veh, veh_h, dollars, s), and re-parsing a summary yields
the original values bit-exactly.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .engine import SimResult
from .network import DesignVector, MixedNetwork
from .optimizer import PsoResult, SweepResult

__all__ = [
    "write_trajectory_csv",
    "summary_dict",
    "write_summary_json",
    "render_design_matrix",
    "sweep_dict",
    "write_sweep_json",
    "write_sweep_csv",
    "format_sweep_table",
    "write_trace_csv",
    "plot_accumulations_svg",
    "export_results",
]


def write_trajectory_csv(result: SimResult, path: str | Path) -> None:
    """One row per step: time plus per-subregion and per-expressway vehicles.

    An empty trajectory (zero recorded steps) writes the header only.
    """
    header = ["time_s"]
    header += [f"subregion_{sid}_veh" for sid in result.subregion_ids]
    header += [f"expressway_{i}_{j}_veh" for i, j in result.dir_expressways]
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        for t in range(result.accumulations.shape[0]):
            row = [repr(t * result.step_s)]
            row += [repr(float(v)) for v in result.accumulations[t]]
            row += [repr(float(v)) for v in result.expressway_vehicles[t]]
            w.writerow(row)


def summary_dict(result: SimResult, scenario=None) -> dict:
    """JSON-ready summary: metrics, audit totals, parameter echo."""
    out = {
        "design_bits": result.design_bits,
        "step_s": result.step_s,
        "n_steps": result.n_steps,
        "horizon_s": result.step_s * result.n_steps,
        "tts_veh_h": result.tts_veh_h,
        "avg_accumulation_veh": result.avg_accumulation_veh,
        "avg_completion_flow_veh_h": result.avg_completion_flow_veh_h,
        "total_injected_veh": result.total_injected_veh,
        "total_completed_veh": result.total_completed_veh,
        "audit": {k: float(v) for k, v in result.audit.items()},
    }
    if scenario is not None:
        net = scenario.network
        out["scenario"] = scenario.name
        out["cost_dollars"] = sum(
            net.pair_cost(p)
            for p, b in zip(net.candidate_pairs, result.design_bits)
            if b == "1"
        )
        # calibration echo, so a summary pins down what produced it
        out["parameters"] = {
            "logit_mu_per_s": scenario.logit.mu,
            "boundary_capacity_veh_s": {
                f"{b.from_id}-{b.to_id}": b.capacity for b in net.boundaries
            },
            "receiving_c_max_veh_s": {str(s.id): s.c_max for s in net.subregions},
            "mainline_capacity_veh_s": net.mainline_fd.capacity,
            "ramp_capacity_veh_s": net.ramp_fd.capacity,
            "mainline_jam_veh_m": net.mainline_fd.jam_density,
            "ramp_jam_veh_m": net.ramp_fd.jam_density,
            "speed_floor_m_s": scenario.sim.speed_floor,
            "max_route_nodes": scenario.sim.max_route_nodes,
            "unit_cost_dollars_per_m": scenario.costs.unit_cost_per_m,
        }
    return out


def write_summary_json(result: SimResult, path: str | Path, scenario=None) -> None:
    _write_json(summary_dict(result, scenario), path)


def render_design_matrix(network: MixedNetwork, design: DesignVector) -> str:
    """Symmetric build matrix: '1' built, '0' candidate unbuilt, 'x' otherwise.

    The diagonal and non-candidate pairs render as 'x'.
    """
    ids = network.subregion_ids
    candidates = set(network.candidate_pairs)
    head = "    " + " ".join(f"{j:>2}" for j in ids)
    lines = [head]
    for i in ids:
        cells = []
        for j in ids:
            pair = (min(i, j), max(i, j))
            if i == j or pair not in candidates:
                cells.append("x")
            elif design.is_built(i, j):
                cells.append("1")
            else:
                cells.append("0")
        lines.append(f"{i:>3} " + " ".join(f"{c:>2}" for c in cells))
    return "\n".join(lines)


def sweep_dict(sweep: SweepResult) -> dict:
    return {
        "scenario": sweep.scenario_name,
        "method": sweep.method,
        "seed": sweep.seed,
        "budgets_dollars": list(sweep.budgets),
        "n_simulations": sweep.n_simulations,
        "rows": [
            {
                "budget_dollars": r.budget,
                "design_bits": r.best_bits,
                "cost_dollars": r.cost,
                "tts_veh_h": r.tts_veh_h,
                "avg_accumulation_veh": r.avg_accumulation_veh,
                "avg_completion_flow_veh_h": r.avg_completion_veh_h,
                "total_completed_veh": r.total_completed_veh,
            }
            for r in sweep.rows
        ],
    }


def write_sweep_json(sweep: SweepResult, path: str | Path) -> None:
    _write_json(sweep_dict(sweep), path)


_SWEEP_COLUMNS = (
    ("budget_dollars", "Budget ($)"),
    ("design_bits", "Design"),
    ("cost_dollars", "Construction cost ($)"),
    ("avg_accumulation_veh", "Average accumulations (veh)"),
    ("avg_completion_flow_veh_h", "Average travel completion flow (veh/h)"),
    ("tts_veh_h", "TTS (veh h)"),
)


def write_sweep_csv(sweep: SweepResult, path: str | Path) -> None:
    rows = sweep_dict(sweep)["rows"]
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow([label for _, label in _SWEEP_COLUMNS])
        for row in rows:
            w.writerow(
                [
                    row[key] if key == "design_bits" else repr(float(row[key]))
                    for key, _ in _SWEEP_COLUMNS
                ]
            )


def format_sweep_table(sweep: SweepResult) -> str:
    """Fixed-width text table of the per-budget results."""
    rows = sweep_dict(sweep)["rows"]
    cells = [[label for _, label in _SWEEP_COLUMNS]]
    for row in rows:
        cells.append(
            [
                row["design_bits"]
                if key == "design_bits"
                else f"{float(row[key]):,.1f}"
                for key, _ in _SWEEP_COLUMNS
            ]
        )
    widths = [max(len(r[c]) for r in cells) for c in range(len(_SWEEP_COLUMNS))]
    lines = []
    for r_idx, row in enumerate(cells):
        lines.append("  ".join(v.rjust(w) for v, w in zip(row, widths)))
        if r_idx == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


def write_trace_csv(result: PsoResult, path: str | Path) -> None:
    """Convergence trace: best TTS after initialization and each iteration."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["iteration", "best_tts_veh_h"])
        for it, tts in enumerate(result.trace):
            w.writerow([it, repr(float(tts))])


def plot_accumulations_svg(result: SimResult, path: str | Path) -> None:
    """Line chart of subregion accumulations over time (needs matplotlib)."""
    try:
        import matplotlib
    except ImportError as exc:  # pragma: no cover - depends on extras
        raise RuntimeError(
            "SVG export needs matplotlib (install the 'plot' extra)"
        ) from exc
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    t = np.arange(result.n_steps) * result.step_s / 60.0
    fig, ax = plt.subplots(figsize=(8, 4.5))
    for k, sid in enumerate(result.subregion_ids):
        ax.plot(t, result.accumulations[:, k], label=f"subregion {sid}")
    ax.set_xlabel("time (min)")
    ax.set_ylabel("accumulation (veh)")
    ax.set_title(f"design {result.design_bits}")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def export_results(result, format: str, path: str | Path) -> None:
    """Write a SimResult or SweepResult in the requested format.

    SimResult: 'csv' trajectory, 'json' summary, 'svg' accumulation plot.
    SweepResult: 'csv' per-budget table, 'json' full report.
    """
    if isinstance(result, SimResult):
        if format == "csv":
            write_trajectory_csv(result, path)
        elif format == "json":
            write_summary_json(result, path)
        elif format == "svg":
            plot_accumulations_svg(result, path)
        else:
            raise ValueError(f"unknown SimResult export format {format!r}")
    elif isinstance(result, SweepResult):
        if format == "csv":
            write_sweep_csv(result, path)
        elif format == "json":
            write_sweep_json(result, path)
        else:
            raise ValueError(f"unknown SweepResult export format {format!r}")
    else:
        raise TypeError(f"cannot export {type(result).__name__}")


def _write_json(payload: dict, path: str | Path) -> None:
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")
