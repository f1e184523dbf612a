"""Scenario files: a line-oriented text format with explicit units.

A scenario bundles the network, demand profile, discretization, route
choice, optimizer defaults and cost parameters.  Files are divided into
named sections; '#' starts a comment.  Physical quantities always carry
a unit suffix and are converted to SI on load, so "80 km/h", "3400
veh/h" and "5 M$/km" mean what they say regardless of internal
representation.

    [subregions]   id a3 a2 a1 trip_length n_max c_max
    [adjacency]    from to capacity          (directional)
    [candidates]   i j mainline_length       (one line per unordered pair)
    [fd]           kind free_flow_speed capacity jam_density
    [demand]       start end origin dest rate   ('*' expands over ids)
    [sim]          step, horizon, cell_length, speed_floor,
                   max_route_nodes, logit_mu
    [optimizer]    swarm, iterations, inertia_start/end, cognitive,
                   social, velocity_clamp, infeasible
    [costs]        unit_cost, budgets

Saving a loaded scenario writes normalized SI units; loading that file
again yields an equal Scenario.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .assignment import LogitParams
from .engine import SimConfig
from .network import (
    BoundaryLink,
    CandidateExpressway,
    FundamentalDiagram,
    MixedNetwork,
    SubregionParams,
    validate_network,
)

__all__ = [
    "Scenario",
    "ScenarioError",
    "DemandProfile",
    "DemandEntry",
    "PsoSettings",
    "CostParams",
    "load_scenario",
    "save_scenario",
    "apply_overrides",
    "bundled_scenario_path",
]


class ScenarioError(ValueError):
    """Malformed or inconsistent scenario input."""


_UNITS: dict[str, dict[str, float]] = {
    "time": {"s": 1.0, "min": 60.0, "h": 3600.0},
    "length": {"m": 1.0, "km": 1000.0},
    "speed": {"m/s": 1.0, "km/h": 1.0 / 3.6},
    "flow": {"veh/s": 1.0, "veh/min": 1.0 / 60.0, "veh/h": 1.0 / 3600.0},
    "density": {"veh/m": 1.0, "veh/km": 1.0 / 1000.0},
    "count": {"veh": 1.0},
    "money": {"$": 1.0, "k$": 1e3, "M$": 1e6},
    "cost_per_length": {"$/m": 1.0, "$/km": 1e-3, "k$/km": 1.0, "M$/km": 1e3},
    "per_time": {"/s": 1.0, "/min": 1.0 / 60.0, "/h": 1.0 / 3600.0},
}


@dataclass(frozen=True)
class DemandEntry:
    origin: int
    destination: int
    start_s: float
    end_s: float
    rate: float  # veh/s

    def __post_init__(self) -> None:
        if self.end_s <= self.start_s:
            raise ValueError(
                f"demand {self.origin}->{self.destination}: empty interval "
                f"[{self.start_s:g}, {self.end_s:g})"
            )
        if self.rate < 0:
            raise ValueError(f"demand {self.origin}->{self.destination}: negative rate")


@dataclass(frozen=True)
class DemandProfile:
    """Piecewise-constant od demand rates, sampled at step starts."""

    entries: tuple[DemandEntry, ...]

    def validate(self, subregion_ids: tuple[int, ...], horizon_s: float) -> None:
        ids = set(subregion_ids)
        per_od: dict[tuple[int, int], list[DemandEntry]] = {}
        for e in self.entries:
            if e.origin not in ids or e.destination not in ids:
                raise ScenarioError(
                    f"demand {e.origin}->{e.destination}: unknown subregion id"
                )
            per_od.setdefault((e.origin, e.destination), []).append(e)
        for o in subregion_ids:
            for d in subregion_ids:
                segs = sorted(per_od.get((o, d), []), key=lambda e: e.start_s)
                if not segs:
                    raise ScenarioError(f"demand for od ({o}, {d}) is not defined")
                if segs[0].start_s > 1e-9:
                    raise ScenarioError(
                        f"demand for od ({o}, {d}) has a gap before {segs[0].start_s:g} s"
                    )
                for a, b in zip(segs, segs[1:]):
                    if b.start_s < a.end_s - 1e-9:
                        raise ScenarioError(
                            f"demand for od ({o}, {d}) overlaps at {b.start_s:g} s"
                        )
                    if b.start_s > a.end_s + 1e-9:
                        raise ScenarioError(
                            f"demand for od ({o}, {d}) has a gap at {a.end_s:g} s"
                        )
                if segs[-1].end_s < horizon_s - 1e-9:
                    raise ScenarioError(
                        f"demand for od ({o}, {d}) ends at {segs[-1].end_s:g} s, "
                        f"before the horizon {horizon_s:g} s"
                    )

    def rate_table(
        self, n_steps: int, step_s: float, od_pairs: list[tuple[int, int]]
    ) -> np.ndarray:
        """Rates (veh/s) per step and od, sampled at each step's start."""
        ids = tuple(sorted({o for o, _ in od_pairs}))
        self.validate(ids, n_steps * step_s)
        table = np.zeros((n_steps, len(od_pairs)))
        times = np.arange(n_steps) * step_s
        per_od: dict[tuple[int, int], list[DemandEntry]] = {}
        for e in self.entries:
            per_od.setdefault((e.origin, e.destination), []).append(e)
        for k, od in enumerate(od_pairs):
            segs = sorted(per_od[od], key=lambda e: e.start_s)
            starts = np.array([s.start_s for s in segs])
            rates = np.array([s.rate for s in segs])
            idx = np.clip(np.searchsorted(starts, times, side="right") - 1, 0, len(segs) - 1)
            table[:, k] = rates[idx]
        return table


@dataclass(frozen=True)
class PsoSettings:
    """Swarm defaults carried by the scenario; the seed is supplied per run."""

    swarm_size: int = 30
    iterations: int = 100
    inertia_start: float = 0.9
    inertia_end: float = 0.4
    cognitive: float = 2.0
    social: float = 2.0
    velocity_clamp: float = 6.0
    infeasible: str = "repair"

    def __post_init__(self) -> None:
        if self.swarm_size < 2:
            raise ValueError("swarm_size must be >= 2")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.velocity_clamp <= 0:
            raise ValueError("velocity_clamp must be > 0")
        if self.infeasible not in ("repair", "penalty"):
            raise ValueError("infeasible must be 'repair' or 'penalty'")


@dataclass(frozen=True)
class CostParams:
    unit_cost_per_m: float = 5000.0  # $/m of directional pair mainline
    budgets: tuple[float, ...] = ()  # $

    def __post_init__(self) -> None:
        if self.unit_cost_per_m < 0:
            raise ValueError("unit_cost_per_m must be >= 0")
        if any(b < 0 for b in self.budgets):
            raise ValueError("budgets must be >= 0")


@dataclass(frozen=True)
class Scenario:
    network: MixedNetwork
    demand: DemandProfile
    sim: SimConfig
    logit: LogitParams
    pso: PsoSettings = PsoSettings()
    costs: CostParams = CostParams()
    name: str = field(default="inline", compare=False)

    @property
    def logit_mu(self) -> float:
        return self.logit.mu


def bundled_scenario_path(name: str) -> Path:
    """Path of a scenario shipped with the package (e.g. 'yokohama5')."""
    p = Path(__file__).parent / "data" / f"{name}.scn"
    if not p.exists():
        raise FileNotFoundError(f"no bundled scenario {name!r}")
    return p


# -- parsing ------------------------------------------------------------


class _Line:
    def __init__(self, path: str, number: int, tokens: list[str]):
        self.path = path
        self.number = number
        self.tokens = tokens

    def error(self, message: str) -> ScenarioError:
        return ScenarioError(f"{self.path}:{self.number}: {message}")


def _tokenize(path: Path) -> list[tuple[str | None, list[_Line]]]:
    """Split the file into (section name, lines) groups."""
    sections: list[tuple[str | None, list[_Line]]] = []
    current: list[_Line] = []
    name: str | None = None
    for number, raw in enumerate(path.read_text().splitlines(), start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        if text.startswith("[") and text.endswith("]"):
            if name is not None or current:
                sections.append((name, current))
            name = text[1:-1].strip()
            current = []
            continue
        tokens = text.replace(",", " , ").split()
        current.append(_Line(str(path), number, tokens))
    sections.append((name, current))
    return sections


def _quantity(line: _Line, tokens: list[str], kind: str) -> float:
    if len(tokens) != 2:
        raise line.error(f"expected '<number> <unit>' for a {kind} value, got {tokens!r}")
    num, unit = tokens
    try:
        value = float(num)
    except ValueError:
        raise line.error(f"bad number {num!r}") from None
    table = _UNITS[kind]
    if unit not in table:
        raise line.error(
            f"unknown unit {unit!r} for {kind} (expected one of {sorted(table)})"
        )
    return value * table[unit]


def _int(line: _Line, token: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise line.error(f"bad integer {token!r}") from None


def _float(line: _Line, token: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise line.error(f"bad number {token!r}") from None


def _keyvals(lines: list[_Line], section: str) -> dict[str, tuple[_Line, list[str]]]:
    out: dict[str, tuple[_Line, list[str]]] = {}
    for line in lines:
        if "=" not in line.tokens:
            raise line.error(f"[{section}] expects 'key = value' lines")
        eq = line.tokens.index("=")
        key = " ".join(line.tokens[:eq])
        if key in out:
            raise line.error(f"duplicate key {key!r}")
        out[key] = (line, line.tokens[eq + 1 :])
    return out


def load_scenario(path: str | Path) -> "Scenario":
    """Parse and fully validate a scenario file."""
    path = Path(path)
    if not path.exists():
        raise ScenarioError(f"scenario file {path} does not exist")
    sections = _tokenize(path)

    subregions: list[SubregionParams] = []
    boundaries: list[BoundaryLink] = []
    candidate_rows: list[tuple[_Line, int, int, float]] = []
    fds: dict[str, FundamentalDiagram] = {}
    demand_rows: list[tuple[_Line, str, str, float, float, float]] = []
    sim_kv: dict[str, tuple[_Line, list[str]]] = {}
    opt_kv: dict[str, tuple[_Line, list[str]]] = {}
    cost_kv: dict[str, tuple[_Line, list[str]]] = {}

    known = {"subregions", "adjacency", "candidates", "fd", "demand", "sim", "optimizer", "costs"}
    for name, lines in sections:
        if name is None:
            if lines:
                raise lines[0].error("content before the first [section]")
            continue
        if name not in known:
            raise (lines[0] if lines else _Line(str(path), 0, [])).error(
                f"unknown section [{name}]"
            )
        if name == "subregions":
            for ln in lines:
                if len(ln.tokens) != 10:
                    raise ln.error(
                        "expected: id a3 a2 a1 trip_length n_max c_max (with units)"
                    )
                try:
                    subregions.append(
                        SubregionParams(
                            id=_int(ln, ln.tokens[0]),
                            mfd_coeffs=(
                                _float(ln, ln.tokens[1]),
                                _float(ln, ln.tokens[2]),
                                _float(ln, ln.tokens[3]),
                            ),
                            avg_trip_length=_quantity(ln, ln.tokens[4:6], "length"),
                            n_max=_quantity(ln, ln.tokens[6:8], "count"),
                            c_max=_quantity(ln, ln.tokens[8:10], "flow"),
                        )
                    )
                except ValueError as exc:
                    raise ln.error(str(exc)) from None
        elif name == "adjacency":
            for ln in lines:
                if len(ln.tokens) != 4:
                    raise ln.error("expected: from to capacity (with unit)")
                try:
                    boundaries.append(
                        BoundaryLink(
                            from_id=_int(ln, ln.tokens[0]),
                            to_id=_int(ln, ln.tokens[1]),
                            capacity=_quantity(ln, ln.tokens[2:4], "flow"),
                        )
                    )
                except ValueError as exc:
                    raise ln.error(str(exc)) from None
        elif name == "candidates":
            for ln in lines:
                if len(ln.tokens) != 4:
                    raise ln.error("expected: i j mainline_length (with unit)")
                candidate_rows.append(
                    (
                        ln,
                        _int(ln, ln.tokens[0]),
                        _int(ln, ln.tokens[1]),
                        _quantity(ln, ln.tokens[2:4], "length"),
                    )
                )
        elif name == "fd":
            for ln in lines:
                if len(ln.tokens) != 7:
                    raise ln.error(
                        "expected: kind free_flow_speed capacity jam_density (with units)"
                    )
                kind = ln.tokens[0]
                if kind not in ("mainline", "ramp"):
                    raise ln.error(f"fd kind must be 'mainline' or 'ramp', got {kind!r}")
                if kind in fds:
                    raise ln.error(f"duplicate fd {kind!r}")
                try:
                    fds[kind] = FundamentalDiagram(
                        free_flow_speed=_quantity(ln, ln.tokens[1:3], "speed"),
                        capacity=_quantity(ln, ln.tokens[3:5], "flow"),
                        jam_density=_quantity(ln, ln.tokens[5:7], "density"),
                    )
                except ValueError as exc:
                    raise ln.error(str(exc)) from None
        elif name == "demand":
            for ln in lines:
                if len(ln.tokens) != 8:
                    raise ln.error("expected: start end origin dest rate (with units)")
                demand_rows.append(
                    (
                        ln,
                        ln.tokens[4],
                        ln.tokens[5],
                        _quantity(ln, ln.tokens[0:2], "time"),
                        _quantity(ln, ln.tokens[2:4], "time"),
                        _quantity(ln, ln.tokens[6:8], "flow"),
                    )
                )
        elif name == "sim":
            sim_kv = _keyvals(lines, "sim")
        elif name == "optimizer":
            opt_kv = _keyvals(lines, "optimizer")
        elif name == "costs":
            cost_kv = _keyvals(lines, "costs")

    if not subregions:
        raise ScenarioError(f"{path}: no [subregions] section")
    if "mainline" not in fds or "ramp" not in fds:
        raise ScenarioError(f"{path}: [fd] must define both 'mainline' and 'ramp'")

    # [sim]
    def sim_get(key: str, kind: str, default: float) -> float:
        if key not in sim_kv:
            return default
        ln, toks = sim_kv.pop(key)
        return _quantity(ln, toks, kind)

    step_s = sim_get("step", "time", 10.0)
    horizon_s = sim_get("horizon", "time", 3600.0)
    cell_length = sim_get("cell_length", "length", 500.0)
    speed_floor = sim_get("speed_floor", "speed", 0.1)
    mu = sim_get("logit_mu", "per_time", 0.005)
    if "max_route_nodes" in sim_kv:
        ln, toks = sim_kv.pop("max_route_nodes")
        if len(toks) != 1:
            raise ln.error("max_route_nodes is a bare integer")
        max_nodes = _int(ln, toks[0])
    else:
        max_nodes = 5
    if sim_kv:
        key = next(iter(sim_kv))
        raise sim_kv[key][0].error(f"unknown [sim] key {key!r}")

    n_steps_f = horizon_s / step_s
    if abs(n_steps_f - round(n_steps_f)) > 1e-9 or round(n_steps_f) < 1:
        raise ScenarioError(
            f"{path}: horizon {horizon_s:g} s is not a whole number of {step_s:g} s steps"
        )
    try:
        sim = SimConfig(
            step_s=step_s,
            n_steps=int(round(n_steps_f)),
            cell_length_m=cell_length,
            speed_floor=speed_floor,
            max_route_nodes=max_nodes,
        )
        logit = LogitParams(mu=mu)
    except ValueError as exc:
        raise ScenarioError(f"{path}: {exc}") from None

    # [costs]
    unit_cost = 5000.0
    budgets: tuple[float, ...] = ()
    if "unit_cost" in cost_kv:
        ln, toks = cost_kv.pop("unit_cost")
        unit_cost = _quantity(ln, toks, "cost_per_length")
    if "budgets" in cost_kv:
        ln, toks = cost_kv.pop("budgets")
        groups: list[list[str]] = [[]]
        for tok in toks:
            if tok == ",":
                groups.append([])
            else:
                groups[-1].append(tok)
        budgets = tuple(_quantity(ln, g, "money") for g in groups if g)
    if cost_kv:
        key = next(iter(cost_kv))
        raise cost_kv[key][0].error(f"unknown [costs] key {key!r}")
    try:
        costs = CostParams(unit_cost_per_m=unit_cost, budgets=budgets)
    except ValueError as exc:
        raise ScenarioError(f"{path}: {exc}") from None

    # [optimizer]
    pso_kwargs: dict = {}
    opt_int = {"swarm": "swarm_size", "iterations": "iterations"}
    opt_float = {
        "inertia_start": "inertia_start",
        "inertia_end": "inertia_end",
        "cognitive": "cognitive",
        "social": "social",
        "velocity_clamp": "velocity_clamp",
    }
    for key, (ln, toks) in opt_kv.items():
        if len(toks) != 1:
            raise ln.error(f"[optimizer] {key} expects one bare value")
        if key in opt_int:
            pso_kwargs[opt_int[key]] = _int(ln, toks[0])
        elif key in opt_float:
            pso_kwargs[opt_float[key]] = _float(ln, toks[0])
        elif key == "infeasible":
            pso_kwargs["infeasible"] = toks[0]
        else:
            raise ln.error(f"unknown [optimizer] key {key!r}")
    try:
        pso = PsoSettings(**pso_kwargs)
    except ValueError as exc:
        raise ScenarioError(f"{path}: {exc}") from None

    # candidates (needs unit_cost)
    candidates: list[CandidateExpressway] = []
    seen_pairs = set()
    for ln, i, j, length in candidate_rows:
        pair = (min(i, j), max(i, j))
        if pair in seen_pairs:
            raise ln.error(f"duplicate candidate pair {{{pair[0]},{pair[1]}}}")
        seen_pairs.add(pair)
        try:
            for o, d in ((i, j), (j, i)):
                candidates.append(
                    CandidateExpressway(
                        origin=o,
                        destination=d,
                        mainline_length=length,
                        cell_length=cell_length,
                        cost=unit_cost * length,
                    )
                )
        except ValueError as exc:
            raise ln.error(str(exc)) from None

    try:
        network = MixedNetwork(
            subregions=tuple(subregions),
            boundaries=tuple(boundaries),
            candidates=tuple(candidates),
            mainline_fd=fds["mainline"],
            ramp_fd=fds["ramp"],
        )
    except ValueError as exc:
        raise ScenarioError(f"{path}: {exc}") from None
    report = validate_network(network)
    if not report.ok:
        raise ScenarioError(f"{path}: invalid network: " + "; ".join(report.violations))

    # demand (wildcards expand over sorted ids)
    ids = network.subregion_ids
    entries: list[DemandEntry] = []
    for ln, o_tok, d_tok, start, end, rate in demand_rows:
        origins = ids if o_tok == "*" else (_int(ln, o_tok),)
        dests = ids if d_tok == "*" else (_int(ln, d_tok),)
        for o in origins:
            for d in dests:
                try:
                    entries.append(
                        DemandEntry(
                            origin=o, destination=d, start_s=start, end_s=end, rate=rate
                        )
                    )
                except ValueError as exc:
                    raise ln.error(str(exc)) from None
    profile = DemandProfile(
        entries=tuple(sorted(entries, key=lambda e: (e.origin, e.destination, e.start_s)))
    )
    try:
        profile.validate(ids, sim.horizon_s)
    except ScenarioError as exc:
        raise ScenarioError(f"{path}: {exc}") from None

    return Scenario(
        network=network,
        demand=profile,
        sim=sim,
        logit=logit,
        pso=pso,
        costs=costs,
        name=path.stem,
    )


# -- saving -------------------------------------------------------------


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    """Write a normalized (SI units) scenario file."""
    net = scenario.network
    out: list[str] = ["# normalized scenario (SI units)", ""]
    out.append("[subregions]")
    for s in sorted(net.subregions, key=lambda s: s.id):
        a3, a2, a1 = s.mfd_coeffs
        out.append(
            f"{s.id} {a3!r} {a2!r} {a1!r} {s.avg_trip_length!r} m "
            f"{s.n_max!r} veh {s.c_max!r} veh/s"
        )
    out.append("")
    out.append("[adjacency]")
    for b in sorted(net.boundaries, key=lambda b: (b.from_id, b.to_id)):
        out.append(f"{b.from_id} {b.to_id} {b.capacity!r} veh/s")
    out.append("")
    if net.candidates:
        out.append("[candidates]")
        for i, j in net.candidate_pairs:
            c = net.candidate(i, j)
            out.append(f"{i} {j} {c.mainline_length!r} m")
        out.append("")
    out.append("[fd]")
    for kind, fd in (("mainline", net.mainline_fd), ("ramp", net.ramp_fd)):
        out.append(
            f"{kind} {fd.free_flow_speed!r} m/s {fd.capacity!r} veh/s "
            f"{fd.jam_density!r} veh/m"
        )
    out.append("")
    out.append("[demand]")
    for e in scenario.demand.entries:
        out.append(
            f"{e.start_s!r} s {e.end_s!r} s {e.origin} {e.destination} {e.rate!r} veh/s"
        )
    out.append("")
    out.append("[sim]")
    out.append(f"step = {scenario.sim.step_s!r} s")
    out.append(f"horizon = {scenario.sim.horizon_s!r} s")
    out.append(f"cell_length = {scenario.sim.cell_length_m!r} m")
    out.append(f"speed_floor = {scenario.sim.speed_floor!r} m/s")
    out.append(f"max_route_nodes = {scenario.sim.max_route_nodes}")
    out.append(f"logit_mu = {scenario.logit.mu!r} /s")
    out.append("")
    out.append("[optimizer]")
    p = scenario.pso
    out.append(f"swarm = {p.swarm_size}")
    out.append(f"iterations = {p.iterations}")
    out.append(f"inertia_start = {p.inertia_start!r}")
    out.append(f"inertia_end = {p.inertia_end!r}")
    out.append(f"cognitive = {p.cognitive!r}")
    out.append(f"social = {p.social!r}")
    out.append(f"velocity_clamp = {p.velocity_clamp!r}")
    out.append(f"infeasible = {p.infeasible}")
    out.append("")
    out.append("[costs]")
    out.append(f"unit_cost = {scenario.costs.unit_cost_per_m!r} $/m")
    if scenario.costs.budgets:
        joined = ", ".join(f"{b!r} $" for b in scenario.costs.budgets)
        out.append(f"budgets = {joined}")
    Path(path).write_text("\n".join(out) + "\n")


# -- overrides ----------------------------------------------------------

_OVERRIDE_KEYS = (
    "mu", "Ts", "c_ij", "c_max", "K_jm", "K_jr", "speed_floor", "max_route_nodes",
)


def apply_overrides(scenario: Scenario, overrides: dict[str, float]) -> Scenario:
    """Return a scenario with calibration parameters replaced.

    Supported keys (SI values): mu (1/s), Ts (s), c_ij (veh/s, all
    boundaries), c_max (veh/s, all subregions), K_jm / K_jr (veh/m, jam
    densities), speed_floor (m/s), max_route_nodes.
    """
    unknown = set(overrides) - set(_OVERRIDE_KEYS)
    if unknown:
        raise ScenarioError(
            f"unknown override keys {sorted(unknown)}; supported: {list(_OVERRIDE_KEYS)}"
        )
    net = scenario.network
    sim = scenario.sim
    logit = scenario.logit
    try:
        if "mu" in overrides:
            logit = LogitParams(mu=float(overrides["mu"]))
        if "c_ij" in overrides:
            cap = float(overrides["c_ij"])
            net = dataclasses.replace(
                net,
                boundaries=tuple(
                    dataclasses.replace(b, capacity=cap) for b in net.boundaries
                ),
            )
        if "c_max" in overrides:
            cm = float(overrides["c_max"])
            net = dataclasses.replace(
                net,
                subregions=tuple(
                    dataclasses.replace(s, c_max=cm) for s in net.subregions
                ),
            )
        if "K_jm" in overrides:
            net = dataclasses.replace(
                net,
                mainline_fd=dataclasses.replace(
                    net.mainline_fd, jam_density=float(overrides["K_jm"])
                ),
            )
        if "K_jr" in overrides:
            net = dataclasses.replace(
                net,
                ramp_fd=dataclasses.replace(
                    net.ramp_fd, jam_density=float(overrides["K_jr"])
                ),
            )
        sim_changes: dict = {}
        if "Ts" in overrides:
            ts = float(overrides["Ts"])
            n_steps_f = sim.horizon_s / ts
            if abs(n_steps_f - round(n_steps_f)) > 1e-9 or round(n_steps_f) < 1:
                raise ScenarioError(
                    f"horizon {sim.horizon_s:g} s is not a whole number of {ts:g} s steps"
                )
            sim_changes["step_s"] = ts
            sim_changes["n_steps"] = int(round(n_steps_f))
        if "speed_floor" in overrides:
            sim_changes["speed_floor"] = float(overrides["speed_floor"])
        if "max_route_nodes" in overrides:
            sim_changes["max_route_nodes"] = int(overrides["max_route_nodes"])
        if sim_changes:
            sim = dataclasses.replace(sim, **sim_changes)
    except ValueError as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(str(exc)) from None
    return dataclasses.replace(scenario, network=net, sim=sim, logit=logit)
