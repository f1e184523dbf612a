"""Coupled subregion/expressway simulation engine.

The engine flattens the whole model into one vehicles vector indexed by
"slots".  A slot is one (route, chain position) pair; its physical
location is either a subregion or a cell (mainline, on-ramp, off-ramp,
connecting ramp).  Each slot has exactly one outgoing edge: the next
chain position, or trip completion at the route's destination.  That
structure makes conservation telescope exactly and lets one bincount
per phase aggregate over classes.

Every flow pool in the model is "the edges sharing a receiving
location", so each edge's competing demand total and supply are simply
looked up by the location it points at:

    subregion        supply c_max * (1 - n / n_max)
    any cell         triangular receiving flow of that cell
    trip completion  unbounded (dummy location)

Capacities bind twice: per class (each commodity flow is capped at the
boundary or cell capacity on its edge) and in aggregate (all classes
crossing one boundary share its c_ij; all classes leaving one cell
share that cell's flow capacity).  Both pools allocate proportionally
to sending demand; with a single class they collapse to the plain
min(demand, capacity, share * supply) rule.

Step order (explicit Euler, simultaneous update from the time-t state):
    1. aggregate location totals, check invariants, record trajectory;
    2. travel times and logit split of the newly generated demand;
    3. per-slot sending demands, per-location supplies;
    4. capped proportional flows, clamped at content/step;
    5. advance all slots at once.

Units are SI throughout; reported total time spent is in veh*h.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from . import expressway as xw
from .network import DesignVector, MixedNetwork, validate_network
from .routes import Route, enumerate_routes, route_locations

if TYPE_CHECKING:
    from .scenario import Scenario

__all__ = [
    "SimConfig",
    "SimResult",
    "CompiledModel",
    "Simulation",
    "CompileError",
    "SimulationError",
    "compile_design",
    "run",
    "total_time_spent",
]

# Sentinel for "no capacity bound"; large but safe in products.
UNBOUNDED = 1e30


class CompileError(ValueError):
    """Scenario/design combination cannot be simulated."""


class SimulationError(RuntimeError):
    """A runtime invariant failed (accounting bug or unstable input)."""


@dataclass(frozen=True)
class SimConfig:
    """Discretization and routing controls."""

    step_s: float = 10.0
    n_steps: int = 360
    cell_length_m: float = 500.0
    speed_floor: float = 0.1   # m/s, floors every division by a speed
    max_route_nodes: int = 5

    def __post_init__(self) -> None:
        if self.step_s <= 0:
            raise ValueError("step_s must be > 0")
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if self.cell_length_m <= 0:
            raise ValueError("cell_length_m must be > 0")
        if self.speed_floor <= 0:
            raise ValueError("speed_floor must be > 0")
        if self.max_route_nodes < 1:
            raise ValueError("max_route_nodes must be >= 1")

    @property
    def horizon_s(self) -> float:
        return self.step_s * self.n_steps


@dataclass
class SimResult:
    """Recorded trajectory and summary metrics of one simulation."""

    step_s: float
    n_steps: int
    design_bits: str
    subregion_ids: tuple[int, ...]
    dir_expressways: tuple[tuple[int, int], ...]
    accumulations: np.ndarray        # (T, n_sub) veh, state at step start
    expressway_vehicles: np.ndarray  # (T, n_dir) veh, ramps included
    completed_per_step: np.ndarray   # (T,) veh
    injected_per_step: np.ndarray    # (T,) veh
    tts_veh_h: float
    avg_accumulation_veh: float
    avg_completion_flow_veh_h: float
    audit: dict

    @property
    def total_completed_veh(self) -> float:
        return float(np.sum(self.completed_per_step))

    @property
    def total_injected_veh(self) -> float:
        return float(np.sum(self.injected_per_step))


def total_time_spent(subregion_veh, expressway_veh, step_s: float) -> float:
    """Total time spent in veh*h over a recorded trajectory.

    Both arguments are per-step vehicle counts (1-D totals or 2-D
    per-entity series); expressway counts already include ramp cells.
    """
    sub = np.sum(np.asarray(subregion_veh, dtype=float))
    exp_ = np.sum(np.asarray(expressway_veh, dtype=float))
    return step_s * (sub + exp_) / 3600.0


@dataclass
class CompiledModel:
    """Static arrays for simulating one (scenario, design) pair."""

    network: MixedNetwork
    design: DesignVector
    config: SimConfig
    mu: float
    routes: tuple[Route, ...]

    subregion_ids: tuple[int, ...]
    dir_expressways: tuple[tuple[int, int], ...]
    n_locs: int
    n_sub: int
    main_loc_slice: slice
    ramp_loc_slice: slice
    cell_col: np.ndarray        # (n_cells,) reporting column per cell location

    # Subregion parameter vectors, indexed like locations [0, n_sub).
    sub_a3: np.ndarray
    sub_a2: np.ndarray
    sub_a1: np.ndarray
    sub_trip_len: np.ndarray
    sub_n_max: np.ndarray
    sub_c_max: np.ndarray

    # Slot arrays.
    slot_loc: np.ndarray
    slot_route: np.ndarray
    time_len: np.ndarray        # traversal length per slot (m)
    edge_cap: np.ndarray        # capacity of each slot's outgoing edge (veh/s)
    edge_target_loc: np.ndarray # receiving location of each edge (dummy if terminal)
    sub_slot_idx: np.ndarray
    sub_slot_subidx: np.ndarray
    main_slot_idx: np.ndarray
    ramp_slot_idx: np.ndarray
    nonterm_idx: np.ndarray
    succ_idx: np.ndarray
    term_idx: np.ndarray
    head_idx: np.ndarray        # (R,) first slot of each route
    route_starts: np.ndarray    # (R + 1,) slot ranges per route
    slot_perm: np.ndarray       # stable argsort of slot_loc
    edge_perm: np.ndarray       # stable argsort of edge_target_loc

    # Aggregate passage caps shared by all classes using the same channel:
    # one channel per directed boundary (cap c_ij) and per sending cell
    # (cap = that cell's flow capacity).  Channel 0 is uncapped.
    edge_channel: np.ndarray    # channel id per edge
    channel_cap: np.ndarray     # (n_channels,) veh/s
    chan_perm: np.ndarray       # stable argsort of edge_channel

    # Logit block structure: routes grouped contiguously by od pair.
    block_starts: np.ndarray
    block_od: np.ndarray
    route_block: np.ndarray

    rate_table: np.ndarray      # (T, n_od) veh/s sampled at step starts
    active_step: np.ndarray     # (T,) bool, any demand this step

    @property
    def n_slots(self) -> int:
        return int(self.slot_loc.size)

    def route_slots(self, route_idx: int) -> slice:
        return slice(int(self.route_starts[route_idx]), int(self.route_starts[route_idx + 1]))


def _cell_sort_key(loc) -> tuple:
    kind = loc[0]
    if kind == "main":
        return (0, loc[1], loc[2], loc[3])
    if kind == "on":
        return (1, loc[1], loc[2], -1)
    if kind == "off":
        return (2, loc[1], loc[2], -1)
    return (3, loc[1], loc[2], loc[3])  # conn


def compile_design(scenario: "Scenario", design: DesignVector) -> CompiledModel:
    """Resolve routes, locations, slots and static edge data for a design."""
    net = scenario.network
    cfg = scenario.sim
    report = validate_network(net)
    if not report.ok:
        raise CompileError("invalid network: " + "; ".join(report.violations))

    for fd, label in ((net.mainline_fd, "mainline"), (net.ramp_fd, "ramp")):
        limit = cfg.cell_length_m / fd.free_flow_speed
        if cfg.step_s > limit + 1e-12:
            raise CompileError(
                f"step {cfg.step_s:g} s violates the {label} stability bound "
                f"cell_length/free_flow_speed = {limit:g} s"
            )
    for c in net.candidates:
        if not math.isclose(c.cell_length, cfg.cell_length_m, rel_tol=1e-12):
            raise CompileError(
                f"candidate {c.origin}->{c.destination} cell_length {c.cell_length:g} "
                f"differs from configured {cfg.cell_length_m:g}"
            )

    sub_ids = net.subregion_ids
    n_sub = len(sub_ids)
    sub_index = {sid: k for k, sid in enumerate(sub_ids)}
    od_pairs = [(o, d) for o in sub_ids for d in sub_ids]
    od_index = {od: k for k, od in enumerate(od_pairs)}

    routes: list[Route] = []
    block_starts: list[int] = []
    block_od: list[int] = []
    for od in od_pairs:
        found = enumerate_routes(net, design, od[0], od[1], cfg.max_route_nodes)
        if found:
            block_starts.append(len(routes))
            block_od.append(od_index[od])
            routes.extend(found)

    rate_table = scenario.demand.rate_table(cfg.n_steps, cfg.step_s, od_pairs)
    routed = {od_index[(r.origin, r.destination)] for r in routes}
    for k, od in enumerate(od_pairs):
        if k not in routed and np.any(rate_table[:, k] > 0.0):
            raise CompileError(f"demand for od {od} but no route exists under this design")

    chains = [route_locations(r, net) for r in routes]

    main_locs = sorted(
        {loc for chain in chains for loc in chain if loc[0] == "main"},
        key=_cell_sort_key,
    )
    ramp_locs = sorted(
        {loc for chain in chains for loc in chain if loc[0] in ("on", "off", "conn")},
        key=_cell_sort_key,
    )
    locations = [("sub", sid) for sid in sub_ids] + main_locs + ramp_locs + [("none",)]
    loc_index = {loc: k for k, loc in enumerate(locations)}
    n_locs = len(locations)
    dummy = n_locs - 1
    main_loc_slice = slice(n_sub, n_sub + len(main_locs))
    ramp_loc_slice = slice(n_sub + len(main_locs), n_locs - 1)

    dir_exp = []
    for i, j in design.built_pairs:
        dir_exp.extend([(i, j), (j, i)])
    dir_exp = sorted(dir_exp)
    dir_col = {e: k for k, e in enumerate(dir_exp)}

    def _exp_of(loc) -> tuple[int, int]:
        if loc[0] == "conn":
            return (loc[2], loc[3])
        return (loc[1], loc[2])

    cell_col = np.array(
        [dir_col[_exp_of(loc)] for loc in main_locs + ramp_locs], dtype=np.int64
    )

    slot_loc: list[int] = []
    slot_route: list[int] = []
    edge_cap: list[float] = []
    edge_target: list[int] = []
    edge_channel: list[int] = []
    route_starts = [0]
    cap_main = net.mainline_fd.capacity
    cap_ramp = net.ramp_fd.capacity

    # Aggregate send channels: all classes crossing the same boundary share
    # its c_ij; all classes leaving the same cell share that cell's capacity.
    # Subregion completions have no aggregate cap (channel 0).
    chan_index: dict = {}
    channel_cap: list[float] = [UNBOUNDED]

    def _channel(key, cap: float) -> int:
        ch = chan_index.get(key)
        if ch is None:
            ch = len(channel_cap)
            chan_index[key] = ch
            channel_cap.append(cap)
        return ch

    for r_idx, chain in enumerate(chains):
        base = len(slot_loc)
        for pos, loc in enumerate(chain):
            slot_loc.append(loc_index[loc])
            slot_route.append(r_idx)
            if pos + 1 == len(chain):
                edge_cap.append(UNBOUNDED)
                edge_target.append(dummy)
                edge_channel.append(0)
                continue
            nxt = chain[pos + 1]
            edge_target.append(loc_index[nxt])
            if loc[0] == "sub" and nxt[0] == "sub":
                cap = net.boundary_capacity(loc[1], nxt[1])
                edge_cap.append(cap)
                edge_channel.append(_channel(("bnd", loc[1], nxt[1]), cap))
                continue
            if loc[0] == "main" and nxt[0] == "main":
                edge_cap.append(cap_main)
            else:
                # every other transfer crosses a ramp cell
                edge_cap.append(cap_ramp)
            if loc[0] == "sub":
                edge_channel.append(0)  # on-ramp entry; gated by ramp supply
            else:
                src_cap = cap_main if loc[0] == "main" else cap_ramp
                edge_channel.append(_channel(("src", loc), src_cap))
        route_starts.append(len(slot_loc))

    slot_loc_arr = np.asarray(slot_loc, dtype=np.int64)
    slot_route_arr = np.asarray(slot_route, dtype=np.int64)
    edge_target_arr = np.asarray(edge_target, dtype=np.int64)
    edge_cap_arr = np.asarray(edge_cap, dtype=float)
    edge_channel_arr = np.asarray(edge_channel, dtype=np.int64)

    sub_slot_idx = np.flatnonzero(slot_loc_arr < n_sub)
    main_slot_idx = np.flatnonzero(
        (slot_loc_arr >= main_loc_slice.start) & (slot_loc_arr < main_loc_slice.stop)
    )
    ramp_slot_idx = np.flatnonzero(
        (slot_loc_arr >= ramp_loc_slice.start) & (slot_loc_arr < ramp_loc_slice.stop)
    )
    term_idx = np.flatnonzero(edge_target_arr == dummy)
    nonterm_idx = np.flatnonzero(edge_target_arr != dummy)
    succ_idx = nonterm_idx + 1  # next chain position is always the next slot

    subs = [net.subregion(sid) for sid in sub_ids]
    sub_trip_len = np.array([s.avg_trip_length for s in subs])
    time_len = np.where(
        slot_loc_arr < n_sub, sub_trip_len[np.minimum(slot_loc_arr, n_sub - 1)], cfg.cell_length_m
    ).astype(float)

    return CompiledModel(
        network=net,
        design=design,
        config=cfg,
        mu=scenario.logit_mu,
        routes=tuple(routes),
        subregion_ids=sub_ids,
        dir_expressways=tuple(dir_exp),
        n_locs=n_locs,
        n_sub=n_sub,
        main_loc_slice=main_loc_slice,
        ramp_loc_slice=ramp_loc_slice,
        cell_col=cell_col,
        sub_a3=np.array([s.mfd_coeffs[0] for s in subs]),
        sub_a2=np.array([s.mfd_coeffs[1] for s in subs]),
        sub_a1=np.array([s.mfd_coeffs[2] for s in subs]),
        sub_trip_len=sub_trip_len,
        sub_n_max=np.array([s.n_max for s in subs]),
        sub_c_max=np.array([s.c_max for s in subs]),
        slot_loc=slot_loc_arr,
        slot_route=slot_route_arr,
        time_len=time_len,
        edge_cap=edge_cap_arr,
        edge_target_loc=edge_target_arr,
        sub_slot_idx=sub_slot_idx,
        sub_slot_subidx=slot_loc_arr[sub_slot_idx],
        main_slot_idx=main_slot_idx,
        ramp_slot_idx=ramp_slot_idx,
        nonterm_idx=nonterm_idx,
        succ_idx=succ_idx,
        term_idx=term_idx,
        head_idx=np.asarray(route_starts[:-1], dtype=np.int64),
        route_starts=np.asarray(route_starts, dtype=np.int64),
        slot_perm=np.argsort(slot_loc_arr, kind="stable"),
        edge_perm=np.argsort(edge_target_arr, kind="stable"),
        edge_channel=edge_channel_arr,
        channel_cap=np.asarray(channel_cap, dtype=float),
        chan_perm=np.argsort(edge_channel_arr, kind="stable"),
        block_starts=np.asarray(block_starts, dtype=np.int64),
        block_od=np.asarray(block_od, dtype=np.int64),
        route_block=np.repeat(
            np.arange(len(block_starts), dtype=np.int64),
            np.diff(np.asarray(block_starts + [len(routes)], dtype=np.int64)),
        ),
        rate_table=rate_table,
        active_step=np.any(rate_table > 0.0, axis=1),
    )


class Simulation:
    """Mutable stepping state over a compiled model.

    state holds vehicles per slot (cells store vehicles too; density is
    vehicles / cell length).  Diagnostics of the most recent step stay
    accessible for tests and debugging.
    """

    def __init__(self, model: CompiledModel):
        self.model = model
        self.t = 0
        self.state = np.zeros(model.n_slots)
        self.injected_veh = 0.0
        self.completed_veh = 0.0
        self.max_step_conservation_error = 0.0
        self.max_accumulation_ratio = 0.0
        self.max_occupancy_ratio = 0.0
        self._predicted_total: float | None = None
        n_slots = model.n_slots
        # reusable buffers (the step loop never allocates)
        self._supply = np.empty(model.n_locs)
        self._supply[-1] = UNBOUNDED
        self._speed = np.empty(model.n_locs)
        self._speed[-1] = 1.0  # dummy location, never traversed
        self._demand = np.empty(n_slots)
        self._inflow = np.empty(n_slots)
        self._loc_veh = np.empty(model.n_locs)
        self._pool = np.empty(model.n_locs)
        self._ratio_loc = np.empty(model.n_locs)
        self._q = np.empty(n_slots)
        self._ratio = np.empty(n_slots)
        self._tmp = np.empty(n_slots)
        self._gather = np.empty(n_slots)
        self._term_buf = np.empty(model.term_idx.size)
        self._sub_buf = np.empty(model.sub_slot_idx.size)
        self._sub_buf2 = np.empty(model.sub_slot_idx.size)
        n_cells = model.n_locs - 1 - model.n_sub
        n_main = model.main_loc_slice.stop - model.main_loc_slice.start
        self._cell_jam = np.empty(n_cells)
        self._cell_jam[:n_main] = model.network.mainline_fd.jam_density
        self._cell_jam[n_main:] = model.network.ramp_fd.jam_density
        # grouped-permutation index structures: sorting slots (edges) by
        # location once turns every per-location aggregation into one
        # take + add.reduceat instead of a weighted bincount
        sorted_loc = model.slot_loc[model.slot_perm]
        self._slot_group_starts = np.flatnonzero(
            np.r_[True, sorted_loc[1:] != sorted_loc[:-1]]
        )
        self._slot_group_locs = sorted_loc[self._slot_group_starts]
        sorted_tgt = model.edge_target_loc[model.edge_perm]
        self._edge_group_starts = np.flatnonzero(
            np.r_[True, sorted_tgt[1:] != sorted_tgt[:-1]]
        )
        self._edge_group_locs = sorted_tgt[self._edge_group_starts]
        sorted_chan = model.edge_channel[model.chan_perm]
        self._chan_group_starts = np.flatnonzero(
            np.r_[True, sorted_chan[1:] != sorted_chan[:-1]]
        )
        self._chan_group_ids = sorted_chan[self._chan_group_starts]
        self._chan_pool = np.zeros(model.channel_cap.size)
        self._chan_ratio = np.empty(model.channel_cap.size)
        # fused per-slot constants for the cell demand rule min(Vf*K, C);
        # subregion slots get coef 0 / cap UNBOUNDED and are overwritten
        net = model.network
        inv_len = 1.0 / model.config.cell_length_m
        self._slot_coef = np.zeros(n_slots)
        self._slot_cap = np.full(n_slots, UNBOUNDED)
        self._slot_coef[model.main_slot_idx] = net.mainline_fd.free_flow_speed * inv_len
        self._slot_cap[model.main_slot_idx] = net.mainline_fd.capacity
        self._slot_coef[model.ramp_slot_idx] = net.ramp_fd.free_flow_speed * inv_len
        self._slot_cap[model.ramp_slot_idx] = net.ramp_fd.capacity
        # per-location traversal length for route time aggregation
        self._loc_len = np.empty(model.n_locs)
        self._loc_len[: model.n_sub] = model.sub_trip_len
        self._loc_len[model.n_sub :] = model.config.cell_length_m
        self._loc_len[-1] = 0.0
        self._loc_time = np.empty(model.n_locs)
        # last-step diagnostics; views into the buffers above, valid
        # until the next step() call
        self.last_demand: np.ndarray | None = None
        self.last_flow: np.ndarray | None = None
        self.last_inflow: np.ndarray | None = None
        self.last_supply: np.ndarray | None = None
        self.last_pool: np.ndarray | None = None
        self.last_route_times: np.ndarray | None = None
        self.last_route_rates: np.ndarray | None = None

    # -- state aggregation ------------------------------------------------

    def location_vehicles(self) -> np.ndarray:
        return np.bincount(self.model.slot_loc, weights=self.state, minlength=self.model.n_locs)

    def subregion_accumulations(self) -> np.ndarray:
        return self.location_vehicles()[: self.model.n_sub]

    def route_times(self) -> np.ndarray:
        """Instantaneous travel time of every route at the current state."""
        return self._route_times(self.location_vehicles()).copy()

    def _aggregate_locations(self) -> np.ndarray:
        """Same totals as location_vehicles(), into a reused buffer."""
        lv = self._loc_veh
        lv.fill(0.0)
        self.state.take(self.model.slot_perm, out=self._gather)
        lv[self._slot_group_locs] = np.add.reduceat(self._gather, self._slot_group_starts)
        return lv

    def _route_times(self, loc_veh: np.ndarray) -> np.ndarray:
        # per-location time once, then sum each contiguous slot chain
        self._update_speeds(loc_veh)
        m = self.model
        np.divide(self._loc_len, self._speed, out=self._loc_time)
        self._loc_time.take(m.slot_loc, out=self._gather)
        return np.add.reduceat(self._gather, m.route_starts[:-1])

    def _production(self, n: np.ndarray) -> np.ndarray:
        m = self.model
        return np.maximum(((m.sub_a3 * n + m.sub_a2) * n + m.sub_a1) * n, 0.0)

    def _update_speeds(self, loc_veh: np.ndarray) -> None:
        m = self.model
        n = loc_veh[: m.n_sub]
        p = self._production(n)
        v = self._speed
        v[: m.n_sub] = np.where(n > 0.0, p / np.where(n > 0.0, n, 1.0), m.sub_a1)
        inv_len = 1.0 / m.config.cell_length_m
        v[m.main_loc_slice] = xw.cell_speed(
            m.network.mainline_fd, loc_veh[m.main_loc_slice] * inv_len
        )
        v[m.ramp_loc_slice] = xw.cell_speed(
            m.network.ramp_fd, loc_veh[m.ramp_loc_slice] * inv_len
        )
        np.maximum(v, m.config.speed_floor, out=v)

    # -- stepping ---------------------------------------------------------

    def step(self, record_into: tuple | None = None) -> None:
        m = self.model
        if self.t >= m.config.n_steps:
            raise SimulationError("simulation horizon already reached")
        cfg = m.config
        ts = cfg.step_s
        x = self.state
        inv_len = 1.0 / cfg.cell_length_m

        loc_veh = self._aggregate_locations()
        total = float(loc_veh.sum())
        if not np.isfinite(total):
            raise SimulationError(f"state diverged at step {self.t}")
        if self._predicted_total is not None:
            err = abs(total - self._predicted_total) / max(1.0, total)
            self.max_step_conservation_error = max(self.max_step_conservation_error, err)
            if err > 1e-6:
                raise SimulationError(
                    f"conservation broke at step {self.t}: drift {err:.3g}"
                )

        n = loc_veh[: m.n_sub]
        self.max_accumulation_ratio = max(
            self.max_accumulation_ratio, float(np.max(n / m.sub_n_max)) if m.n_sub else 0.0
        )
        cell_veh = loc_veh[m.n_sub : m.n_locs - 1]
        if cell_veh.size:
            occ_ratio = cell_veh * inv_len / self._cell_jam
            ratio = float(np.max(occ_ratio))
            self.max_occupancy_ratio = max(self.max_occupancy_ratio, ratio)
            if ratio > 1.0 + 1e-9:
                worst = int(np.argmax(occ_ratio))
                raise SimulationError(
                    f"cell density above jam at location {m.n_sub + worst}, step {self.t}"
                )

        if record_into is not None:
            acc_row, exp_row = record_into
            acc_row[:] = n
            if exp_row.size:
                exp_row[:] = np.bincount(m.cell_col, weights=cell_veh, minlength=exp_row.size)

        # production-based sending demand of subregion classes
        p = self._production(n)
        n_safe = np.where(n > 0.0, n, 1.0)
        fac = np.where(n > 0.0, p / (n_safe * m.sub_trip_len), 0.0)

        # per-slot sending demand: cells use min(Vf * K, C) via fused
        # constants, then subregion slots overwrite with x * P/(n * L)
        demand = self._demand
        np.multiply(x, self._slot_coef, out=demand)
        np.minimum(demand, self._slot_cap, out=demand)
        x.take(m.sub_slot_idx, out=self._sub_buf)
        fac.take(m.sub_slot_subidx, out=self._sub_buf2)
        self._sub_buf *= self._sub_buf2
        demand[m.sub_slot_idx] = self._sub_buf

        supply = self._supply
        supply[: m.n_sub] = np.maximum(m.sub_c_max * (1.0 - n / m.sub_n_max), 0.0)
        supply[m.main_loc_slice] = xw.cell_supply(
            m.network.mainline_fd, loc_veh[m.main_loc_slice] * inv_len
        )
        supply[m.ramp_loc_slice] = xw.cell_supply(
            m.network.ramp_fd, loc_veh[m.ramp_loc_slice] * inv_len
        )

        # competing demand per receiving location
        pool = self._pool
        pool.fill(0.0)
        demand.take(m.edge_perm, out=self._gather)
        pool[self._edge_group_locs] = np.add.reduceat(self._gather, self._edge_group_starts)

        # capped proportional allocation; same rule as flows.allocate:
        # q = min(demand, cap, demand * supply / pool), with q = demand
        # when the pool is empty (then demand is 0 anyway).  The share
        # fraction min(1, supply/pool) only depends on the receiving
        # location, so it is computed per location and gathered once.
        rl = self._ratio_loc
        # floor keeps supply/pool finite even against UNBOUNDED supply;
        # a pool this small means every member demand is this small too
        np.maximum(pool, 1e-30, out=rl)
        np.divide(supply, rl, out=rl)
        np.minimum(rl, 1.0, out=rl)

        # aggregate passage caps: classes crossing one boundary share its
        # c_ij, classes leaving one cell share that cell's capacity
        cp = self._chan_pool
        cp.fill(0.0)
        demand.take(m.chan_perm, out=self._gather)
        cp[self._chan_group_ids] = np.add.reduceat(self._gather, self._chan_group_starts)
        cr = self._chan_ratio
        np.maximum(cp, 1e-30, out=cr)
        np.divide(m.channel_cap, cr, out=cr)
        np.minimum(cr, 1.0, out=cr)

        q = self._q
        rl.take(m.edge_target_loc, out=self._ratio)
        cr.take(m.edge_channel, out=self._gather)
        np.minimum(self._ratio, self._gather, out=self._ratio)
        np.multiply(demand, self._ratio, out=q)
        np.minimum(q, m.edge_cap, out=q)
        # no slot sends more than its current content in one step
        np.divide(x, ts, out=self._tmp)
        np.minimum(q, self._tmp, out=q)

        # successor of slot k is slot k+1 within each contiguous chain,
        # so inflow is a shifted copy; chain heads are reset (terminal
        # flows would otherwise leak onto the next route's head)
        inflow = self._inflow
        inflow[0] = 0.0
        np.copyto(inflow[1:], q[:-1])
        inflow[m.head_idx] = 0.0

        if m.active_step[self.t]:
            times = self._route_times(loc_veh)
            z = -m.mu * times
            zmax = np.maximum.reduceat(z, m.block_starts)
            e = np.exp(z - zmax[m.route_block])
            sums = np.add.reduceat(e, m.block_starts)
            theta = e / sums[m.route_block]
            rates = m.rate_table[self.t]
            route_rates = theta * rates[m.block_od[m.route_block]]
            inflow[m.head_idx] = route_rates
            injected = float(route_rates.sum()) * ts
            self.last_route_times = times
            self.last_route_rates = route_rates
        else:
            injected = 0.0
            self.last_route_times = None
            self.last_route_rates = None

        q.take(m.term_idx, out=self._term_buf)
        completed = float(self._term_buf.sum()) * ts
        self.injected_veh += injected
        self.completed_veh += completed
        self._predicted_total = total + injected - completed

        # advance all slots at once (same update as sr.update_accumulation,
        # in place; the content clamp above already bounds every outflow)
        np.subtract(inflow, q, out=self._tmp)
        self._tmp *= ts
        x += self._tmp
        lowest = float(x.min())
        if lowest < -1e-9:
            raise SimulationError(
                f"step {self.t}: accumulation went negative ({lowest:.3g} veh)"
            )
        np.maximum(x, 0.0, out=x)
        self.last_demand = demand
        self.last_flow = q
        self.last_inflow = inflow
        self.last_supply = supply
        self.last_pool = pool
        self.t += 1

    def run(self) -> SimResult:
        m = self.model
        cfg = m.config
        t_count = cfg.n_steps
        acc = np.zeros((t_count, m.n_sub))
        exp_ = np.zeros((t_count, len(m.dir_expressways)))
        completed = np.zeros(t_count)
        injected = np.zeros(t_count)
        for t in range(t_count):
            before_inj = self.injected_veh
            before_comp = self.completed_veh
            self.step(record_into=(acc[t], exp_[t]))
            injected[t] = self.injected_veh - before_inj
            completed[t] = self.completed_veh - before_comp

        residual = float(self.state.sum())
        tts = total_time_spent(acc, exp_, cfg.step_s)
        audit = {
            "injected_veh": self.injected_veh,
            "completed_veh": self.completed_veh,
            "residual_veh": residual,
            "conservation_gap_veh": self.injected_veh - self.completed_veh - residual,
            "max_step_conservation_error": self.max_step_conservation_error,
            "max_accumulation_ratio": self.max_accumulation_ratio,
            "max_occupancy_ratio": self.max_occupancy_ratio,
        }
        return SimResult(
            step_s=cfg.step_s,
            n_steps=t_count,
            design_bits=m.design.bit_string,
            subregion_ids=m.subregion_ids,
            dir_expressways=m.dir_expressways,
            accumulations=acc,
            expressway_vehicles=exp_,
            completed_per_step=completed,
            injected_per_step=injected,
            tts_veh_h=tts,
            avg_accumulation_veh=float(acc.sum(axis=1).mean()),
            avg_completion_flow_veh_h=float(completed.sum()) / cfg.horizon_s * 3600.0,
            audit=audit,
        )


def run(scenario: "Scenario", design: DesignVector) -> SimResult:
    """Compile and simulate one design over the scenario horizon."""
    return Simulation(compile_design(scenario, design)).run()
