"""Budget-constrained expressway design search.

The decision variable is one bit per candidate pair (bit order =
network.candidate_pairs).  Designs are scored by total time spent from
a full simulation; a shared memoizing Evaluator keeps the search cheap
because the swarm revisits few distinct bit strings (at most 2**n_bits).

Two searchers: exhaustive enumeration (exact, small networks) and a
binary particle swarm.  Velocities move in logit space; a sigmoid maps
each velocity to the probability of the bit being 1.  Budget violations
are handled by repair (drop the most expensive built pairs) or by an
additive penalty, per scenario settings.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

from .engine import SimResult, run
from .network import DesignVector, design_cost

if TYPE_CHECKING:
    from .scenario import PsoSettings, Scenario

__all__ = [
    "OptimizerError",
    "Evaluator",
    "SearchRow",
    "SearchTable",
    "PsoResult",
    "SweepRow",
    "SweepResult",
    "exhaustive_search",
    "pso_optimize",
    "budget_sweep",
]

_EXHAUSTIVE_BIT_CAP = 16


class OptimizerError(RuntimeError):
    pass


class Evaluator:
    """Memoizing design -> simulation bridge for one scenario.

    Results are cached per bit string, so exhaustive search followed by
    any number of swarm runs never simulates the same design twice.
    Thread-safe for read-mostly sharing.
    """

    def __init__(self, scenario: "Scenario"):
        self.scenario = scenario
        self.pairs = scenario.network.candidate_pairs
        self.pair_costs = tuple(scenario.network.pair_cost(p) for p in self.pairs)
        self._cache: dict[tuple[int, ...], SimResult] = {}
        self._lock = threading.Lock()
        self.n_calls = 0

    @property
    def n_bits(self) -> int:
        return len(self.pairs)

    @property
    def n_simulations(self) -> int:
        """Distinct designs simulated so far."""
        return len(self._cache)

    def design(self, bits: Iterable[int] | str) -> DesignVector:
        return DesignVector.from_bits(self.scenario.network, bits)

    def cost(self, bits: Iterable[int] | str) -> float:
        design = self.design(bits)
        return design_cost(self.scenario.network, design)

    def result(self, bits: Iterable[int] | str) -> SimResult:
        design = self.design(bits)
        key = design.bits
        self.n_calls += 1
        with self._lock:
            cached = self._cache.get(key)
        if cached is not None:
            return cached
        res = run(self.scenario, design)
        with self._lock:
            return self._cache.setdefault(key, res)

    def tts(self, bits: Iterable[int] | str) -> float:
        return self.result(bits).tts_veh_h


@dataclass(frozen=True)
class SearchRow:
    bits: str
    cost: float      # $
    tts: float       # veh h
    feasible: bool


@dataclass(frozen=True)
class SearchTable:
    """Every design of an exhaustive run, in bit-lexicographic order."""

    budget: float | None
    rows: tuple[SearchRow, ...]
    best_bits: str
    best_tts: float
    best_cost: float

    def row(self, bits: str) -> SearchRow:
        for r in self.rows:
            if r.bits == bits:
                return r
        raise KeyError(bits)


def exhaustive_search(evaluator: Evaluator, budget: float | None = None) -> SearchTable:
    """Simulate every design; pick the best budget-feasible one.

    Ties on total time spent break to lower cost, then to the
    lexicographically smaller bit string (the enumeration order).
    """
    n = evaluator.n_bits
    if n > _EXHAUSTIVE_BIT_CAP:
        raise OptimizerError(
            f"exhaustive search over {n} bits would need {2 ** n} simulations "
            f"(cap {_EXHAUSTIVE_BIT_CAP} bits); use pso_optimize"
        )
    rows: list[SearchRow] = []
    best: SearchRow | None = None
    for bits_tuple in itertools.product((0, 1), repeat=n):
        bits = "".join(map(str, bits_tuple))
        cost = evaluator.cost(bits)
        feasible = budget is None or cost <= budget
        tts = evaluator.tts(bits)
        row = SearchRow(bits=bits, cost=cost, tts=tts, feasible=feasible)
        rows.append(row)
        if feasible and (best is None or (row.tts, row.cost) < (best.tts, best.cost)):
            best = row
    if best is None:
        raise OptimizerError(f"no design fits the budget {budget!r}")
    return SearchTable(
        budget=budget,
        rows=tuple(rows),
        best_bits=best.bits,
        best_tts=best.tts,
        best_cost=best.cost,
    )


def _repair(bits: np.ndarray, costs: np.ndarray, budget: float) -> None:
    """Drop built pairs, most expensive first, until the budget holds.

    In-place; ties break to the lowest bit index (argmax picks the first
    maximum), so repair is deterministic.
    """
    total = float(costs[bits == 1].sum())
    while total > budget:
        built_costs = np.where(bits == 1, costs, -1.0)
        k = int(np.argmax(built_costs))
        if bits[k] == 0:  # nothing left to drop; budget < 0
            raise OptimizerError(f"budget {budget:g} cannot be met even by the empty design")
        bits[k] = 0
        total -= float(costs[k])


@dataclass(frozen=True)
class PsoResult:
    best_bits: str
    best_tts: float     # veh h
    best_cost: float    # $
    budget: float       # $
    seed: int
    iterations: int
    trace: tuple[float, ...] = field(repr=False)  # gbest tts after init + each iteration
    n_evaluations: int = 0  # evaluator calls made by this run


def pso_optimize(
    evaluator: Evaluator,
    budget: float,
    seed: int,
    settings: "PsoSettings | None" = None,
    initial_bits: str | Sequence[int] | None = None,
) -> PsoResult:
    """Binary particle swarm over candidate bits under a budget.

    Particle positions are bit vectors; velocities are logits clamped to
    +-velocity_clamp and mapped through a sigmoid to resampling
    probabilities.  Inertia decays linearly over the iterations.  The
    initial swarm evaluation counts as iteration 0, so the trace has
    iterations + 1 entries.  initial_bits seeds particle 0 (warm start).
    """
    if settings is None:
        settings = evaluator.scenario.pso
    if budget < 0:
        raise OptimizerError("budget must be >= 0")
    n = evaluator.n_bits
    if n == 0:
        raise OptimizerError("network has no candidate pairs to optimize")
    costs = np.asarray(evaluator.pair_costs)
    repair_mode = settings.infeasible == "repair"
    # penalty scale: any budget excess outweighs any achievable time saving
    penalty_per_dollar = 1e9

    rng = np.random.default_rng(seed)
    S = settings.swarm_size
    x = (rng.random((S, n)) < 0.5).astype(np.int8)
    v = rng.uniform(-1.0, 1.0, size=(S, n))
    if initial_bits is not None:
        seed_design = DesignVector.from_bits(evaluator.scenario.network, initial_bits)
        x[0] = np.asarray(seed_design.bits, dtype=np.int8)

    calls_before = evaluator.n_calls

    def fitness(row: np.ndarray) -> tuple[float, float, float]:
        """(score, tts, cost) for one particle; repairs in place if enabled."""
        if repair_mode:
            _repair(row, costs, budget)
        bits = "".join("1" if b else "0" for b in row)
        cost = evaluator.cost(bits)
        tts = evaluator.tts(bits)
        excess = max(0.0, cost - budget)
        return tts + penalty_per_dollar * excess, tts, cost

    pbest_x = np.empty_like(x)
    pbest_f = np.full(S, np.inf)
    gbest_x = np.zeros(n, dtype=np.int8)
    gbest_f = np.inf
    gbest_tts = np.inf
    gbest_cost = 0.0

    def evaluate_swarm() -> None:
        nonlocal gbest_f, gbest_tts, gbest_cost, gbest_x
        for s in range(S):
            score, tts, cost = fitness(x[s])
            if score < pbest_f[s]:
                pbest_f[s] = score
                pbest_x[s] = x[s]
            if score < gbest_f:
                gbest_f = score
                gbest_tts = tts
                gbest_cost = cost
                gbest_x = x[s].copy()

    evaluate_swarm()
    trace = [gbest_tts]

    w_span = settings.inertia_end - settings.inertia_start
    denom = max(settings.iterations - 1, 1)
    for it in range(settings.iterations):
        w = settings.inertia_start + w_span * (it / denom)
        r1 = rng.random((S, n))
        r2 = rng.random((S, n))
        v = (
            w * v
            + settings.cognitive * r1 * (pbest_x - x)
            + settings.social * r2 * (gbest_x[None, :] - x)
        )
        np.clip(v, -settings.velocity_clamp, settings.velocity_clamp, out=v)
        prob = 1.0 / (1.0 + np.exp(-v))
        x = (rng.random((S, n)) < prob).astype(np.int8)
        evaluate_swarm()
        trace.append(gbest_tts)

    if gbest_cost > budget:  # penalty mode never found a feasible design
        fallback = np.zeros(n, dtype=np.int8)
        _, gbest_tts, gbest_cost = fitness(fallback)
        gbest_x = fallback

    return PsoResult(
        best_bits="".join(map(str, gbest_x.tolist())),
        best_tts=gbest_tts,
        best_cost=gbest_cost,
        budget=budget,
        seed=seed,
        iterations=settings.iterations,
        trace=tuple(trace),
        n_evaluations=evaluator.n_calls - calls_before,
    )


@dataclass(frozen=True)
class SweepRow:
    budget: float                 # $
    best_bits: str
    cost: float                   # $
    tts_veh_h: float
    avg_accumulation_veh: float
    avg_completion_veh_h: float
    total_completed_veh: float


@dataclass(frozen=True)
class SweepResult:
    scenario_name: str
    method: str                   # "pso" or "exhaustive"
    seed: int | None
    budgets: tuple[float, ...]
    rows: tuple[SweepRow, ...]
    n_simulations: int            # distinct designs simulated overall


def budget_sweep(
    evaluator: Evaluator,
    budgets: Sequence[float] | None = None,
    seed: int | None = None,
    method: str = "pso",
    settings: "PsoSettings | None" = None,
) -> SweepResult:
    """Best design per budget, ascending.

    With the swarm, each budget's run is seeded (particle 0) with the
    previous budget's winner, so the reported time spent can only improve
    as money is added.  Per-budget RNG seeds are seed + index.
    """
    scenario = evaluator.scenario
    if budgets is None:
        budgets = scenario.costs.budgets
    if not budgets:
        raise OptimizerError("no budgets given and the scenario defines none")
    budgets = tuple(sorted(float(b) for b in budgets))
    if method not in ("pso", "exhaustive"):
        raise OptimizerError(f"unknown sweep method {method!r}")
    if method == "pso" and seed is None:
        raise OptimizerError("pso sweep needs a seed")

    rows: list[SweepRow] = []
    warm: str | None = None
    for k, budget in enumerate(budgets):
        if method == "exhaustive":
            table = exhaustive_search(evaluator, budget=budget)
            bits, cost, tts = table.best_bits, table.best_cost, table.best_tts
        else:
            assert seed is not None
            out = pso_optimize(
                evaluator, budget, seed=seed + k, settings=settings, initial_bits=warm
            )
            bits, cost, tts = out.best_bits, out.best_cost, out.best_tts
        warm = bits
        res = evaluator.result(bits)
        rows.append(
            SweepRow(
                budget=budget,
                best_bits=bits,
                cost=cost,
                tts_veh_h=tts,
                avg_accumulation_veh=res.avg_accumulation_veh,
                avg_completion_veh_h=res.avg_completion_flow_veh_h,
                total_completed_veh=res.total_completed_veh,
            )
        )
    return SweepResult(
        scenario_name=scenario.name,
        method=method,
        seed=seed,
        budgets=budgets,
        rows=tuple(rows),
        n_simulations=evaluator.n_simulations,
    )
