"""Mixed arterial/expressway traffic simulation and network design.

Subregions follow aggregate production-curve dynamics, expressways a
cell transmission model; demand is split across routes by a logit on
instantaneous travel times.  The optimizer searches budget-feasible
expressway designs for minimum total time spent.
"""

from .assignment import LogitParams, logit_probabilities, route_travel_time, split_demand
from .engine import (
    CompileError,
    SimConfig,
    SimResult,
    Simulation,
    SimulationError,
    compile_design,
    run,
    total_time_spent,
)
from .network import (
    BoundaryLink,
    CandidateExpressway,
    DesignVector,
    FundamentalDiagram,
    MixedNetwork,
    SubregionParams,
    ValidationReport,
    connecting_ramps,
    design_cost,
    is_budget_feasible,
    validate_network,
)
from .reporting import (
    export_results,
    format_sweep_table,
    render_design_matrix,
    summary_dict,
    sweep_dict,
)
from .optimizer import (
    Evaluator,
    OptimizerError,
    PsoResult,
    SearchTable,
    budget_sweep,
    exhaustive_search,
    pso_optimize,
)
from .routes import ExpresswayNode, Route, SubregionNode, enumerate_routes, route_locations
from .scenario import (
    CostParams,
    DemandEntry,
    DemandProfile,
    PsoSettings,
    Scenario,
    ScenarioError,
    apply_overrides,
    bundled_scenario_path,
    load_scenario,
    save_scenario,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # network
    "SubregionParams", "BoundaryLink", "FundamentalDiagram", "CandidateExpressway",
    "MixedNetwork", "DesignVector", "ValidationReport", "validate_network",
    "design_cost", "is_budget_feasible", "connecting_ramps",
    # reporting
    "export_results", "summary_dict", "sweep_dict", "render_design_matrix",
    "format_sweep_table",
    # routes
    "SubregionNode", "ExpresswayNode", "Route", "enumerate_routes", "route_locations",
    # assignment
    "LogitParams", "route_travel_time", "logit_probabilities", "split_demand",
    # engine
    "SimConfig", "SimResult", "Simulation", "CompileError", "SimulationError",
    "compile_design", "run", "total_time_spent",
    # scenario
    "Scenario", "ScenarioError", "DemandProfile", "DemandEntry", "PsoSettings",
    "CostParams", "load_scenario", "save_scenario", "apply_overrides",
    "bundled_scenario_path",
    # optimizer
    "Evaluator", "OptimizerError", "SearchTable", "PsoResult",
    "exhaustive_search", "pso_optimize", "budget_sweep",
]
