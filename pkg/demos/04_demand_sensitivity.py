"""How robust is the chosen design to the demand pattern?

Compares per-budget optima between the two bundled demand patterns.
Pattern B keeps the network layout but shifts trips toward the central
subregion, which changes the preferred mid-budget builds while the
unconstrained and zero-budget answers stay put.  Enumerates both
scenarios exhaustively, about half a minute in total.
"""

import time

from mixroad import Evaluator, bundled_scenario_path, exhaustive_search, load_scenario

evaluators = {}
for tag, name in [("A", "yokohama5"), ("B", "yokohama5_demand_b")]:
    scenario = load_scenario(bundled_scenario_path(name))
    evaluators[tag] = Evaluator(scenario)
    t0 = time.perf_counter()
    exhaustive_search(evaluators[tag])
    print(f"pattern {tag}: {evaluators[tag].n_simulations} designs "
          f"in {time.perf_counter() - t0:.1f} s")

budgets = evaluators["A"].scenario.costs.budgets
print(f"\n{'budget':>8}  {'pattern A':>22}  {'pattern B':>22}")
for b in budgets:
    rows = {t: exhaustive_search(e, b) for t, e in evaluators.items()}
    a, bb = rows["A"], rows["B"]
    mark = "  <- differs" if a.best_bits != bb.best_bits else ""
    print(f"{b / 1e6:>6.0f}M  {a.best_bits} {a.best_tts:>12.1f}  "
          f"{bb.best_bits} {bb.best_tts:>12.1f}{mark}")

print("\nReading: a design tuned to one peak-hour pattern is not automatically")
print("optimal for another; mid-range budgets are where the choice flips.")
