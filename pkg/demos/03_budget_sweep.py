"""Find the best expressway design for every budget level.

First enumerates all 256 designs (the ground truth, about 15 s), then
runs the particle swarm per budget against the same cached evaluations
and checks that it lands on the optimum.
"""

import time

from mixroad import (
    Evaluator,
    budget_sweep,
    bundled_scenario_path,
    format_sweep_table,
    load_scenario,
    pso_optimize,
)

scenario = load_scenario(bundled_scenario_path("yokohama5"))
evaluator = Evaluator(scenario)

t0 = time.perf_counter()
sweep = budget_sweep(evaluator, method="exhaustive")
print(f"enumerated {evaluator.n_simulations} designs "
      f"in {time.perf_counter() - t0:.1f} s\n")
print(format_sweep_table(sweep))

# The swarm reuses the evaluator cache, so these runs cost milliseconds.
print("\nparticle swarm vs enumeration:")
for row in sweep.rows:
    best = pso_optimize(evaluator, row.budget, seed=0)
    tag = "= optimum" if best.best_bits == row.best_bits else (
        f"{100 * (best.best_tts / row.tts_veh_h - 1):.2f}% above optimum"
    )
    print(f"  ${row.budget / 1e6:>3.0f}M: swarm {best.best_bits} "
          f"{best.best_tts:.1f} veh h  {tag}")
