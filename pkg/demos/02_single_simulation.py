"""Simulate the bundled scenario twice, without expressways and with the
best $150M design, and compare the summary metrics.

If matplotlib is installed (`pip install mixroad[plot]`) the accumulation
trajectories are also written next to this script.  Runs in a second or
two either way.
"""

from pathlib import Path

from mixroad import DesignVector, bundled_scenario_path, load_scenario, run, summary_dict

scenario = load_scenario(bundled_scenario_path("yokohama5"))

results = {}
for label, bits in [("no build", "00000000"), ("$127.5M design", "11010100")]:
    design = DesignVector.from_bits(scenario.network, bits)
    res = run(scenario, design)
    results[label] = res
    s = summary_dict(res, scenario)
    print(f"{label} ({bits})")
    print(f"  time spent        {res.tts_veh_h:10.1f} veh h")
    print(f"  avg accumulation  {res.avg_accumulation_veh:10.1f} veh")
    print(f"  completion flow   {res.avg_completion_flow_veh_h:10.1f} veh/h")
    print(f"  completed         {res.total_completed_veh:10.1f} veh "
          f"of {s['audit']['injected_veh']:.1f} injected")

base = results["no build"].tts_veh_h
built = results["$127.5M design"].tts_veh_h
print(f"\nsaving: {base - built:.1f} veh h ({100 * (1 - built / base):.2f}%)")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    print("matplotlib not installed, skipping the figure")
else:
    fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharey=True)
    for ax, (label, res) in zip(axes, results.items()):
        t = [k * res.step_s / 60.0 for k in range(res.n_steps)]
        for j, sid in enumerate(res.subregion_ids):
            ax.plot(t, res.accumulations[:, j], label=f"subregion {sid}")
        ax.set_title(label)
        ax.set_xlabel("time (min)")
    axes[0].set_ylabel("accumulation (veh)")
    axes[0].legend(fontsize=8)
    out = Path(__file__).with_name("accumulations.png")
    fig.tight_layout()
    fig.savefig(out, dpi=120)
    print(f"wrote {out}")
