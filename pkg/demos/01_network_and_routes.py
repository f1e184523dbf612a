"""Walk through the bundled five-subregion network: validation, candidate
expressways, construction costs, and how the route set reacts to a design.

Runs in well under a second.
"""

from mixroad import (
    DesignVector,
    bundled_scenario_path,
    design_cost,
    enumerate_routes,
    load_scenario,
    render_design_matrix,
    validate_network,
)

scenario = load_scenario(bundled_scenario_path("yokohama5"))
net = scenario.network

print("subregions:", net.subregion_ids)
for s in net.subregions:
    print(
        f"  {s.id}: trip length {s.avg_trip_length:.0f} m, "
        f"storage {s.n_max:.0f} veh, neighbours {net.neighbors(s.id)}"
    )

report = validate_network(net)
print("validation violations:", report.violations or "none")

print("\ncandidate expressway pairs (bit order):")
for bit, pair in enumerate(net.candidate_pairs):
    length = net.candidate(*pair).mainline_length
    cost = net.pair_cost(pair)
    print(f"  bit {bit}: {pair[0]}-{pair[1]}  {length / 1000:.1f} km  ${cost / 1e6:.1f}M")

# An empty design only offers boundary routes; building 1-5 and 2-5 adds
# expressway alternatives, including one that never touches subregion 5.
for bits in ("00000000", "00101000"):
    design = DesignVector.from_bits(net, bits)
    print(f"\ndesign {bits}  (cost ${design_cost(net, design) / 1e6:.1f}M)")
    print(render_design_matrix(net, design))
    routes = enumerate_routes(net, design, 4, 2, scenario.sim.max_route_nodes)
    print(f"routes 4 -> 2 ({len(routes)}):")
    for r in routes:
        print("   ", r)
