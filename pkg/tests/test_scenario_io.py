"""Scenario files, overrides, exports, and the command line front end."""

import csv
import json

import numpy as np
import pytest

from mixroad import (
    DesignVector,
    Evaluator,
    Scenario,
    ScenarioError,
    SimResult,
    apply_overrides,
    budget_sweep,
    bundled_scenario_path,
    design_cost,
    export_results,
    format_sweep_table,
    load_scenario,
    render_design_matrix,
    run,
    save_scenario,
    summary_dict,
    sweep_dict,
)
from mixroad.cli import main
from mixroad.reporting import (
    write_summary_json,
    write_sweep_csv,
    write_trace_csv,
    write_trajectory_csv,
)

TRIANGLE = "tests/data/triangle.scn"


# -- scenario files -----------------------------------------------------


def test_bundled_case_study_fields(case_study):
    net = case_study.network
    assert net.subregion_ids == (1, 2, 3, 4, 5)
    trip = {s.id: s.avg_trip_length for s in net.subregions}
    assert trip == {1: 4800.0, 2: 5200.0, 3: 4700.0, 4: 5500.0, 5: 4500.0}
    assert all(s.n_max == 10000.0 for s in net.subregions)
    assert all(b.capacity == pytest.approx(3000 / 3600) for b in net.boundaries)
    assert len(net.candidate_pairs) == 8
    assert net.mainline_fd.capacity == pytest.approx(6000 / 3600)
    assert net.ramp_fd.free_flow_speed == pytest.approx(40 / 3.6)
    assert case_study.logit.mu == 0.005
    assert case_study.sim.n_steps == 360
    assert case_study.sim.step_s == 10.0
    assert case_study.costs.budgets == tuple(b * 50e6 for b in range(6))


def test_bundled_demand_table_units(case_study):
    # Table rates are veh/h in the file and veh/s in memory; the diagonal
    # entries are 3400 veh/h for the first half hour.
    table = case_study.demand.rate_table(
        360, 10.0, [(o, d) for o in range(1, 6) for d in range(1, 6)]
    )
    assert table.shape == (360, 25)
    diag_col = [(o, d) for o in range(1, 6) for d in range(1, 6)].index((1, 1))
    assert table[0, diag_col] == pytest.approx(0.9444444444444444, rel=1e-15)
    assert table[179, diag_col] == table[0, diag_col]
    assert np.all(table[180:] == 0.0)
    # Total demand over the horizon is the case study's injection count.
    assert table.sum() * 10.0 == pytest.approx(40100.0, rel=1e-12)


def test_demand_b_swaps_od_pattern(case_study, case_study_b):
    full_od = [(o, d) for o in range(1, 6) for d in range(1, 6)]
    ta = case_study.demand.rate_table(360, 10.0, full_od)
    tb = case_study_b.demand.rate_table(360, 10.0, full_od)
    assert not np.array_equal(ta, tb)
    # Different totals too: B shifts weight toward the hub.
    assert ta.sum() * 10.0 == pytest.approx(40100.0, rel=1e-12)
    assert tb.sum() * 10.0 == pytest.approx(37300.0, rel=1e-12)


def test_round_trip_save_load(tmp_path, case_study):
    out = tmp_path / "copy.scn"
    save_scenario(case_study, out)
    again = load_scenario(out)
    # The writer normalizes element order; contents must match as sets
    # and everything else exactly.
    assert set(again.network.boundaries) == set(case_study.network.boundaries)
    assert set(again.network.candidates) == set(case_study.network.candidates)
    assert again.network.subregions == case_study.network.subregions
    assert again.network.mainline_fd == case_study.network.mainline_fd
    assert again.network.ramp_fd == case_study.network.ramp_fd
    assert sorted(again.demand.entries, key=lambda e: (e.origin, e.destination, e.start_s)) == sorted(
        case_study.demand.entries, key=lambda e: (e.origin, e.destination, e.start_s)
    )
    for field in ("sim", "logit", "pso", "costs"):
        assert getattr(again, field) == getattr(case_study, field)
    # A second pass through the writer is a byte-level fixed point.
    out2 = tmp_path / "copy2.scn"
    save_scenario(again, out2)
    assert out.read_bytes() == out2.read_bytes()


def test_round_trip_preserves_simulation(tmp_path):
    sc = load_scenario(TRIANGLE)
    saved = tmp_path / "tri.scn"
    save_scenario(sc, saved)
    again = load_scenario(saved)
    d1 = DesignVector.from_bits(sc.network, "11")
    d2 = DesignVector.from_bits(again.network, "11")
    assert run(again, d2).tts_veh_h == run(sc, d1).tts_veh_h


def test_load_missing_file_raises():
    with pytest.raises(ScenarioError, match="does not exist"):
        load_scenario("tests/data/absent.scn")
    with pytest.raises(FileNotFoundError):
        bundled_scenario_path("nonexistent")


def _write_variant(tmp_path, transform):
    text = open(TRIANGLE).read()
    path = tmp_path / "variant.scn"
    path.write_text(transform(text))
    return path


def test_demand_gap_rejected(tmp_path):
    path = _write_variant(
        tmp_path, lambda t: t.replace("5 min 10 min  * *  0 veh/h\n", "")
    )
    with pytest.raises(ScenarioError, match=r"ends at 300 s, before the horizon"):
        load_scenario(path)


def test_demand_interior_gap_rejected(tmp_path):
    path = _write_variant(
        tmp_path,
        lambda t: t.replace(
            "5 min 10 min  * *  0 veh/h", "6 min 10 min  * *  0 veh/h"
        ),
    )
    with pytest.raises(ScenarioError, match="has a gap at 300 s"):
        load_scenario(path)


def test_demand_overlap_rejected(tmp_path):
    path = _write_variant(
        tmp_path,
        lambda t: t.replace(
            "5 min 10 min  * *  0 veh/h", "4 min 10 min  * *  0 veh/h"
        ),
    )
    with pytest.raises(ScenarioError, match="overlaps at 240 s"):
        load_scenario(path)


def test_unknown_unit_rejected_with_position(tmp_path):
    path = _write_variant(
        tmp_path, lambda t: t.replace("1 2 2000 veh/h", "1 2 2000 furlongs")
    )
    with pytest.raises(ScenarioError, match=r"variant\.scn:\d+:"):
        load_scenario(path)


def test_bad_number_rejected(tmp_path):
    path = _write_variant(tmp_path, lambda t: t.replace("step = 10 s", "step = ten s"))
    with pytest.raises(ScenarioError, match="bad number"):
        load_scenario(path)


def test_overrides_apply_and_validate(case_study):
    sc = apply_overrides(
        case_study, {"mu": 0.002, "c_ij": 1.0, "c_max": 5.0, "Ts": 5.0}
    )
    assert sc.logit.mu == 0.002
    assert all(b.capacity == 1.0 for b in sc.network.boundaries)
    assert all(s.c_max == 5.0 for s in sc.network.subregions)
    assert sc.sim.step_s == 5.0
    # Horizon preserved: halving the step doubles the step count.
    assert sc.sim.n_steps == 720
    assert case_study.sim.step_s == 10.0  # original untouched
    with pytest.raises(ScenarioError, match="unknown override"):
        apply_overrides(case_study, {"velocity": 1.0})


def test_override_jam_densities_change_fds(case_study):
    sc = apply_overrides(case_study, {"K_jm": 0.4, "K_jr": 0.25})
    assert sc.network.mainline_fd.jam_density == 0.4
    assert sc.network.ramp_fd.jam_density == 0.25


# -- exports ------------------------------------------------------------


@pytest.fixture(scope="module")
def triangle_run():
    sc = load_scenario(TRIANGLE)
    return sc, run(sc, DesignVector.from_bits(sc.network, "10"))


def test_trajectory_csv_shape(tmp_path, triangle_run):
    sc, res = triangle_run
    path = tmp_path / "traj.csv"
    write_trajectory_csv(res, path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == [
        "time_s",
        "subregion_1_veh",
        "subregion_2_veh",
        "subregion_3_veh",
        "expressway_1_2_veh",
        "expressway_2_1_veh",
    ]
    assert len(rows) == 1 + 60
    assert rows[1][0] == "0.0"
    assert rows[-1][0] == repr(59 * 10.0)
    # Values survive the text round trip exactly.
    assert float(rows[5][1]) == res.accumulations[4, 0]


def test_trajectory_csv_header_only_when_empty(tmp_path):
    empty = SimResult(
        step_s=10.0,
        n_steps=0,
        design_bits="00",
        subregion_ids=(1, 2),
        dir_expressways=(),
        accumulations=np.zeros((0, 2)),
        expressway_vehicles=np.zeros((0, 0)),
        completed_per_step=np.zeros(0),
        injected_per_step=np.zeros(0),
        tts_veh_h=0.0,
        avg_accumulation_veh=0.0,
        avg_completion_flow_veh_h=0.0,
        audit={},
    )
    path = tmp_path / "empty.csv"
    write_trajectory_csv(empty, path)
    rows = list(csv.reader(open(path)))
    assert rows == [["time_s", "subregion_1_veh", "subregion_2_veh"]]


def test_summary_json_reparses_bit_exact(tmp_path, triangle_run):
    sc, res = triangle_run
    path = tmp_path / "summary.json"
    write_summary_json(res, path, sc)
    data = json.loads(open(path).read())
    assert data["tts_veh_h"] == res.tts_veh_h
    assert data["design_bits"] == "10"
    assert data["cost_dollars"] == 10e6
    assert data["total_injected_veh"] == res.total_injected_veh
    assert data["audit"]["residual_veh"] == res.audit["residual_veh"]
    params = data["parameters"]
    assert params["logit_mu_per_s"] == sc.logit.mu
    assert params["boundary_capacity_veh_s"]["1-2"] == pytest.approx(2000 / 3600)
    assert params["unit_cost_dollars_per_m"] == 5000.0


def test_summary_without_scenario_has_no_parameters(triangle_run):
    _, res = triangle_run
    d = summary_dict(res)
    assert "parameters" not in d and "cost_dollars" not in d
    assert d["n_steps"] == 60


def test_design_matrix_rendering(case_study):
    net = case_study.network
    text = render_design_matrix(net, DesignVector.from_bits(net, "10010100"))
    lines = text.splitlines()
    assert lines[0].split() == ["1", "2", "3", "4", "5"]
    cells = {}
    for line in lines[1:]:
        parts = line.split()
        i = int(parts[0])
        for j, val in zip(net.subregion_ids, parts[1:]):
            cells[(i, j)] = val
    candidates = set(net.candidate_pairs)
    built = {(1, 2), (2, 3), (3, 4)}
    for i in net.subregion_ids:
        for j in net.subregion_ids:
            pair = (min(i, j), max(i, j))
            if i == j or pair not in candidates:
                assert cells[(i, j)] == "x", (i, j)
            elif pair in built:
                assert cells[(i, j)] == "1", (i, j)
            else:
                assert cells[(i, j)] == "0", (i, j)
            assert cells[(i, j)] == cells[(j, i)]


def test_sweep_exports(tmp_path):
    sc = load_scenario(TRIANGLE)
    sweep = budget_sweep(Evaluator(sc), seed=2, method="exhaustive")
    d = sweep_dict(sweep)
    assert [r["budget_dollars"] for r in d["rows"]] == [0.0, 10e6, 20e6]
    csv_path = tmp_path / "sweep.csv"
    write_sweep_csv(sweep, csv_path)
    rows = list(csv.reader(open(csv_path)))
    assert rows[0] == [
        "Budget ($)",
        "Design",
        "Construction cost ($)",
        "Average accumulations (veh)",
        "Average travel completion flow (veh/h)",
        "TTS (veh h)",
    ]
    assert len(rows) == 1 + 3
    assert float(rows[1][0]) == 0.0
    table = format_sweep_table(sweep)
    head, dashes, *body = table.splitlines()
    assert "Average accumulations (veh)" in head
    assert set(dashes) <= {"-", " "}
    assert len(body) == 3


def test_trace_csv(tmp_path):
    sc = load_scenario(TRIANGLE)
    from mixroad import pso_optimize

    res = pso_optimize(Evaluator(sc), budget=20e6, seed=1)
    path = tmp_path / "trace.csv"
    write_trace_csv(res, path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["iteration", "best_tts_veh_h"]
    assert len(rows) == 1 + len(res.trace)
    assert [int(r[0]) for r in rows[1:]] == list(range(len(res.trace)))


def test_export_results_dispatch(tmp_path, triangle_run):
    sc, res = triangle_run
    export_results(res, "csv", tmp_path / "a.csv")
    export_results(res, "json", tmp_path / "a.json")
    assert (tmp_path / "a.csv").exists() and (tmp_path / "a.json").exists()
    sweep = budget_sweep(Evaluator(sc), seed=1, method="exhaustive")
    export_results(sweep, "json", tmp_path / "s.json")
    assert json.loads(open(tmp_path / "s.json").read())["method"] == "exhaustive"
    with pytest.raises(ValueError):
        export_results(res, "yaml", tmp_path / "a.yaml")
    with pytest.raises(ValueError):
        export_results(sweep, "svg", tmp_path / "s.svg")
    with pytest.raises(TypeError):
        export_results({"not": "a result"}, "json", tmp_path / "x.json")


def test_svg_export(tmp_path, triangle_run):
    pytest.importorskip("matplotlib")
    _, res = triangle_run
    path = tmp_path / "plot.svg"
    export_results(res, "svg", path)
    content = path.read_text()
    assert content.lstrip().startswith("<?xml")
    assert "svg" in content[:400]


# -- command line -------------------------------------------------------


def test_cli_validate(capsys):
    assert main(["validate", TRIANGLE]) == 0
    out = capsys.readouterr().out
    assert "OK (3 subregions, 2 candidate pairs, 60 steps of 10 s)" in out


def test_cli_validate_with_params(capsys):
    assert main(["validate", TRIANGLE, "--params", "mu=0.002", "Ts=5"]) == 0
    assert "120 steps of 5 s" in capsys.readouterr().out


def test_cli_routes(capsys):
    assert main(["routes", TRIANGLE, "--od", "1,3", "--design", "11"]) == 0
    out = capsys.readouterr().out
    assert "1 -> 3" in out
    assert "1 -> E1-2 -> 2 -> E2-3 -> 3" in out
    assert "routes for od (1, 3) under design 11" in out


def test_cli_simulate_writes_outputs(tmp_path, capsys):
    out_dir = tmp_path / "simout"
    code = main(
        ["simulate", TRIANGLE, "--design", "01", "--out", str(out_dir)]
    )
    assert code == 0
    text = capsys.readouterr().out
    assert "cost $7,500,000" in text
    assert (out_dir / "summary.json").exists()
    assert (out_dir / "trajectory.csv").exists()
    data = json.loads((out_dir / "summary.json").read_text())
    assert data["design_bits"] == "01"
    assert data["cost_dollars"] == 7.5e6


def test_cli_optimize_exhaustive_agreement(tmp_path, capsys):
    out_dir = tmp_path / "opt"
    code = main(
        [
            "optimize",
            TRIANGLE,
            "--budget",
            "20000000",
            "--seed",
            "4",
            "--exhaustive",
            "--out",
            str(out_dir),
        ]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "pso matches the exhaustive optimum" in out
    report = json.loads((out_dir / "report.json").read_text())
    assert report["agreement"] is True
    assert report["pso"]["design_bits"] == report["exhaustive"]["design_bits"]
    assert (out_dir / "trace.csv").exists()


def test_cli_sweep_deterministic_bytes(tmp_path, capsys):
    args = ["sweep", TRIANGLE, "--seed", "9"]
    a_dir, b_dir = tmp_path / "a", tmp_path / "b"
    assert main(args + ["--out", str(a_dir)]) == 0
    assert main(args + ["--out", str(b_dir)]) == 0
    capsys.readouterr()
    assert (a_dir / "sweep.json").read_bytes() == (b_dir / "sweep.json").read_bytes()
    assert (a_dir / "sweep.csv").read_bytes() == (b_dir / "sweep.csv").read_bytes()


def test_cli_error_exit_codes(tmp_path, capsys):
    # Unknown scenario file -> input error.
    assert main(["validate", str(tmp_path / "ghost.scn")]) == 3
    assert "ghost.scn" in capsys.readouterr().err
    # Wrong design width -> input error.
    assert main(["simulate", TRIANGLE, "--design", "1111"]) == 3
    # Bad --params syntax -> input error.
    assert main(["validate", TRIANGLE, "--params", "mu0.005"]) == 3
    # Argparse usage problems -> exit code 2.
    with pytest.raises(SystemExit) as exc:
        main(["simulate", TRIANGLE])  # --design is required
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_cli_infeasible_budget_is_runtime_error(capsys):
    # Negative budget cannot be repaired -> optimizer failure -> 4.
    assert main(["optimize", TRIANGLE, "--budget", "-5", "--seed", "1"]) == 4
    assert capsys.readouterr().err != ""
