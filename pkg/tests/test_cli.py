import json

import numpy as np
import pytest

from koopman_lti.cli import DEFAULT_CONFIG, ConfigError, RunConfig, main
from koopman_lti.lmi_synthesis import (
    AxisSpec,
    GridSpec,
    assemble_l2,
    make_grid,
    reduce_constraints,
)
from koopman_lti.sdp_solver import min_eig_margin

# Coarse grid override: keeps CLI runs fast while exercising the full path.
COARSE = [
    "--set",
    'grid.x=[[-2.5, 2.5, 0.5], [-10.0, 2.7, 2.0]]',
    "--set",
    'grid.u=[[-1.6, 2.1, 0.5]]',
]


def run(argv):
    return main(argv)


def test_run_config_defaults_round_trip():
    cfg = RunConfig.from_dict({})
    assert cfg.a1 == 0.7
    assert cfg.criterion == "both"
    assert cfg.x_axes == ((-2.5, 2.5, 0.05), (-10.0, 2.7, 0.25))
    assert cfg.noise_variance == 0.5


def test_run_config_rejects_unknown_keys():
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"grids": {}})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"solver": {"obj_tolerance": 1e-6}})


def test_run_config_validates_values():
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"grid": {"x": [[0.0, 1.0, 0.0], [-1.0, 1.0, 0.5]]}})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"noise": {"variance": -0.5}})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"criterion": "h-infinity"})


def test_grid_step_zero_exits_1(tmp_path, capsys):
    code = run(["simulate", "--out", str(tmp_path), "--set", "grid.x=[[0,1,0],[0,1,0.5]]"])
    assert code == 1
    assert "configuration error" in capsys.readouterr().err


def test_unknown_config_key_exits_1(tmp_path, capsys):
    code = run(["simulate", "--out", str(tmp_path), "--set", "grid.z=[[0,1,0.5]]"])
    assert code == 1


def test_simulate_deterministic_output(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert run(["simulate", "--out", str(out1), "--steps", "40"]) == 0
    assert run(["simulate", "--out", str(out2), "--steps", "40"]) == 0
    b1 = (out1 / "traj.csv").read_bytes()
    assert b1 == (out2 / "traj.csv").read_bytes()
    assert b1.startswith(b"k,x1,x2,u1")


def test_simulate_signal_forms(tmp_path):
    assert run(["simulate", "--out", str(tmp_path), "--steps", "5", "--signal", "constant:0.3"]) == 0
    rows = (tmp_path / "traj.csv").read_text().strip().splitlines()
    assert len(rows) == 7
    assert rows[1].split(",")[3] == "0.3"
    assert run(["simulate", "--out", str(tmp_path), "--steps", "5", "--signal", "sine:0.5"]) == 0
    assert run(["simulate", "--out", str(tmp_path), "--steps", "5", "--signal", "triangle"]) == 1


def test_edmd_internal_trajectory(tmp_path):
    assert run(["edmd", "--out", str(tmp_path), "--known-a"]) == 0
    data = json.loads((tmp_path / "edmd.json").read_text())
    assert set(data) == {"A", "B", "residual_fro"}
    A = np.array(data["A"])
    assert np.allclose(A, [[0.7, 0, 0], [0, 0.7, -0.5], [0, 0, 0.49]], atol=1e-9)
    assert abs(data["B"][0][0] - 1.0) <= 1e-6
    assert data["residual_fro"] > 0


def test_edmd_from_csv_round_trip(tmp_path):
    assert run(["simulate", "--out", str(tmp_path), "--steps", "100"]) == 0
    code = run(["edmd", "--out", str(tmp_path), "--traj", str(tmp_path / "traj.csv")])
    assert code == 0
    data = json.loads((tmp_path / "edmd.json").read_text())
    assert np.array(data["A"]).shape == (3, 3)
    assert np.array(data["B"]).shape == (3, 1)


def test_edmd_missing_trajectory_exits_1(tmp_path):
    assert run(["edmd", "--out", str(tmp_path), "--traj", str(tmp_path / "nope.csv")]) == 1


def test_invariance_violation_exits_3(tmp_path, capsys):
    code = run(["edmd", "--out", str(tmp_path), "--known-a", "--set", "invariance_tol=1e-20"])
    assert code == 3
    assert "invariance violation" in capsys.readouterr().err


def test_unstable_system_exits_2(tmp_path, capsys):
    code = run(["synth", "--out", str(tmp_path), *COARSE, "--set", "system.a1=1.5"])
    assert code == 2
    assert "infeasible" in capsys.readouterr().err


def test_synth_certificate_passes_independent_check(tmp_path, model):
    code = run(["synth", "--out", str(tmp_path), *COARSE, "--set", "criterion=l2"])
    assert code == 0
    entry = json.loads((tmp_path / "synthesis.json").read_text())["l2"]
    gamma = entry["gamma"]
    X = np.array(entry["x_cert"])
    B = np.array(entry["b_hat"])
    spec = GridSpec(
        x_axes=(AxisSpec(-2.5, 2.5, 0.5), AxisSpec(-10.0, 2.7, 2.0)),
        u_axes=(AxisSpec(-1.6, 2.1, 0.5),),
    )
    grid = reduce_constraints(make_grid(model, spec))
    problem = assemble_l2(model.A, model.C, grid)
    y = problem.layout.pack(X, B, gamma * (1.0 + 1e-6))
    assert min_eig_margin(y, problem) >= -1e-8


def test_analyze_and_bound_consume_bhat_file(tmp_path):
    bhat = tmp_path / "bhat.json"
    bhat.write_text(json.dumps({"h2": [[1.0], [3.9602], [-0.2157]]}))
    code = run([
        "analyze", "--out", str(tmp_path), "--bhat", str(bhat), *COARSE,
        "--set", "criterion=h2",
    ])
    assert code == 0
    analysis = json.loads((tmp_path / "analysis.json").read_text())
    assert analysis["h2"]["gamma_h2"] > 0
    assert np.array(analysis["h2"]["x_cert_h2"]).shape == (3, 3)

    code = run(["bound", "--out", str(tmp_path), "--bhat", str(bhat), *COARSE])
    assert code == 0
    bound = json.loads((tmp_path / "bound.json").read_text())
    assert bound["sigma_bar"] == pytest.approx(0.91655, abs=1e-4)
    assert bound["entries"]["h2"]["gamma_amp"] > 0


def test_bound_missing_bhat_exits_1(tmp_path):
    assert run(["bound", "--out", str(tmp_path), "--bhat", str(tmp_path / "nope.json"), *COARSE]) == 1


def test_reproduce_coarse_artifacts_and_determinism(tmp_path):
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    argv = ["reproduce-paper", *COARSE, "--subsample", "120"]
    assert run([*argv, "--out", str(out1)]) == 0
    assert run([*argv, "--out", str(out2)]) == 0
    names = [
        "table1.json", "bhat.json", "fig2_sim.csv", "fig3_err.csv",
        "fig4_constant.csv", "fig5_sine.csv",
    ]
    for name in names:
        assert (out1 / name).exists(), name
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name

    table = json.loads((out1 / "table1.json").read_text())
    assert set(table["rows"]) == {"l2_synth", "h2_synth", "edmd", "edmd_reference"}
    for row in table["rows"].values():
        assert set(row) == {
            "gamma_l2", "gamma_h2", "beta", "gamma_amp_per_unit_u", "gamma_amp_realized",
        }
    assert table["grid_points"] > 0

    header = (out1 / "fig2_sim.csv").read_text().splitlines()[0]
    assert header == "k,x1_nl,x2_nl,x1_lpv,x2_lpv"
    header3 = (out1 / "fig3_err.csv").read_text().splitlines()[0]
    assert header3.startswith("k,norm_e_l2,bound_l2,norm_e_h2,bound_h2")
    header4 = (out1 / "fig4_constant.csv").read_text().splitlines()[0]
    assert header4.startswith("k,u,x1_nl,x2_nl")


def test_seed_flag_accepted_for_subsample(tmp_path):
    out1, out2 = tmp_path / "s1", tmp_path / "s2"
    argv = ["synth", *COARSE, "--subsample", "60", "--set", "criterion=l2"]
    assert run([*argv, "--out", str(out1)]) == 0
    assert run([*argv, "--out", str(out2), "--seed", "5"]) == 0
    g1 = json.loads((out1 / "synthesis.json").read_text())["l2"]["gamma"]
    g2 = json.loads((out2 / "synthesis.json").read_text())["l2"]["gamma"]
    assert g1 > 0 and g2 > 0
