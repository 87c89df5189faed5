import json

import numpy as np
import pytest

from koopman_lti.sdp_solver import (
    BlockFamily,
    SdpProblem,
    SolverOptions,
    VarLayout,
    feasibility,
    min_eig_margin,
    solve,
)


def two_by_two_gamma_problem():
    # gamma * I + [[0, 3], [3, 0]] >= 0, eigenvalues gamma +/- 3.
    fam = BlockFamily(
        f0=np.array([[[0.0, 3.0], [3.0, 0.0]]]),
        coeffs=np.array([[[1.0, 0.0], [0.0, 1.0]]]),
    )
    return SdpProblem(objective=np.array([1.0]), families=(fam,), margin=0.0)


def test_bisection_on_offdiagonal_toy():
    res = solve(two_by_two_gamma_problem(), SolverOptions(obj_tol=1e-8))
    assert res.status == "optimal"
    assert abs(res.objective_value - 3.0) <= 1e-6
    lo, hi = res.bracket
    assert lo <= res.objective_value <= hi


def test_constant_negative_block_infeasible():
    fam = BlockFamily(f0=np.array([[[-1.0]]]), coeffs=np.zeros((1, 1, 1)))
    res = solve(SdpProblem(objective=np.array([1.0]), families=(fam,), margin=0.0))
    assert res.status == "infeasible"


def test_unbounded_margin_capped():
    fam = BlockFamily(f0=np.array([[[0.0]]]), coeffs=np.array([[[1.0]]]))
    res = feasibility(SdpProblem(objective=np.zeros(1), families=(fam,), margin=0.0))
    assert res.status == "optimal"
    assert res.objective_value == pytest.approx(1e6)
    assert "capped" in res.message


def test_feasibility_of_constant_pd_block():
    fam = BlockFamily(f0=np.array([np.diag([1.0, 3.0])]), coeffs=np.zeros((0, 2, 2)))
    res = feasibility(SdpProblem(objective=np.zeros(0), families=(fam,), margin=0.0))
    assert res.status == "optimal"
    assert res.objective_value == pytest.approx(1.0, abs=1e-6)


def test_max_eigenvalue_via_bisection():
    rng = np.random.default_rng(2)
    M = rng.standard_normal((4, 4))
    M = 0.5 * (M + M.T)
    lam_max = np.linalg.eigvalsh(M)[-1]
    fam = BlockFamily(f0=-M[None], coeffs=np.eye(4)[None])
    res = solve(
        SdpProblem(objective=np.array([1.0]), families=(fam,), margin=0.0),
        SolverOptions(obj_tol=1e-9),
    )
    assert res.status == "optimal"
    assert abs(res.objective_value - lam_max) <= 1e-7


def test_two_variable_epigraph_path():
    # min y1 + 2 y2 s.t. y1 >= 1, y2 >= 2: mixed objective forces the
    # epigraph block instead of single-variable folding.
    fam = BlockFamily(
        f0=np.array([np.diag([-1.0, -2.0])]),
        coeffs=np.stack([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]),
    )
    res = solve(
        SdpProblem(objective=np.array([1.0, 2.0]), families=(fam,), margin=0.0),
        SolverOptions(obj_tol=1e-8),
    )
    assert res.status == "optimal"
    assert abs(res.objective_value - 5.0) <= 1e-5
    assert np.allclose(res.y, [1.0, 2.0], atol=1e-4)


def test_margin_respected_at_optimum():
    margin = 9.5e-7
    fam = BlockFamily(f0=np.array([[[0.0]]]), coeffs=np.array([[[1.0]]]))
    res = solve(
        SdpProblem(objective=np.array([1.0]), families=(fam,), margin=margin),
        SolverOptions(obj_tol=1e-9),
    )
    assert res.status == "optimal"
    assert res.objective_value >= margin - 1e-9
    assert res.objective_value <= margin + 1e-7


def test_min_eig_margin_checker_matches_eigvalsh():
    rng = np.random.default_rng(5)
    f0 = rng.standard_normal((3, 4, 4))
    f0 = 0.5 * (f0 + np.transpose(f0, (0, 2, 1)))
    coeffs = rng.standard_normal((2, 4, 4))
    coeffs = 0.5 * (coeffs + np.transpose(coeffs, (0, 2, 1)))
    fam = BlockFamily(f0=f0, coeffs=coeffs)
    prob = SdpProblem(objective=np.zeros(2), families=(fam,), margin=0.3)
    y = rng.standard_normal(2)
    blocks = f0 + np.tensordot(y, coeffs, axes=1)
    expect = min(np.linalg.eigvalsh(b)[0] for b in blocks) - 0.3
    assert min_eig_margin(y, prob) == pytest.approx(expect, abs=1e-12)


def test_block_family_requires_symmetry():
    with pytest.raises(ValueError):
        BlockFamily(f0=np.array([[[0.0, 1.0], [0.0, 0.0]]]), coeffs=np.zeros((0, 2, 2)))
    # asymmetry below the validation tolerance is averaged away, not rejected
    mild = BlockFamily(
        f0=np.array([[[1.0, 1e-12], [0.0, 1.0]]]), coeffs=np.zeros((0, 2, 2))
    )
    assert np.array_equal(mild.f0[0], mild.f0[0].T)
    assert mild.f0[0, 0, 1] == pytest.approx(5e-13, abs=1e-15)


def test_fix_variable_folds_into_constant():
    rng = np.random.default_rng(6)
    f0 = rng.standard_normal((2, 3, 3))
    f0 = 0.5 * (f0 + np.transpose(f0, (0, 2, 1)))
    coeffs = rng.standard_normal((3, 3, 3))
    coeffs = 0.5 * (coeffs + np.transpose(coeffs, (0, 2, 1)))
    prob = SdpProblem(
        objective=np.array([0.0, 0.0, 1.0]),
        families=(BlockFamily(f0=f0, coeffs=coeffs),),
        margin=0.0,
    )
    fixed = prob.fix_variable(2, 1.7)
    y = np.array([0.4, -0.9])
    full = np.array([0.4, -0.9, 1.7])
    assert min_eig_margin(y, fixed) == pytest.approx(min_eig_margin(full, prob), abs=1e-12)


def test_with_epigraph_matches_manual_level_shift():
    prob = two_by_two_gamma_problem()
    lifted = prob.with_epigraph(4.0)
    assert lifted.num_vars == 1
    # at level 4 the constraint gamma = 4 block is PD with margin 1
    assert min_eig_margin(np.array([4.0]), prob) == pytest.approx(1.0)
    assert min_eig_margin(np.array([]), lifted.fix_variable(0, 4.0)) >= 0.0


def test_json_serialization_round_trip(tmp_path):
    prob = two_by_two_gamma_problem()
    d = prob.to_json_dict()
    assert d["m"] == 1
    assert d["c"] == [1.0]
    assert len(d["blocks"]) == 1
    assert d["blocks"][0]["size"] == 2
    # F has the constant term plus one coefficient matrix
    assert len(d["blocks"][0]["F"]) == 2
    path = tmp_path / "prob.json"
    prob.dump_json(path)
    assert json.loads(path.read_text()) == d


def test_var_layout_pack_unpack_round_trip():
    layout = VarLayout(n_sym=3, b_shape=(3, 1))
    rng = np.random.default_rng(8)
    X = rng.standard_normal((3, 3))
    X = 0.5 * (X + X.T)
    B = rng.standard_normal((3, 1))
    y = layout.pack(X, B, 2.5)
    assert y.shape == (layout.num_vars,)
    X2, B2, g2 = layout.unpack(y)
    assert np.allclose(X2, X)
    assert np.allclose(B2, B)
    assert g2 == 2.5


def test_solution_bracket_contains_objective():
    rng = np.random.default_rng(9)
    M = rng.standard_normal((3, 3))
    M = 0.5 * (M + M.T)
    fam = BlockFamily(f0=-M[None], coeffs=np.eye(3)[None])
    res = solve(
        SdpProblem(objective=np.array([1.0]), families=(fam,), margin=0.0),
        SolverOptions(obj_tol=1e-7),
    )
    lo, hi = res.bracket
    assert lo <= res.objective_value <= hi
    assert hi - lo <= 1e-6 * max(1.0, abs(hi)) + 1e-12
