import numpy as np
import pytest

from koopman_lti.dynamics import builtin_example, simulate, white_noise_input
from koopman_lti.lifting import (
    InvarianceViolationError,
    LtiKoopmanModel,
    ObservableDictionary,
    RankDeficiencyError,
    StateRecoveryError,
    builtin_example_dictionary,
    input_matrix,
    koopman_A,
    lift,
    lpv_model,
    simulate_lifted,
    simulate_lti,
)

A_TRUE = np.array([[0.7, 0.0, 0.0], [0.0, 0.7, -0.5], [0.0, 0.0, 0.49]])


def test_lift_values(dictionary):
    assert np.allclose(lift(dictionary, np.array([1.0, 1.0])), [1.0, 1.0, 1.0])
    assert np.allclose(lift(dictionary, np.array([-2.0, 0.5])), [-2.0, 0.5, 4.0])


def test_fd_jacobian_matches_analytic(dictionary):
    plain = ObservableDictionary(n_f=3, phi=dictionary.phi, C=dictionary.C)
    for x in ([0.3, -1.2], [2.0, 0.0], [-2.5, 2.7]):
        x = np.array(x)
        assert np.allclose(plain.jac(x), dictionary.jac(x), atol=1e-6)


def test_koopman_A_regression_recovers_analytic(dictionary, system):
    A, residual = koopman_A(dictionary, system, mode="regression")
    assert np.max(np.abs(A - A_TRUE)) <= 1e-12
    assert residual <= 1e-10


def test_koopman_A_analytic_mode_agrees(dictionary, system):
    A_reg, _ = koopman_A(dictionary, system, mode="regression")
    A_ana, residual = koopman_A(dictionary, system, mode="analytic", A=A_TRUE)
    assert np.allclose(A_reg, A_ana, atol=1e-12)
    assert residual <= 1e-10


def test_invariance_violation_for_truncated_dictionary(system):
    # Without the x1^2 observable the drift leaves the span.
    truncated = ObservableDictionary(
        n_f=2, phi=lambda x: np.array([x[0], x[1]]), C=np.eye(2)
    )
    with pytest.raises(InvarianceViolationError) as err:
        koopman_A(truncated, system)
    assert err.value.residual > 1e-8

    A, residual = koopman_A(truncated, system, force=True)
    assert A.shape == (2, 2)
    assert residual == err.value.residual


def test_rank_deficient_dictionary_rejected(system):
    dup = ObservableDictionary(
        n_f=2, phi=lambda x: np.array([x[0], x[0]]), C=np.array([[1.0, 0.0], [0.5, 0.5]])
    )
    with pytest.raises(RankDeficiencyError):
        koopman_A(dup, system)


def test_state_recovery_validated(system):
    # C picks [x1, x1^2]; the second state never comes back.
    broken = ObservableDictionary(
        n_f=3,
        phi=lambda x: np.array([x[0], x[1], x[0] ** 2]),
        C=np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]),
    )
    with pytest.raises(StateRecoveryError):
        lpv_model(broken, system)


def test_input_matrix_closed_form(model, dictionary, system):
    # B(x, u) = [1, x1^2, 1.4 x1 + u] for the example.
    for x1, x2, u in ((0.0, 0.0, 0.0), (1.0, -2.0, 0.5), (-2.5, 2.7, 2.1), (2.0, -9.0, -1.6)):
        expected = np.array([[1.0], [x1**2], [1.4 * x1 + u]])
        got = input_matrix(dictionary, system, np.array([x1, x2]), np.array([u]))
        assert np.allclose(got, expected, atol=1e-12)
        assert np.allclose(model.input_matrix_at(np.array([x1, x2]), np.array([u])), expected, atol=1e-12)


def test_input_matrix_quadrature_already_exact_at_two_nodes(dictionary, system):
    x, u = np.array([1.3, -0.7]), np.array([0.9])
    b2 = input_matrix(dictionary, system, x, u, quad_nodes=2)
    b8 = input_matrix(dictionary, system, x, u, quad_nodes=8)
    assert np.allclose(b2, b8, atol=1e-14)


def test_lpv_model_fields(model):
    assert np.allclose(model.A, A_TRUE, atol=1e-12)
    assert np.allclose(model.C, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    assert model.invariance_residual <= 1e-10


def test_lifted_one_step_matches_lifted_nonlinear_step(model, dictionary, system):
    z0 = lift(dictionary, np.array([1.0, 1.0]))
    z1 = simulate_lifted(model, z0, np.array([[0.5]]))[1]
    x1 = simulate(system, np.array([1.0, 1.0]), np.array([[0.5]])).states[1]
    assert np.allclose(z1, lift(dictionary, x1), atol=1e-14)
    assert np.allclose(z1, [1.2, 0.7, 1.44], atol=1e-14)


def test_lpv_simulation_recovers_nonlinear_states(model, dictionary, system):
    u = white_noise_input(300, variance=0.5, seed=0)
    traj = simulate(system, np.array([1.0, 1.0]), u)
    zs = simulate_lifted(model, lift(dictionary, np.array([1.0, 1.0])), u)
    err = np.max(np.linalg.norm(zs @ model.C.T - traj.states, axis=1))
    assert err <= 1e-8


def test_off_manifold_initial_condition_rejected(model):
    with pytest.raises(StateRecoveryError):
        simulate_lifted(model, np.array([1.0, 1.0, 5.0]), np.zeros((3, 1)))


def test_lti_one_step_with_h2_reference_values(model):
    b_h2 = np.array([[1.0], [3.9602], [-0.2157]])
    lti = LtiKoopmanModel(model.A, b_h2, model.C)
    z1 = simulate_lti(lti, np.array([1.0, 1.0, 1.0]), np.array([[1.0]]))[1]
    assert np.allclose(z1, [1.7, 4.1602, 0.2743], atol=1e-12)


def test_b_z_accepts_lifted_points(model, dictionary):
    z = lift(dictionary, np.array([0.8, -1.1]))
    direct = model.input_matrix_at(np.array([0.8, -1.1]), np.array([0.3]))
    assert np.allclose(model.B_z(z, np.array([0.3])), direct, atol=1e-14)
