"""Observable dictionaries, Koopman lifting, and the exact LPV lifted model.

For a dictionary of observables ``phi`` that is invariant under the drift
(``phi(f(x))`` lies in the span of ``phi``) and recovers the state linearly
(``x = C phi(x)``), the lifted dynamics of a control-affine system are exact:

    phi(x+) = A phi(x) + B(x, u) u

where ``A`` is the transposed Koopman matrix of the drift and ``B(x, u)`` is
an averaged-Jacobian input matrix obtained by integrating ``dphi/dx`` along
the segment from ``f(x)`` to ``f(x) + g(x) u``.  Treating ``B`` as a function
of the lifted state gives a linear parameter-varying (LPV) model whose
scheduling variable is ``(z, u)`` itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .dynamics import NonlinearSystem, NumericOverflowError

__all__ = [
    "LiftError",
    "InvarianceViolationError",
    "StateRecoveryError",
    "RankDeficiencyError",
    "ObservableDictionary",
    "KoopmanLpvModel",
    "LtiKoopmanModel",
    "lift",
    "koopman_A",
    "input_matrix",
    "lpv_model",
    "simulate_lifted",
    "simulate_lti",
    "builtin_example_dictionary",
]


class LiftError(RuntimeError):
    """Observable evaluation failed (wrong shape or non-finite values)."""


class InvarianceViolationError(RuntimeError):
    """The dictionary is not invariant under the drift within tolerance.

    Carries the measured residual in ``residual``.
    """

    def __init__(self, residual: float, tol: float):
        self.residual = residual
        self.tol = tol
        super().__init__(
            f"dictionary not invariant under the drift: residual {residual:.3e} "
            f"exceeds tolerance {tol:.1e} (pass force=True to continue anyway)"
        )


class StateRecoveryError(RuntimeError):
    """``C phi(x)`` does not reproduce ``x`` within tolerance."""


class RankDeficiencyError(RuntimeError):
    """Lifted data matrix is rank deficient; carries the numerical rank."""

    def __init__(self, rank: int, needed: int):
        self.rank = rank
        super().__init__(
            f"lifted grid matrix has numerical rank {rank}, need {needed}; "
            "enlarge or re-sample the regression grid"
        )


@dataclass(frozen=True)
class ObservableDictionary:
    """Dictionary of observables with linear state recovery.

    Parameters
    ----------
    n_f : int
        Number of observables (lifted dimension).
    phi : callable
        ``(n_x,) -> (n_f,)`` observable map.
    C : np.ndarray, shape (n_x, n_f)
        State-recovery matrix; ``C phi(x) = x`` must hold on the domain.
    jacobian : callable, optional
        Analytic ``(n_x,) -> (n_f, n_x)`` Jacobian of ``phi``.  When omitted,
        :meth:`jac` falls back to central differences with per-component step
        ``max(1e-6, 1e-6 |x_i|)``.
    """

    n_f: int
    phi: Callable[[np.ndarray], np.ndarray]
    C: np.ndarray
    jacobian: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self) -> None:
        C = np.asarray(self.C, dtype=float)
        if C.ndim != 2 or C.shape[1] != self.n_f:
            raise ValueError(f"C has shape {C.shape}, expected (n_x, {self.n_f})")
        object.__setattr__(self, "C", C)

    @property
    def n_x(self) -> int:
        return self.C.shape[0]

    def jac(self, x: np.ndarray) -> np.ndarray:
        """Jacobian of ``phi`` at ``x`` (analytic when available, else FD)."""
        x = np.asarray(x, dtype=float).reshape(-1)
        if self.jacobian is not None:
            J = np.asarray(self.jacobian(x), dtype=float)
            if J.shape != (self.n_f, x.shape[0]):
                raise LiftError(f"jacobian has shape {J.shape}, expected ({self.n_f}, {x.shape[0]})")
            return J
        J = np.empty((self.n_f, x.shape[0]))
        for i in range(x.shape[0]):
            h = max(1e-6, 1e-6 * abs(x[i]))
            xp, xm = x.copy(), x.copy()
            xp[i] += h
            xm[i] -= h
            J[:, i] = (lift(self, xp) - lift(self, xm)) / (2.0 * h)
        return J


def lift(dictionary: ObservableDictionary, x: np.ndarray) -> np.ndarray:
    """Evaluate ``z = phi(x)``.

    Raises
    ------
    LiftError
        On wrong output shape or non-finite components (named in the message).
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    z = np.asarray(dictionary.phi(x), dtype=float).reshape(-1)
    if z.shape != (dictionary.n_f,):
        raise LiftError(f"phi(x) has shape {z.shape}, expected ({dictionary.n_f},)")
    if not np.all(np.isfinite(z)):
        bad = np.flatnonzero(~np.isfinite(z)).tolist()
        raise LiftError(f"phi(x) component(s) {bad} non-finite at x={x}")
    return z


def _default_state_grid(system: NonlinearSystem, n: int = 100, seed: int = 0) -> np.ndarray:
    """Deterministic uniform sample of the state domain, shape (n, n_x)."""
    return system.x_domain.sample(np.random.default_rng(seed), n)


def koopman_A(
    dictionary: ObservableDictionary,
    system: NonlinearSystem,
    mode: str = "regression",
    grid: np.ndarray | None = None,
    A: np.ndarray | None = None,
    invariance_tol: float = 1e-8,
    force: bool = False,
    rank_tol: float | None = None,
) -> tuple[np.ndarray, float]:
    """Transposed Koopman matrix of the drift, with its invariance residual.

    Modes
    -----
    ``"regression"``
        Least-squares fit of ``phi(f(x)) = A phi(x)`` over a state grid
        (default: 100 uniform domain samples, seed 0).  The lifted grid
        matrix must have full numerical rank.
    ``"analytic"``
        ``A`` is supplied by the caller; only the residual is computed.

    Returns
    -------
    (A, residual)
        ``residual`` is the worst-case ``||phi(f(x)) - A phi(x)||_2`` over
        the grid.  If it exceeds ``invariance_tol`` and ``force`` is False,
        :class:`InvarianceViolationError` is raised: the dictionary does not
        span its own drift image and no exact lifted model exists.
    """
    if grid is None:
        grid = _default_state_grid(system)
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 2 or grid.shape[1] != system.n_x or grid.shape[0] < 1:
        raise ValueError(f"grid has shape {grid.shape}, expected (M >= 1, {system.n_x})")
    Z = np.column_stack([lift(dictionary, x) for x in grid])
    Z_next = np.column_stack([lift(dictionary, system.f(x)) for x in grid])

    if mode == "regression":
        if rank_tol is None:
            rank_tol = np.finfo(float).eps * max(Z.shape)
        s = np.linalg.svd(Z, compute_uv=False)
        rank = int(np.sum(s > rank_tol * s[0])) if s.size else 0
        if rank < dictionary.n_f:
            raise RankDeficiencyError(rank, dictionary.n_f)
        A_est = Z_next @ np.linalg.pinv(Z, rcond=rank_tol)
    elif mode == "analytic":
        if A is None:
            raise ValueError("analytic mode requires the A matrix")
        A_est = np.asarray(A, dtype=float)
        if A_est.shape != (dictionary.n_f, dictionary.n_f):
            raise ValueError(f"A has shape {A_est.shape}, expected ({dictionary.n_f}, {dictionary.n_f})")
    else:
        raise ValueError(f"unknown mode {mode!r}, expected 'regression' or 'analytic'")

    residual = float(np.max(np.linalg.norm(Z_next - A_est @ Z, axis=0))) if grid.size else 0.0
    if residual > invariance_tol and not force:
        raise InvarianceViolationError(residual, invariance_tol)
    return A_est, residual


@lru_cache(maxsize=None)
def _gauss_legendre_01(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes/weights transformed from [-1, 1] to [0, 1]."""
    if n < 1:
        raise ValueError(f"quad_nodes must be >= 1, got {n}")
    t, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (t + 1.0), 0.5 * w


def input_matrix(
    dictionary: ObservableDictionary,
    system: NonlinearSystem,
    x: np.ndarray,
    u: np.ndarray,
    quad_nodes: int = 8,
) -> np.ndarray:
    """Exact lifted input matrix ``B(x, u)``, shape ``(n_f, n_u)``.

    Evaluates the line integral of the observable Jacobian along the segment
    from ``f(x)`` to ``f(x) + g(x) u``,

        B(x, u) = (integral_0^1 dphi/dx(f(x) + lam g(x) u) dlam) g(x),

    by Gauss-Legendre quadrature with ``quad_nodes`` nodes.  The quadrature
    is exact whenever the Jacobian entries are polynomials in ``lam`` of
    degree <= 2*quad_nodes - 1, which covers polynomial dictionaries of the
    corresponding degree.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    u = np.asarray(u, dtype=float).reshape(-1)
    fx = np.asarray(system.f(x), dtype=float)
    gx = np.asarray(system.g(x), dtype=float)
    gu = gx @ u
    nodes, weights = _gauss_legendre_01(quad_nodes)
    J_avg = np.zeros((dictionary.n_f, system.n_x))
    for lam, w in zip(nodes, weights):
        try:
            J_avg += w * dictionary.jac(fx + lam * gu)
        except LiftError as exc:
            raise LiftError(f"jacobian evaluation failed at lambda={lam:.6f}: {exc}") from exc
    return J_avg @ gx


@dataclass(frozen=True)
class KoopmanLpvModel:
    """Exact LPV model ``z+ = A z + B_z(z, u) u`` of a lifted system.

    ``B_z(z, u)`` equals the exact input matrix evaluated at the recovered
    state ``x = C z``; the scheduling variable is therefore ``(z, u)``.
    """

    A: np.ndarray
    C: np.ndarray
    dictionary: ObservableDictionary
    system: NonlinearSystem
    quad_nodes: int
    invariance_residual: float

    @property
    def n_f(self) -> int:
        return self.A.shape[0]

    def input_matrix_at(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        """``B`` at a state-space point (bypasses the z -> x recovery)."""
        return input_matrix(self.dictionary, self.system, x, u, self.quad_nodes)

    def B_z(self, z: np.ndarray, u: np.ndarray) -> np.ndarray:
        """Scheduled input matrix at lifted state ``z``."""
        z = np.asarray(z, dtype=float).reshape(-1)
        return self.input_matrix_at(self.C @ z, u)


@dataclass(frozen=True)
class LtiKoopmanModel:
    """Constant-input-matrix surrogate ``z+ = A z + B_hat u``, ``x = C z``."""

    A: np.ndarray
    B_hat: np.ndarray
    C: np.ndarray

    def __post_init__(self) -> None:
        A = np.asarray(self.A, dtype=float)
        B = np.asarray(self.B_hat, dtype=float)
        C = np.asarray(self.C, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"A must be square, got {A.shape}")
        if B.ndim != 2 or B.shape[0] != A.shape[0]:
            raise ValueError(f"B_hat has shape {B.shape}, expected ({A.shape[0]}, n_u)")
        if C.ndim != 2 or C.shape[1] != A.shape[0]:
            raise ValueError(f"C has shape {C.shape}, expected (n_x, {A.shape[0]})")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B_hat", B)
        object.__setattr__(self, "C", C)


def lpv_model(
    dictionary: ObservableDictionary,
    system: NonlinearSystem,
    quad_nodes: int = 8,
    mode: str = "regression",
    grid: np.ndarray | None = None,
    A: np.ndarray | None = None,
    invariance_tol: float = 1e-8,
    force: bool = False,
) -> KoopmanLpvModel:
    """Build the exact LPV lifted model, validating its two preconditions.

    Raises
    ------
    InvarianceViolationError
        If the drift leaves the dictionary span (residual > invariance_tol).
    StateRecoveryError
        If ``C phi(x) != x`` on sampled domain points.
    """
    if dictionary.n_x != system.n_x:
        raise ValueError(f"dictionary n_x {dictionary.n_x} != system n_x {system.n_x}")
    A_est, residual = koopman_A(
        dictionary, system, mode=mode, grid=grid, A=A,
        invariance_tol=invariance_tol, force=force,
    )
    for x in _default_state_grid(system, n=50, seed=1):
        z = lift(dictionary, x)
        err = float(np.max(np.abs(dictionary.C @ z - x)))
        if err > 1e-10 * (1.0 + float(np.max(np.abs(x)))):
            raise StateRecoveryError(
                f"C phi(x) differs from x by {err:.3e} at x={x}; "
                "the dictionary must contain the state observables"
            )
    return KoopmanLpvModel(
        A=A_est, C=dictionary.C, dictionary=dictionary, system=system,
        quad_nodes=quad_nodes, invariance_residual=residual,
    )


def simulate_lifted(model: KoopmanLpvModel, z0: np.ndarray, u_seq: np.ndarray) -> np.ndarray:
    """Roll the exact LPV model forward; returns lifted states (N+1, n_f).

    ``z0`` must be consistent with a state-space point: ``phi(C z0) = z0``
    within 1e-8 (relative).  This catches initial conditions outside the
    lifted manifold, for which the model has no exactness guarantee.
    """
    z0 = np.asarray(z0, dtype=float).reshape(-1)
    if z0.shape != (model.n_f,):
        raise ValueError(f"z0 has shape {z0.shape}, expected ({model.n_f},)")
    z_check = lift(model.dictionary, model.C @ z0)
    err = float(np.max(np.abs(z_check - z0)))
    if err > 1e-8 * (1.0 + float(np.max(np.abs(z0)))):
        raise StateRecoveryError(
            f"z0 is not on the lifted manifold: phi(C z0) differs by {err:.3e}"
        )
    u_seq = np.asarray(u_seq, dtype=float)
    if u_seq.ndim == 1:
        u_seq = u_seq.reshape(-1, model.system.n_u)
    traj = np.empty((u_seq.shape[0] + 1, model.n_f))
    traj[0] = z0
    for k in range(u_seq.shape[0]):
        B = model.B_z(traj[k], u_seq[k])
        traj[k + 1] = model.A @ traj[k] + B @ u_seq[k]
        if not np.all(np.isfinite(traj[k + 1])):
            raise NumericOverflowError(f"lifted state non-finite at step {k}")
    return traj


def simulate_lti(model: LtiKoopmanModel, z0: np.ndarray, u_seq: np.ndarray) -> np.ndarray:
    """Roll the constant-B surrogate forward; returns lifted states (N+1, n_f)."""
    z0 = np.asarray(z0, dtype=float).reshape(-1)
    n_f = model.A.shape[0]
    if z0.shape != (n_f,):
        raise ValueError(f"z0 has shape {z0.shape}, expected ({n_f},)")
    u_seq = np.asarray(u_seq, dtype=float)
    if u_seq.ndim == 1:
        u_seq = u_seq.reshape(-1, model.B_hat.shape[1])
    traj = np.empty((u_seq.shape[0] + 1, n_f))
    traj[0] = z0
    for k in range(u_seq.shape[0]):
        traj[k + 1] = model.A @ traj[k] + model.B_hat @ u_seq[k]
        if not np.all(np.isfinite(traj[k + 1])):
            raise NumericOverflowError(f"lifted state non-finite at step {k}")
    return traj


def builtin_example_dictionary() -> ObservableDictionary:
    """Dictionary ``phi(x) = [x1, x2, x1^2]`` for the builtin example system.

    Invariant under the example drift for every parameter choice, with
    ``C = [I_2  0]`` recovering the state from the first two observables.
    """

    def phi(x: np.ndarray) -> np.ndarray:
        return np.array([x[0], x[1], x[0] ** 2])

    def jacobian(x: np.ndarray) -> np.ndarray:
        return np.array([[1.0, 0.0], [0.0, 1.0], [2.0 * x[0], 0.0]])

    return ObservableDictionary(
        n_f=3,
        phi=phi,
        C=np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]),
        jacobian=jacobian,
    )
