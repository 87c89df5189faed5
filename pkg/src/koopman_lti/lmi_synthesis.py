"""Gridded LMI synthesis of constant lifted input matrices with gain certificates.

Given the exact LPV lifted model ``z+ = A z + B_z(z, u) u`` (see lifting),
choose a constant ``B_hat`` so the error system

    e+ = A e + (B_z - B_hat) u,    eps = C e,    e_0 = 0

has a small certified gain.  Two criteria are supported:

- l2:  induced l2 gain level gamma, supply rate gamma^2 ||u||^2 - ||eps||^2
- h2:  energy-to-peak level gamma, supply rate gamma ||u||^2

Both are enforced by affine matrix inequalities over a grid of scheduling
points with per-point input matrices ``B_k``.  Because each inequality is
affine in ``B_k``, the min eigenvalue over a convex family is attained at a
vertex: reducing the grid to the convex hull of its B-value cloud is exact,
not an approximation, and is the default workflow for large grids.

Strict inequalities are realized as ``>= margin * I`` with a small
A-scaled margin.  Synthesis results always carry an independently checked
certificate: the LMIs are re-evaluated by eigenvalue at a slightly inflated
gamma before anything is returned.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .lifting import KoopmanLpvModel
from .sdp_solver import (
    BlockFamily,
    SdpProblem,
    SdpSolution,
    SolverOptions,
    VarLayout,
    min_eig_margin,
    solve,
)

__all__ = [
    "UnstableSystemError",
    "InfeasibleProblemError",
    "CertificateError",
    "AxisSpec",
    "GridSpec",
    "SchedulingGrid",
    "SolverStats",
    "SynthesisResult",
    "make_grid",
    "subsample",
    "reduce_constraints",
    "default_margin",
    "assemble_l2",
    "assemble_h2",
    "synthesize",
    "analyze",
    # re-exported solver types: the problem objects returned by the
    # assemblers are ordinary SdpProblem instances
    "BlockFamily",
    "SdpProblem",
    "SdpSolution",
    "SolverOptions",
    "VarLayout",
    "min_eig_margin",
]


class InfeasibleProblemError(RuntimeError):
    """The synthesis LMIs admit no solution at any level searched."""


class UnstableSystemError(InfeasibleProblemError):
    """The lifted A matrix is not Schur stable; no finite gain exists."""


class CertificateError(RuntimeError):
    """A solver result failed independent certificate validation."""


@dataclass(frozen=True)
class AxisSpec:
    """Uniform samples ``lo, lo+step, ...`` of one grid axis.

    The upper endpoint is appended when it is more than half a step beyond
    the last lattice point, so both endpoints are represented within half a
    step in every case.
    """

    lo: float
    hi: float
    step: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.lo) and np.isfinite(self.hi) and np.isfinite(self.step)):
            raise ValueError("axis bounds and step must be finite")
        if self.step <= 0:
            raise ValueError(f"axis step must be positive, got {self.step}")
        if self.lo > self.hi:
            raise ValueError(f"empty axis range [{self.lo}, {self.hi}]")

    def samples(self) -> np.ndarray:
        n = int(np.floor((self.hi - self.lo) / self.step + 1e-9))
        pts = self.lo + self.step * np.arange(n + 1)
        if self.hi - pts[-1] > 0.5 * self.step + 1e-12 * (1.0 + abs(self.hi)):
            pts = np.append(pts, self.hi)
        return pts


@dataclass(frozen=True)
class GridSpec:
    """Cartesian grid: one AxisSpec per state axis and per input axis."""

    x_axes: tuple[AxisSpec, ...]
    u_axes: tuple[AxisSpec, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "x_axes", tuple(self.x_axes))
        object.__setattr__(self, "u_axes", tuple(self.u_axes))
        if not self.x_axes or not self.u_axes:
            raise ValueError("grid needs at least one state axis and one input axis")


@dataclass(frozen=True)
class SchedulingGrid:
    """Scheduling points with cached per-point input matrices.

    ``xs`` (M, n_x), ``us`` (M, n_u), ``b_values`` (M, n_f, n_u) with
    ``b_values[k] = B(xs[k], us[k])`` for the model the grid was built from.
    Construction spot-checks the cache against the model on a few points so
    a stale or foreign cache fails fast.
    """

    xs: np.ndarray
    us: np.ndarray
    b_values: np.ndarray
    model: KoopmanLpvModel
    spec: GridSpec | None = None

    def __post_init__(self) -> None:
        xs = np.asarray(self.xs, dtype=float)
        us = np.asarray(self.us, dtype=float)
        b = np.asarray(self.b_values, dtype=float)
        if xs.ndim != 2 or us.ndim != 2 or b.ndim != 3:
            raise ValueError("xs, us must be 2-D and b_values 3-D")
        M = xs.shape[0]
        if us.shape[0] != M or b.shape[0] != M or M < 1:
            raise ValueError(
                f"inconsistent grid sizes: xs {xs.shape}, us {us.shape}, b {b.shape}"
            )
        if b.shape[1:] != (self.model.n_f, us.shape[1]):
            raise ValueError(
                f"b_values have shape {b.shape[1:]}, expected ({self.model.n_f}, {us.shape[1]})"
            )
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "us", us)
        object.__setattr__(self, "b_values", b)
        for k in np.unique(np.linspace(0, M - 1, num=min(5, M)).astype(int)):
            expect = self.model.input_matrix_at(xs[k], us[k])
            if not np.allclose(b[k], expect, atol=1e-10, rtol=1e-10):
                raise ValueError(
                    f"cached input matrix at grid point {k} disagrees with the model "
                    f"(max diff {np.max(np.abs(b[k] - expect)):.3e})"
                )

    @property
    def size(self) -> int:
        return self.xs.shape[0]

    @property
    def n_u(self) -> int:
        return self.us.shape[1]

    def take(self, indices: np.ndarray) -> "SchedulingGrid":
        """Sub-grid at the given point indices (cache rows carried along)."""
        idx = np.asarray(indices, dtype=int)
        return SchedulingGrid(
            xs=self.xs[idx], us=self.us[idx], b_values=self.b_values[idx],
            model=self.model, spec=self.spec,
        )


def make_grid(model: KoopmanLpvModel, spec: GridSpec) -> SchedulingGrid:
    """Cartesian scheduling grid with input matrices evaluated at each point.

    Axis counts must match the system dimensions and every sample must lie
    inside the system's operating domains.
    """
    system = model.system
    if len(spec.x_axes) != system.n_x:
        raise ValueError(f"grid has {len(spec.x_axes)} state axes, system has {system.n_x}")
    if len(spec.u_axes) != system.n_u:
        raise ValueError(f"grid has {len(spec.u_axes)} input axes, system has {system.n_u}")
    axes = [ax.samples() for ax in spec.x_axes] + [ax.samples() for ax in spec.u_axes]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.column_stack([m.reshape(-1) for m in mesh])
    xs, us = pts[:, : system.n_x], pts[:, system.n_x :]
    if not system.x_domain.contains(xs, atol=1e-9) or not system.u_domain.contains(us, atol=1e-9):
        raise ValueError("grid samples fall outside the system operating domain")
    b_values = np.empty((pts.shape[0], model.n_f, system.n_u))
    for k in range(pts.shape[0]):
        b_values[k] = model.input_matrix_at(xs[k], us[k])
    return SchedulingGrid(xs=xs, us=us, b_values=b_values, model=model, spec=spec)


def subsample(grid: SchedulingGrid, n: int, seed: int) -> SchedulingGrid:
    """Uniform random sub-grid of ``n`` points without replacement (seeded)."""
    if n < 1 or n > grid.size:
        raise ValueError(f"subsample size {n} not in [1, {grid.size}]")
    if n == grid.size:
        return grid
    idx = np.sort(np.random.default_rng(seed).choice(grid.size, size=n, replace=False))
    return grid.take(idx)


def reduce_constraints(grid: SchedulingGrid) -> SchedulingGrid:
    """Keep only grid points whose B-values are convex-hull vertices.

    The constraint blocks are affine in ``B_k``, so the minimum eigenvalue
    over the full B-value family equals the minimum over the vertices of its
    convex hull: reduction is exact.  The cloud is deduplicated and projected
    onto its affine span first (it is usually rank deficient); degenerate
    clouds (a point, a segment) reduce to their extreme points directly.  If
    the hull computation fails, the grid is returned unreduced with a warning.
    """
    flat = np.ascontiguousarray(grid.b_values.reshape(grid.size, -1))
    uniq, first_idx = np.unique(flat, axis=0, return_index=True)
    center = uniq.mean(axis=0)
    D = uniq - center
    U, s, Vt = np.linalg.svd(D, full_matrices=False)
    tol = max(D.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0)
    rank = int(np.sum(s > tol))
    if rank == 0:
        keep = first_idx[:1]
    elif rank == 1:
        coord = D @ Vt[0]
        keep = first_idx[np.unique([int(np.argmin(coord)), int(np.argmax(coord))])]
    else:
        coords = D @ Vt[:rank].T
        if uniq.shape[0] <= rank + 1:
            keep = first_idx
        else:
            try:
                hull = ConvexHull(coords)
            except QhullError as exc:
                warnings.warn(
                    f"convex hull reduction failed ({exc}); keeping all constraints",
                    RuntimeWarning,
                    stacklevel=2,
                )
                return grid
            keep = first_idx[hull.vertices]
    return grid.take(np.sort(keep))


def default_margin(A: np.ndarray) -> float:
    """Margin used to realize strict inequalities: 1e-7 * (1 + ||A||_F)."""
    return 1e-7 * (1.0 + float(np.linalg.norm(A, ord="fro")))


def _sym_basis(layout: VarLayout) -> list[np.ndarray]:
    mats = []
    for i, j in layout.sym_indices():
        S = np.zeros((layout.n_sym, layout.n_sym))
        S[i, j] = 1.0
        S[j, i] = 1.0
        mats.append(S)
    return mats


def _check_stable(A: np.ndarray) -> None:
    rho = float(np.max(np.abs(np.linalg.eigvals(A))))
    if rho >= 1.0:
        raise UnstableSystemError(
            f"spectral radius {rho:.6f} >= 1: the error system has no finite gain"
        )


def _level_hint(A, C, b_values, b_ref) -> float | None:
    sigma = float(np.linalg.svd(A, compute_uv=False)[0])
    if sigma >= 1.0:
        return None
    worst = float(np.max(np.linalg.norm(b_values - b_ref, axis=(1, 2))))
    normC = float(np.linalg.svd(C, compute_uv=False)[0])
    return 2.0 * worst * normC / (1.0 - sigma) + 1.0


def _grid_f0(b_eff: np.ndarray, s: int, n_f: int, col0: int) -> np.ndarray:
    M = b_eff.shape[0]
    n_u = b_eff.shape[2]
    F0 = np.zeros((M, s, s))
    F0[:, :n_f, col0 : col0 + n_u] = b_eff
    F0[:, col0 : col0 + n_u, :n_f] = np.swapaxes(b_eff, 1, 2)
    return F0


def assemble_l2(
    A: np.ndarray,
    C: np.ndarray,
    grid: SchedulingGrid,
    margin: float | None = None,
    b_hat_fixed: np.ndarray | None = None,
) -> SdpProblem:
    """Induced-l2 synthesis LMIs as a block SDP.

    Variables are (X symmetric, B_hat, gamma) packed by VarLayout; passing
    ``b_hat_fixed`` folds B_hat into the constants (analysis mode).  Per grid
    point k the constraint is the 4x4 block matrix (sizes n_f, n_f, n_u, n_x)

        [X,            A X,   B_k - B_hat,  0    ]
        [X A^T,        X,     0,            X C^T]
        [(B_k-B_hat)^T 0,     gamma I,      0    ]
        [0,            C X,   0,            gamma I]  >= margin I,

    plus the shared block ``X >= margin I``.  Minimizing gamma subject to
    these certifies the induced l2 gain of the error system at level gamma
    (supply rate gamma^2 ||u||^2 - ||eps||^2 with storage e^T (gamma X^-1) e).
    """
    A = np.asarray(A, dtype=float)
    C = np.asarray(C, dtype=float)
    _check_stable(A)
    n_f, n_u, n_x = A.shape[0], grid.n_u, C.shape[0]
    if C.shape[1] != n_f or grid.b_values.shape[1] != n_f:
        raise ValueError("A, C, and grid dimensions are inconsistent")
    if margin is None:
        margin = default_margin(A)
    s = 2 * n_f + n_u + n_x
    layout = VarLayout(n_sym=n_f, b_shape=None if b_hat_fixed is not None else (n_f, n_u))
    m = layout.num_vars
    r1, r2 = slice(0, n_f), slice(n_f, 2 * n_f)
    ru = slice(2 * n_f, 2 * n_f + n_u)
    rx = slice(2 * n_f + n_u, s)

    coeffs = np.zeros((m, s, s))
    for idx, S in enumerate(_sym_basis(layout)):
        F = coeffs[idx]
        F[r1, r1] = S
        F[r1, r2] = A @ S
        F[r2, r1] = S @ A.T
        F[r2, r2] = S
        F[r2, rx] = S @ C.T
        F[rx, r2] = C @ S
    if b_hat_fixed is None:
        pos = layout.n_sym_vars
        for c in range(n_u):
            for r in range(n_f):
                coeffs[pos, r, 2 * n_f + c] = -1.0
                coeffs[pos, 2 * n_f + c, r] = -1.0
                pos += 1
    gidx = layout.gamma_index
    coeffs[gidx, ru, ru] = np.eye(n_u)
    coeffs[gidx, rx, rx] = np.eye(n_x)

    b_eff = grid.b_values
    b_ref = b_eff.mean(axis=0)
    if b_hat_fixed is not None:
        b_hat_fixed = np.asarray(b_hat_fixed, dtype=float).reshape(n_f, n_u)
        b_eff = b_eff - b_hat_fixed
        b_ref = b_hat_fixed
    grid_family = BlockFamily(f0=_grid_f0(b_eff, s, n_f, 2 * n_f), coeffs=coeffs)

    x_coeffs = np.zeros((m, n_f, n_f))
    for idx, S in enumerate(_sym_basis(layout)):
        x_coeffs[idx] = S
    x_family = BlockFamily(f0=np.zeros((1, n_f, n_f)), coeffs=x_coeffs)

    objective = np.zeros(m)
    objective[gidx] = 1.0
    return SdpProblem(
        objective=objective,
        families=(grid_family, x_family),
        margin=margin,
        layout=layout,
        level_hint=_level_hint(A, C, grid.b_values, b_ref),
        tag="l2",
    )


def assemble_h2(
    A: np.ndarray,
    C: np.ndarray,
    grid: SchedulingGrid,
    margin: float | None = None,
    b_hat_fixed: np.ndarray | None = None,
) -> SdpProblem:
    """Energy-to-peak synthesis LMIs as a block SDP.

    Per grid point k the 3x3 block matrix (sizes n_f, n_f, n_u)

        [X,             A X,  B_k - B_hat]
        [X A^T,         X,    0          ]
        [(B_k-B_hat)^T, 0,    gamma I    ]  >= margin I,

    the shared output block ``[[X, X C^T], [C X, gamma I]] >= margin I``,
    and ``X >= margin I``.  Minimizing gamma certifies the energy-to-peak
    gain at level gamma (supply rate gamma ||u||^2, storage e^T X^-1 e).
    """
    A = np.asarray(A, dtype=float)
    C = np.asarray(C, dtype=float)
    _check_stable(A)
    n_f, n_u, n_x = A.shape[0], grid.n_u, C.shape[0]
    if C.shape[1] != n_f or grid.b_values.shape[1] != n_f:
        raise ValueError("A, C, and grid dimensions are inconsistent")
    if margin is None:
        margin = default_margin(A)
    s = 2 * n_f + n_u
    layout = VarLayout(n_sym=n_f, b_shape=None if b_hat_fixed is not None else (n_f, n_u))
    m = layout.num_vars
    r1, r2 = slice(0, n_f), slice(n_f, 2 * n_f)
    ru = slice(2 * n_f, s)

    coeffs = np.zeros((m, s, s))
    for idx, S in enumerate(_sym_basis(layout)):
        F = coeffs[idx]
        F[r1, r1] = S
        F[r1, r2] = A @ S
        F[r2, r1] = S @ A.T
        F[r2, r2] = S
    if b_hat_fixed is None:
        pos = layout.n_sym_vars
        for c in range(n_u):
            for r in range(n_f):
                coeffs[pos, r, 2 * n_f + c] = -1.0
                coeffs[pos, 2 * n_f + c, r] = -1.0
                pos += 1
    gidx = layout.gamma_index
    coeffs[gidx, ru, ru] = np.eye(n_u)

    so = n_f + n_x
    out_coeffs = np.zeros((m, so, so))
    for idx, S in enumerate(_sym_basis(layout)):
        F = out_coeffs[idx]
        F[:n_f, :n_f] = S
        F[:n_f, n_f:] = S @ C.T
        F[n_f:, :n_f] = C @ S
    out_coeffs[gidx, n_f:, n_f:] = np.eye(n_x)

    b_eff = grid.b_values
    b_ref = b_eff.mean(axis=0)
    if b_hat_fixed is not None:
        b_hat_fixed = np.asarray(b_hat_fixed, dtype=float).reshape(n_f, n_u)
        b_eff = b_eff - b_hat_fixed
        b_ref = b_hat_fixed
    grid_family = BlockFamily(f0=_grid_f0(b_eff, s, n_f, 2 * n_f), coeffs=coeffs)
    out_family = BlockFamily(f0=np.zeros((1, so, so)), coeffs=out_coeffs)

    x_coeffs = np.zeros((m, n_f, n_f))
    for idx, S in enumerate(_sym_basis(layout)):
        x_coeffs[idx] = S
    x_family = BlockFamily(f0=np.zeros((1, n_f, n_f)), coeffs=x_coeffs)

    objective = np.zeros(m)
    objective[gidx] = 1.0
    return SdpProblem(
        objective=objective,
        families=(grid_family, out_family, x_family),
        margin=margin,
        layout=layout,
        level_hint=_level_hint(A, C, grid.b_values, b_ref),
        tag="h2",
    )


@dataclass(frozen=True)
class SolverStats:
    iterations: int
    feasibility_margin: float
    wall_time_s: float


@dataclass(frozen=True)
class SynthesisResult:
    criterion: str
    gamma: float
    b_hat: np.ndarray
    x_cert: np.ndarray
    stats: SolverStats


def _solve_validated(problem: SdpProblem, options: SolverOptions | None):
    """Run the solver and validate the certificate independently."""
    if problem.layout is None:
        raise ValueError("problem must come from assemble_l2/assemble_h2")
    start = time.perf_counter()
    sol = solve(problem, options)
    elapsed = time.perf_counter() - start
    if sol.status == "infeasible":
        raise InfeasibleProblemError(f"no feasible gain level found: {sol.message}")
    if sol.status != "optimal":
        raise CertificateError(f"solver returned status {sol.status}: {sol.message}")
    X, B_hat, gamma = problem.layout.unpack(sol.y)
    if float(np.linalg.eigvalsh(X)[0]) <= 0.0:
        raise CertificateError("certificate matrix X is not positive definite")
    y_infl = sol.y.copy()
    y_infl[problem.layout.gamma_index] = gamma * (1.0 + 1e-6)
    slack = min_eig_margin(y_infl, problem)
    if slack < -1e-8:
        raise CertificateError(
            f"certificate fails independent validation: margin {slack:.3e} at "
            f"gamma * (1 + 1e-6)"
        )
    stats = SolverStats(
        iterations=sol.iterations, feasibility_margin=sol.min_block_eig, wall_time_s=elapsed
    )
    return gamma, B_hat, X, stats


def synthesize(problem: SdpProblem, options: SolverOptions | None = None) -> SynthesisResult:
    """Minimize the gain level over (X, B_hat, gamma) and certify the result.

    Raises InfeasibleProblemError when no level is feasible and
    CertificateError when the solver's output does not independently verify.
    """
    gamma, B_hat, X, stats = _solve_validated(problem, options)
    if B_hat is None:
        raise ValueError("problem has a fixed B_hat; use analyze for analysis problems")
    return SynthesisResult(
        criterion=problem.tag or "l2", gamma=gamma, b_hat=B_hat, x_cert=X, stats=stats
    )


def analyze(
    A: np.ndarray,
    C: np.ndarray,
    b_hat: np.ndarray,
    grid: SchedulingGrid,
    criterion: str,
    margin: float | None = None,
    options: SolverOptions | None = None,
) -> tuple[float, np.ndarray]:
    """Smallest certified gain level of a FIXED ``b_hat`` over the grid.

    Returns ``(gamma, X_cert)``; same validation as synthesize.
    """
    if criterion == "l2":
        problem = assemble_l2(A, C, grid, margin=margin, b_hat_fixed=b_hat)
    elif criterion == "h2":
        problem = assemble_h2(A, C, grid, margin=margin, b_hat_fixed=b_hat)
    else:
        raise ValueError(f"unknown criterion {criterion!r}, expected 'l2' or 'h2'")
    gamma, _, X, _ = _solve_validated(problem, options)
    return gamma, X
