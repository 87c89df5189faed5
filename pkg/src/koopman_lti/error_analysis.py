"""Error system between the exact LPV model and a constant-B surrogate.

With a shared ``(A, C)`` pair the lifted approximation error
``e_k = z_k - z_hat_k`` obeys

    e+ = A e + (B_z(z, u) - B_hat) u,    eps = C e,    e_0 = 0.

This module rolls that recursion out, evaluates the closed-form amplitude
bound  ``||e_k||_2 <= beta ||u||_inf / (1 - sigma_bar(A))``  (valid when the
largest singular value of A is below one, with ``beta`` the worst deviation
of the scheduled input matrix from ``B_hat`` over the operating box), and
checks dissipation inequalities of synthesis certificates along trajectories.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass

import numpy as np

from .lifting import KoopmanLpvModel, LtiKoopmanModel, simulate_lifted
from .lmi_synthesis import SchedulingGrid

__all__ = [
    "spectral_radius",
    "max_singular_value",
    "beta",
    "amplitude_bound",
    "ErrorBound",
    "ErrorTrace",
    "error_trajectory",
    "dissipation_check",
]


def spectral_radius(A: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(np.asarray(A, dtype=float)))))


def max_singular_value(A: np.ndarray) -> float:
    return float(np.linalg.svd(np.asarray(A, dtype=float), compute_uv=False)[0])


def _spectral_norms(diff: np.ndarray) -> np.ndarray:
    # diff: (M, n_f, n_u); spectral norm per point (2-norm of the column
    # when n_u == 1)
    if diff.shape[2] == 1:
        return np.linalg.norm(diff[:, :, 0], axis=1)
    return np.linalg.svd(diff, compute_uv=False)[:, 0]


def _refined_axis(value: float, ax) -> np.ndarray:
    # quarter-step samples one coarse step around `value`, clipped to the
    # axis RANGE so endpoints dropped by lattice sampling stay reachable
    lo = max(ax.lo, value - ax.step)
    hi = min(ax.hi, value + ax.step)
    n = max(1, int(round((hi - lo) / (ax.step / 4.0))))
    return np.linspace(lo, hi, n + 1)


def beta(grid: SchedulingGrid, b_hat: np.ndarray, refine: bool = True) -> float:
    """Worst ``||B(x, u) - B_hat||_2`` over the operating box.

    Coarse maximum over the grid's cached B-values, then (when the grid
    carries its axis specs) one local refinement pass at quarter-step
    spacing around the best few coarse points.
    """
    b_hat = np.asarray(b_hat, dtype=float).reshape(grid.b_values.shape[1:])
    norms = _spectral_norms(grid.b_values - b_hat)
    best = float(norms.max())
    if not refine or grid.spec is None:
        return best
    model = grid.model
    axes = list(grid.spec.x_axes) + list(grid.spec.u_axes)
    n_x = len(grid.spec.x_axes)
    top = np.argsort(norms)[-5:]
    seen: set[tuple] = set()
    for k in top:
        point = np.concatenate([grid.xs[k], grid.us[k]])
        key = tuple(np.round(point, 12))
        if key in seen:
            continue
        seen.add(key)
        local_axes = [_refined_axis(point[i], axes[i]) for i in range(len(axes))]
        for combo in itertools.product(*local_axes):
            x = np.asarray(combo[:n_x])
            u = np.asarray(combo[n_x:])
            diff = model.input_matrix_at(x, u) - b_hat
            val = float(_spectral_norms(diff[None])[0])
            if val > best:
                best = val
    return best


def amplitude_bound(beta_value: float, sigma_bar: float, u_inf: float) -> float | None:
    """``beta * ||u||_inf / (1 - sigma_bar)``; None when sigma_bar >= 1."""
    if sigma_bar >= 1.0:
        return None
    return beta_value * u_inf / (1.0 - sigma_bar)


@dataclass(frozen=True)
class ErrorBound:
    """Amplitude-bound ingredients for one ``B_hat``.

    ``gamma_amp`` is defined iff ``sigma_bar < 1`` and then equals
    ``beta * u_inf / (1 - sigma_bar)``.
    """

    beta: float
    sigma_bar: float
    rho: float
    u_inf: float
    gamma_amp: float | None

    @classmethod
    def compute(
        cls, grid: SchedulingGrid, b_hat: np.ndarray, u_inf: float, refine: bool = True
    ) -> "ErrorBound":
        A = grid.model.A
        b = beta(grid, b_hat, refine=refine)
        sigma = max_singular_value(A)
        return cls(
            beta=b,
            sigma_bar=sigma,
            rho=spectral_radius(A),
            u_inf=float(u_inf),
            gamma_amp=amplitude_bound(b, sigma, float(u_inf)),
        )


@dataclass(frozen=True)
class ErrorTrace:
    """Lifted error trajectory: ``e`` (N+1, n_f), ``eps = C e`` (N+1, n_x)."""

    e: np.ndarray
    eps: np.ndarray

    def __post_init__(self) -> None:
        e = np.asarray(self.e, dtype=float)
        eps = np.asarray(self.eps, dtype=float)
        if e.ndim != 2 or eps.ndim != 2 or e.shape[0] != eps.shape[0]:
            raise ValueError("e and eps must be 2-D with matching lengths")
        if e.shape[0] < 1 or float(np.max(np.abs(e[0]))) != 0.0:
            raise ValueError("error trajectories start at e_0 = 0")
        object.__setattr__(self, "e", e)
        object.__setattr__(self, "eps", eps)

    @property
    def norms(self) -> np.ndarray:
        """``||e_k||_2`` per step."""
        return np.linalg.norm(self.e, axis=1)

    def to_csv(self, path, bound: float | None) -> None:
        """Rows ``k,norm_e,bound`` with a constant bound column."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k", "norm_e", "bound"])
            bound_cell = "" if bound is None else f"{bound:.12g}"
            for k, n in enumerate(self.norms):
                writer.writerow([str(k), f"{n:.12g}", bound_cell])


def error_trajectory(
    lpv: KoopmanLpvModel, lti: LtiKoopmanModel, z0: np.ndarray, u_seq: np.ndarray
) -> ErrorTrace:
    """Exact error recursion along the LPV trajectory from shared ``z0``.

    Requires the two models to share ``A`` and ``C`` (otherwise the error
    system above does not describe their difference).  Identical within
    1e-12 is enforced.
    """
    if not (
        np.allclose(lpv.A, lti.A, rtol=0.0, atol=1e-12)
        and np.allclose(lpv.C, lti.C, rtol=0.0, atol=1e-12)
    ):
        raise ValueError("LPV and LTI models must share A and C to form an error system")
    u_seq = np.asarray(u_seq, dtype=float)
    if u_seq.ndim == 1:
        u_seq = u_seq.reshape(-1, lti.B_hat.shape[1])
    z = simulate_lifted(lpv, z0, u_seq)
    n_f = lpv.A.shape[0]
    e = np.zeros((u_seq.shape[0] + 1, n_f))
    for k in range(u_seq.shape[0]):
        dB = lpv.B_z(z[k], u_seq[k]) - lti.B_hat
        e[k + 1] = lpv.A @ e[k] + dB @ u_seq[k]
    return ErrorTrace(e=e, eps=e @ lpv.C.T)


def dissipation_check(
    trace: ErrorTrace,
    u_seq: np.ndarray,
    x_cert: np.ndarray,
    gamma: float,
    criterion: str,
) -> float:
    """Worst violation of the certificate's dissipation inequality.

    For each step the inequality is ``V(e+) - V(e) <= s(u, eps)`` with

    - l2: ``V = e^T (gamma X^-1) e``, ``s = gamma^2 ||u||^2 - ||eps||^2``
    - h2: ``V = e^T X^-1 e``,         ``s = gamma ||u||^2``

    Returns ``max_k (V_{k+1} - V_k - s_k)``; certified trajectories whose
    scheduling stays inside the gridded box keep this at roundoff level.
    """
    u_seq = np.asarray(u_seq, dtype=float)
    if u_seq.ndim == 1:
        u_seq = u_seq.reshape(-1, 1)
    if u_seq.shape[0] + 1 != trace.e.shape[0]:
        raise ValueError(
            f"input sequence length {u_seq.shape[0]} does not match trace length "
            f"{trace.e.shape[0]} - 1"
        )
    X = np.asarray(x_cert, dtype=float)
    P = np.linalg.inv(X)
    P = 0.5 * (P + P.T)
    if criterion == "l2":
        P = gamma * P
        supply = gamma**2 * np.sum(u_seq**2, axis=1) - np.sum(trace.eps[:-1] ** 2, axis=1)
    elif criterion == "h2":
        supply = gamma * np.sum(u_seq**2, axis=1)
    else:
        raise ValueError(f"unknown criterion {criterion!r}, expected 'l2' or 'h2'")
    V = np.einsum("ki,ij,kj->k", trace.e, P, trace.e)
    return float(np.max(V[1:] - V[:-1] - supply))
