"""Extended dynamic mode decomposition on lifted snapshot data.

Three regression variants over snapshot matrices ``Z`` (lifted states),
``Z_plus`` (lifted successors), and ``U`` (inputs):

- autonomous:      ``A = Z_plus Z^+``
- with input:      ``[A  B] = Z_plus [Z; U]^+``
- known-A input:   ``B = (Z_plus - A Z) U^+``

``M^+`` denotes the SVD pseudoinverse with singular values below
``rank_tol * sigma_max`` truncated.  Every fit also reports the Frobenius
residual of the equation it solved; callers decide what residual is
acceptable, the fit itself never hides it.
"""

from __future__ import annotations

import warnings
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .dynamics import Trajectory
from .lifting import ObservableDictionary, lift

__all__ = [
    "RankDeficiencyWarning",
    "DataMatrices",
    "build_data_matrices",
    "default_rank_tol",
    "edmd_autonomous",
    "edmd_with_input",
    "edmd_input_known_A",
]


class RankDeficiencyWarning(UserWarning):
    """Snapshot matrix is numerically rank deficient; the fit is a minimum-norm choice."""


@dataclass(frozen=True)
class DataMatrices:
    """Column-snapshot data: ``Z`` (n_f, N), ``Z_plus`` (n_f, N), ``U`` (n_u, N)."""

    Z: np.ndarray
    Z_plus: np.ndarray
    U: np.ndarray

    def __post_init__(self) -> None:
        Z = np.asarray(self.Z, dtype=float)
        Zp = np.asarray(self.Z_plus, dtype=float)
        U = np.asarray(self.U, dtype=float)
        if Z.ndim != 2 or Zp.ndim != 2 or U.ndim != 2:
            raise ValueError("data matrices must be 2-D")
        if Z.shape != Zp.shape:
            raise ValueError(f"Z and Z_plus must be congruent, got {Z.shape} vs {Zp.shape}")
        if U.shape[1] != Z.shape[1]:
            raise ValueError(f"U has {U.shape[1]} snapshots, Z has {Z.shape[1]}")
        if Z.shape[1] < 1:
            raise ValueError("need at least one snapshot pair")
        object.__setattr__(self, "Z", Z)
        object.__setattr__(self, "Z_plus", Zp)
        object.__setattr__(self, "U", U)

    @property
    def n_f(self) -> int:
        return self.Z.shape[0]

    @property
    def n_samples(self) -> int:
        return self.Z.shape[1]


def build_data_matrices(
    trajectories: Trajectory | Sequence[Trajectory], dictionary: ObservableDictionary
) -> DataMatrices:
    """Lift one or more trajectories into pooled snapshot matrices.

    A single orbit of the example system spans only two modes, so recovering
    a 3-dim lifted A needs several initial conditions; pass a list to pool
    their transition pairs.  Raises ``ValueError`` for an empty trajectory or
    a dictionary whose state dimension does not match.
    """
    if isinstance(trajectories, Trajectory):
        trajectories = [trajectories]
    if not trajectories:
        raise ValueError("no trajectories given")
    zs, zps, us = [], [], []
    for traj in trajectories:
        if traj.length < 1:
            raise ValueError("trajectory has no transitions")
        if dictionary.n_x != traj.n_x:
            raise ValueError(
                f"dictionary expects {dictionary.n_x}-dim states, trajectory has {traj.n_x}"
            )
        zs.append(np.column_stack([lift(dictionary, x) for x in traj.states[:-1]]))
        zps.append(np.column_stack([lift(dictionary, x) for x in traj.states[1:]]))
        us.append(traj.inputs.T)
    return DataMatrices(
        Z=np.concatenate(zs, axis=1),
        Z_plus=np.concatenate(zps, axis=1),
        U=np.concatenate(us, axis=1),
    )


def default_rank_tol(matrix: np.ndarray) -> float:
    """Machine-epsilon rank tolerance scaled by the larger matrix dimension."""
    return float(np.finfo(float).eps * max(matrix.shape))


def _pinv(matrix: np.ndarray, rank_tol: float | None, what: str) -> np.ndarray:
    """SVD pseudoinverse with truncation at ``rank_tol * sigma_max``; warns on rank loss."""
    if rank_tol is None:
        rank_tol = default_rank_tol(matrix)
    s = np.linalg.svd(matrix, compute_uv=False)
    rank = int(np.sum(s > rank_tol * s[0])) if s.size and s[0] > 0 else 0
    if rank < min(matrix.shape):
        warnings.warn(
            f"{what} has numerical rank {rank} < {min(matrix.shape)}",
            RankDeficiencyWarning,
            stacklevel=3,
        )
    return np.linalg.pinv(matrix, rcond=rank_tol)


def edmd_autonomous(data: DataMatrices, rank_tol: float | None = None) -> tuple[np.ndarray, float]:
    """Fit ``Z_plus = A Z``; returns ``(A, residual_fro)``."""
    A = data.Z_plus @ _pinv(data.Z, rank_tol, "lifted snapshot matrix Z")
    residual = float(np.linalg.norm(data.Z_plus - A @ data.Z, ord="fro"))
    return A, residual


def edmd_with_input(
    data: DataMatrices, rank_tol: float | None = None
) -> tuple[np.ndarray, np.ndarray, float]:
    """Fit ``Z_plus = A Z + B U`` jointly; returns ``(A, B, residual_fro)``."""
    ZU = np.vstack([data.Z, data.U])
    AB = data.Z_plus @ _pinv(ZU, rank_tol, "stacked snapshot matrix [Z; U]")
    A, B = AB[:, : data.n_f], AB[:, data.n_f :]
    residual = float(np.linalg.norm(data.Z_plus - A @ data.Z - B @ data.U, ord="fro"))
    return A, B, residual


def edmd_input_known_A(
    data: DataMatrices, A: np.ndarray, rank_tol: float | None = None
) -> tuple[np.ndarray, float]:
    """Fit ``Z_plus - A Z = B U`` with ``A`` known; returns ``(B, residual_fro)``.

    This is the EDMD baseline used for comparison against LMI-synthesized
    input matrices: the exact ``A`` is kept and only ``B`` is regressed.
    """
    A = np.asarray(A, dtype=float)
    if A.shape != (data.n_f, data.n_f):
        raise ValueError(f"A has shape {A.shape}, expected ({data.n_f}, {data.n_f})")
    R = data.Z_plus - A @ data.Z
    B = R @ _pinv(data.U, rank_tol, "input snapshot matrix U")
    residual = float(np.linalg.norm(R - B @ data.U, ord="fro"))
    return B, residual
