"""Deterministic solver for linear-objective SDPs with many small blocks.

The problems handled here have the special shape produced by LMI synthesis:
a modest number of scalar variables ``y`` (tens), and families of small
affine constraint blocks

    F0[j] + sum_i y_i F_i  >=  margin * I       (j = 1..nb, possibly thousands)

where every block in a family shares the coefficient matrices ``F_i`` and
only the constant term ``F0[j]`` varies.  The objective ``c @ y`` is driven
to its minimum by bisection on the objective level; each level is decided by
a max-min-eigenvalue feasibility program

    maximize t  s.t.  F0[j] + sum_i y_i F_i - (margin + t) I >= 0

solved with a log-det barrier Newton method (path following in the barrier
weight).  Decisions are asymmetric on purpose: a level is declared feasible
only constructively (an iterate with achieved margin t > 0, verified by
Cholesky), and infeasible only with a duality-gap certificate; undecided
levels count as infeasible, so the returned level always carries an explicit
witness.  Everything is plain NumPy with no randomness: two runs on the same
problem produce identical iterates.

Bisection assumes level feasibility is monotone non-decreasing, which holds
for gain levels entering block diagonals (the only use in this package); for
a general objective the epigraph fallback is used, which is always monotone.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np

__all__ = [
    "BlockFamily",
    "VarLayout",
    "SdpProblem",
    "SdpSolution",
    "SolverOptions",
    "min_eig_margin",
    "feasibility",
    "solve",
]

Status = Literal["optimal", "infeasible", "max_iterations", "numerical_failure"]


def _symmetrize_checked(F: np.ndarray, what: str) -> np.ndarray:
    asym = float(np.max(np.abs(F - np.swapaxes(F, -1, -2)))) if F.size else 0.0
    scale = 1.0 + (float(np.max(np.abs(F))) if F.size else 0.0)
    if asym > 1e-10 * scale:
        raise ValueError(f"{what} not symmetric (asymmetry {asym:.3e})")
    return 0.5 * (F + np.swapaxes(F, -1, -2))


@dataclass(frozen=True)
class BlockFamily:
    """A family of affine constraint blocks sharing coefficient matrices.

    ``f0`` has shape (nb, s, s): one constant term per block.  ``coeffs``
    has shape (m, s, s): one symmetric coefficient matrix per variable,
    shared by every block of the family.
    """

    f0: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        f0 = np.asarray(self.f0, dtype=float)
        coeffs = np.asarray(self.coeffs, dtype=float)
        if f0.ndim == 2:
            f0 = f0[None, :, :]
        if f0.ndim != 3 or f0.shape[1] != f0.shape[2]:
            raise ValueError(f"f0 must be (nb, s, s), got {f0.shape}")
        if coeffs.ndim != 3 or coeffs.shape[1:] != f0.shape[1:]:
            raise ValueError(f"coeffs must be (m, {f0.shape[1]}, {f0.shape[2]}), got {coeffs.shape}")
        object.__setattr__(self, "f0", _symmetrize_checked(f0, "block constant term"))
        object.__setattr__(self, "coeffs", _symmetrize_checked(coeffs, "block coefficient"))

    @property
    def size(self) -> int:
        return self.f0.shape[1]

    @property
    def n_blocks(self) -> int:
        return self.f0.shape[0]

    @property
    def num_vars(self) -> int:
        return self.coeffs.shape[0]


@dataclass(frozen=True)
class VarLayout:
    """Packing of (symmetric X, optional B, gamma) into a flat variable vector.

    ``X`` (n_sym x n_sym, symmetric) occupies the leading entries in
    lower-triangular column-major order; ``B`` (if present) follows in
    column-major order; ``gamma`` is last.
    """

    n_sym: int
    b_shape: tuple[int, int] | None = None

    @property
    def n_sym_vars(self) -> int:
        return self.n_sym * (self.n_sym + 1) // 2

    @property
    def n_b_vars(self) -> int:
        return self.b_shape[0] * self.b_shape[1] if self.b_shape else 0

    @property
    def num_vars(self) -> int:
        return self.n_sym_vars + self.n_b_vars + 1

    @property
    def gamma_index(self) -> int:
        return self.num_vars - 1

    def sym_indices(self) -> list[tuple[int, int]]:
        """(row, col) pairs of the lower triangle, column-major."""
        return [(i, j) for j in range(self.n_sym) for i in range(j, self.n_sym)]

    def unpack(self, y: np.ndarray) -> tuple[np.ndarray, np.ndarray | None, float]:
        y = np.asarray(y, dtype=float).reshape(-1)
        if y.shape != (self.num_vars,):
            raise ValueError(f"y has shape {y.shape}, expected ({self.num_vars},)")
        X = np.zeros((self.n_sym, self.n_sym))
        for k, (i, j) in enumerate(self.sym_indices()):
            X[i, j] = X[j, i] = y[k]
        B = None
        if self.b_shape:
            B = y[self.n_sym_vars : self.n_sym_vars + self.n_b_vars].reshape(
                self.b_shape, order="F"
            ).copy()
        return X, B, float(y[self.gamma_index])

    def pack(self, X: np.ndarray, B: np.ndarray | None, gamma: float) -> np.ndarray:
        y = np.empty(self.num_vars)
        for k, (i, j) in enumerate(self.sym_indices()):
            y[k] = X[i, j]
        if self.b_shape:
            y[self.n_sym_vars : self.n_sym_vars + self.n_b_vars] = np.asarray(B).reshape(-1, order="F")
        y[self.gamma_index] = gamma
        return y


@dataclass(frozen=True)
class SdpProblem:
    """min ``objective @ y`` s.t. every block of every family >= margin * I.

    ``layout`` (optional) names the semantic variable slices for callers
    that assembled the problem; ``level_hint`` is a sound initial upper
    bound for the bisection bracket; ``tag`` is free-form caller metadata.
    """

    objective: np.ndarray
    families: tuple[BlockFamily, ...]
    margin: float = 0.0
    layout: VarLayout | None = None
    level_hint: float | None = None
    tag: str = ""

    def __post_init__(self) -> None:
        c = np.asarray(self.objective, dtype=float).reshape(-1)
        fams = tuple(self.families)
        if not fams:
            raise ValueError("problem needs at least one block family")
        for fam in fams:
            if fam.num_vars != c.shape[0]:
                raise ValueError(
                    f"family has {fam.num_vars} coefficient matrices, objective has {c.shape[0]}"
                )
        if not np.isfinite(self.margin) or self.margin < 0:
            raise ValueError(f"margin must be finite and >= 0, got {self.margin}")
        if self.layout is not None and self.layout.num_vars != c.shape[0]:
            raise ValueError(
                f"layout describes {self.layout.num_vars} variables, objective has {c.shape[0]}"
            )
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "families", fams)

    @property
    def num_vars(self) -> int:
        return self.objective.shape[0]

    @property
    def total_block_dim(self) -> int:
        return sum(f.n_blocks * f.size for f in self.families)

    def fix_variable(self, index: int, value: float) -> "SdpProblem":
        """Fold variable ``index`` at ``value`` into the constant terms."""
        if not 0 <= index < self.num_vars:
            raise IndexError(f"variable index {index} out of range [0, {self.num_vars})")
        keep = [i for i in range(self.num_vars) if i != index]
        fams = tuple(
            BlockFamily(
                f0=fam.f0 + value * fam.coeffs[index][None, :, :],
                coeffs=fam.coeffs[keep],
            )
            for fam in self.families
        )
        return replace(
            self, objective=self.objective[keep], families=fams, layout=None
        )

    def with_epigraph(self, level: float) -> "SdpProblem":
        """Append the 1x1 block ``level - objective @ y >= 0`` (margin-neutral)."""
        c = self.objective
        fam = BlockFamily(
            f0=np.array([[[level + self.margin]]]),
            coeffs=-c.reshape(-1, 1, 1),
        )
        return replace(self, families=self.families + (fam,))

    def to_json_dict(self) -> dict:
        blocks = []
        for fam in self.families:
            for b in range(fam.n_blocks):
                blocks.append(
                    {
                        "size": fam.size,
                        "F": [fam.f0[b].tolist()] + [F.tolist() for F in fam.coeffs],
                    }
                )
        return {
            "m": self.num_vars,
            "c": self.objective.tolist(),
            "margin": self.margin,
            "blocks": blocks,
        }

    def dump_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, sort_keys=True)


@dataclass(frozen=True)
class SdpSolution:
    """Solver outcome; ``min_block_eig`` is the independently measured worst
    constraint margin of ``y`` (eigenvalue minus problem margin)."""

    y: np.ndarray
    objective_value: float
    status: Status
    min_block_eig: float
    iterations: int
    bracket: tuple[float, float] | None = None
    message: str = ""


@dataclass(frozen=True)
class SolverOptions:
    feas_tol: float = 1e-8
    obj_tol: float = 1e-5  # relative width of the final bisection bracket
    max_iter: int = 200  # Newton iterations per feasibility subproblem
    level_lo: float = 0.0
    level_hi: float | None = None  # None: use the problem's level_hint
    level_cap: float = 1e9
    t_cap: float = 1e6
    chunk_size: int = 8192


def min_eig_margin(y: np.ndarray, problem: SdpProblem) -> float:
    """Smallest eigenvalue margin over all blocks at ``y``.

    Returns ``min_j lambda_min(F0[j] + sum_i y_i F_i) - margin``; a value
    > 0 certifies strict feasibility.  This is the independent checker used
    to validate solver output: it shares no state with the solver path.
    """
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.shape != (problem.num_vars,):
        raise ValueError(f"y has shape {y.shape}, expected ({problem.num_vars},)")
    worst = np.inf
    for fam in problem.families:
        Fy = np.tensordot(y, fam.coeffs, axes=(0, 0)) if problem.num_vars else 0.0
        for lo in range(0, fam.n_blocks, 65536):
            S = fam.f0[lo : lo + 65536] + Fy
            worst = min(worst, float(np.linalg.eigvalsh(S)[:, 0].min()))
    return worst - problem.margin


# ---------------------------------------------------------------------------
# phase 1: maximize the uniform eigenvalue margin t


@dataclass
class _Phase1Result:
    t: float  # best strictly verified margin (-inf if none)
    y: np.ndarray
    t_upper: float  # certified upper bound on t* (inf when not certified)
    decided: str  # "feasible" | "infeasible" | "converged" | "undecided"
    iterations: int


def _exact_phase1(problem: SdpProblem) -> _Phase1Result:
    # no free variables: the margin is a plain eigenvalue computation
    t = min_eig_margin(np.empty(0), problem)
    return _Phase1Result(t=t, y=np.empty(0), t_upper=t, decided="converged", iterations=0)


def _barrier_value(problem, v, tau, t_cap):
    """(value, ok): log-det barrier objective; ok False outside the domain."""
    m = problem.num_vars
    t = v[m]
    cap = t_cap - t
    if not np.all(np.isfinite(v)) or cap <= 0.0:
        return np.inf, False
    total = -tau * t - np.log(cap)
    shift = problem.margin + t
    y = v[:m]
    for fam in problem.families:
        Fy = np.tensordot(y, fam.coeffs, axes=(0, 0)) if m else np.zeros((fam.size, fam.size))
        shifted = Fy - shift * np.eye(fam.size)
        for lo in range(0, fam.n_blocks, 65536):
            S = fam.f0[lo : lo + 65536] + shifted
            try:
                L = np.linalg.cholesky(S)
            except np.linalg.LinAlgError:
                return np.inf, False
            diag = np.diagonal(L, axis1=-2, axis2=-1)
            if not np.all(diag > 0.0):
                return np.inf, False
            total -= 2.0 * float(np.log(diag).sum())
    if not np.isfinite(total):
        return np.inf, False
    return total, True


def _grad_hess(problem, v, tau, t_cap, chunk):
    """Gradient and Hessian of the barrier objective at a strictly feasible v."""
    m = problem.num_vars
    t = v[m]
    y = v[:m]
    g = np.zeros(m + 1)
    H = np.zeros((m + 1, m + 1))
    shift = problem.margin + t
    for fam in problem.families:
        coeffs = fam.coeffs
        Fy = np.tensordot(y, coeffs, axes=(0, 0)) if m else np.zeros((fam.size, fam.size))
        shifted = Fy - shift * np.eye(fam.size)
        for lo in range(0, fam.n_blocks, chunk):
            S = fam.f0[lo : lo + chunk] + shifted
            W = np.linalg.inv(S)
            W = 0.5 * (W + np.swapaxes(W, -1, -2))
            Wsum = W.sum(axis=0)
            W2sum = np.einsum("nab,nbc->ac", W, W, optimize=True)
            if m:
                g[:m] -= np.einsum("iab,ab->i", coeffs, Wsum, optimize=True)
                T = np.einsum("nab,ibc->inac", W, coeffs, optimize=True)
                H[:m, :m] += np.einsum("inab,jnba->ij", T, T, optimize=True)
                hyt = -np.einsum("iab,ab->i", coeffs, W2sum, optimize=True)
                H[:m, m] += hyt
                H[m, :m] += hyt
            g[m] += float(np.trace(Wsum))
            H[m, m] += float(np.trace(W2sum))
    cap = t_cap - t
    g[m] += -tau + 1.0 / cap
    H[m, m] += 1.0 / cap**2
    return g, H


def _newton_step(H, g):
    """Solve H d = -g with Jacobi scaling and a PD-enforcing jitter fallback.

    The diagonal rescaling keeps the factorization usable when variable
    scales differ by many orders of magnitude (binding blocks near the
    boundary produce such Hessians); returns (d, lam2).
    """
    diag = np.abs(np.diag(H))
    scale = 1.0 / np.sqrt(np.maximum(diag, 1e-300))
    Hs = H * scale[:, None] * scale[None, :]
    gs = g * scale
    jitter = 0.0
    for _ in range(8):
        try:
            L = np.linalg.cholesky(Hs + jitter * np.eye(Hs.shape[0]))
        except np.linalg.LinAlgError:
            jitter = max(jitter * 100.0, 1e-14)
            continue
        ds = -np.linalg.solve(L.T, np.linalg.solve(L, gs))
        d = ds * scale
        lam2 = float(-g @ d)
        if lam2 >= 0.0 and np.all(np.isfinite(d)):
            return d, lam2
        jitter = max(jitter * 100.0, 1e-14)
    return None, 0.0


def _phase1(
    problem: SdpProblem,
    y0: np.ndarray,
    *,
    t_cap: float,
    max_newton: int,
    tol_gap: float,
    chunk: int,
    stop_pos: float | None = None,
    stop_neg: float | None = None,
) -> _Phase1Result:
    """Barrier path following for the max-margin program.

    Early exits: any verified iterate with t > stop_pos decides "feasible";
    a centered iterate with t + gap < stop_neg decides "infeasible".
    """
    m = problem.num_vars
    if m == 0:
        r = _exact_phase1(problem)
        if stop_pos is not None and r.t > stop_pos:
            r.decided = "feasible"
        elif stop_neg is not None and r.t < stop_neg:
            r.decided = "infeasible"
        return r

    nu = problem.total_block_dim + 1  # +1: internal cap block
    start_margin = min_eig_margin(np.asarray(y0, dtype=float), problem)
    if stop_pos is not None and start_margin > stop_pos:
        # The warm start is already verified feasible; no Newton work needed.
        return _Phase1Result(
            t=min(start_margin, t_cap), y=np.asarray(y0, dtype=float).copy(),
            t_upper=np.inf, decided="feasible", iterations=0,
        )
    t0 = min(start_margin, 0.5 * t_cap) - 1.0
    v = np.concatenate([np.asarray(y0, dtype=float), [t0]])
    # Anchor the first centering stage at the start point: pick tau so the
    # t-gradient vanishes there, instead of letting a small tau drag the
    # iterate to a far-away center it must later crawl back from.
    g0, _ = _grad_hess(problem, v, 1.0, t_cap, chunk)
    tau = max(1.0, g0[m] + 1.0)
    tau_max = max(1e16, 20.0 * nu / max(tol_gap, 1e-14))
    lam_tol = 0.1  # Newton decrement target per centering stage

    # t is a strict lower bound on the true margin of the current y (the
    # slack block stays PD along accepted iterates), so tracking max t is
    # sound; periodic exact margin evaluations can only tighten it.
    best_t = t0
    best_y = v[:m].copy()
    used = 0

    def result(decided: str, t_upper: float) -> _Phase1Result:
        return _Phase1Result(t=best_t, y=best_y, t_upper=t_upper, decided=decided, iterations=used)

    def refresh_best() -> None:
        nonlocal best_t, best_y
        # Clamp at t_cap so unbounded-margin problems still report the cap.
        act = min(min_eig_margin(v[:m], problem), t_cap)
        if act > best_t:
            best_t = act
            best_y = v[:m].copy()

    while True:
        centered = False
        stalled = False
        for _ in range(max_newton):
            if used >= max_newton:
                break
            g, H = _grad_hess(problem, v, tau, t_cap, chunk)
            d, lam2 = _newton_step(H, g)
            if d is None:
                stalled = True
                break
            if 0.5 * lam2 <= lam_tol**2:
                centered = True
                break
            f_cur, _ = _barrier_value(problem, v, tau, t_cap)
            alpha = 1.0
            accepted = False
            while alpha > 1e-14:
                f_new, ok = _barrier_value(problem, v + alpha * d, tau, t_cap)
                if ok and f_new <= f_cur - 1e-4 * alpha * lam2:
                    accepted = True
                    break
                alpha *= 0.5
            if not accepted:
                stalled = True
                break
            v = v + alpha * d
            used += 1
            if v[m] > best_t:
                best_t = v[m]
                best_y = v[:m].copy()
            if used % 10 == 0:
                refresh_best()
            if stop_pos is not None and best_t > stop_pos:
                return result("feasible", np.inf)
        gap = 2.0 * nu / tau
        refresh_best()
        if stop_pos is not None and best_t > stop_pos:
            return result("feasible", np.inf)
        if centered:
            if stop_neg is not None and v[m] + gap < stop_neg:
                return result("infeasible", v[m] + gap)
            if gap <= tol_gap:
                return result("converged", v[m] + gap)
        if stalled or used >= max_newton or tau > tau_max:
            return result("undecided", np.inf)
        # Modest growth keeps each stage inside Newton's fast-convergence
        # region; larger jumps trigger long damped crawls on multi-family
        # problems.
        tau *= 3.0


def feasibility(
    problem: SdpProblem, options: SolverOptions | None = None, y0: np.ndarray | None = None
) -> SdpSolution:
    """Maximize the uniform eigenvalue margin t over all blocks.

    The problem is feasible (beyond its margin) iff the optimal t is > 0.
    ``objective_value`` reports the achieved t; unbounded margins are capped
    at ``options.t_cap`` and noted in the message.
    """
    opts = options or SolverOptions()
    if y0 is None:
        y0 = np.zeros(problem.num_vars)
    r = _phase1(
        problem,
        y0,
        t_cap=opts.t_cap,
        max_newton=opts.max_iter,
        tol_gap=max(opts.feas_tol, 1e-12),
        chunk=opts.chunk_size,
    )
    y = r.y
    margin = min_eig_margin(y, problem) if problem.num_vars else r.t
    capped = r.t >= 0.99 * opts.t_cap
    if r.decided == "converged" or capped:
        status: Status = "optimal"
    elif r.decided == "undecided":
        status = "max_iterations"
    else:
        status = "numerical_failure"
    message = f"margin capped at t_cap={opts.t_cap:g}" if capped else ""
    return SdpSolution(
        y=y,
        objective_value=r.t,
        status=status,
        min_block_eig=margin,
        iterations=r.iterations,
        message=message,
    )


def solve(problem: SdpProblem, options: SolverOptions | None = None) -> SdpSolution:
    """Minimize ``objective @ y`` subject to the block constraints.

    Bisection on the objective level: each candidate level is folded into
    the constant terms (single-variable objectives) or appended as an
    epigraph block, then decided by the phase-1 margin program.  The final
    level is re-centered to produce a well-interior witness ``y``.
    """
    opts = options or SolverOptions()
    c = problem.objective
    total_iters = 0

    if problem.num_vars == 0 or not np.any(c):
        # pure feasibility: no objective to bisect on
        res = feasibility(problem, opts)
        if res.status == "optimal" and res.min_block_eig <= 0.0:
            res = replace(res, status="infeasible")
        return replace(res, objective_value=0.0)

    nz = np.flatnonzero(c)
    folded = nz.size == 1 and c[nz[0]] > 0.0
    k = int(nz[0]) if folded else -1

    def level_problem(level: float) -> SdpProblem:
        if folded:
            return problem.fix_variable(k, level / c[k])
        return problem.with_epigraph(level)

    def full_y(y_sub: np.ndarray, level: float) -> np.ndarray:
        if folded:
            return np.insert(y_sub, k, level / c[k])
        return y_sub

    warm = {"y": np.zeros(problem.num_vars - 1 if folded else problem.num_vars)}
    undecided = 0

    def evaluate(level: float) -> tuple[bool, _Phase1Result]:
        nonlocal total_iters, undecided
        r = _phase1(
            level_problem(level),
            warm["y"],
            t_cap=opts.t_cap,
            max_newton=opts.max_iter,
            tol_gap=1e-12,
            chunk=opts.chunk_size,
            stop_pos=0.0,
            stop_neg=0.0,
        )
        total_iters += r.iterations
        if r.decided == "feasible" or (r.decided == "converged" and r.t > 0.0):
            warm["y"] = r.y.copy()
            return True, r
        if r.decided not in ("infeasible", "converged"):
            undecided += 1
        return False, r

    lo = opts.level_lo
    hi = opts.level_hi
    if hi is None:
        hi = problem.level_hint if problem.level_hint else 1.0
    hi = max(hi, lo + max(1.0, abs(lo)))

    # expand upward until a feasible level is found
    feas_hi, r_hi = evaluate(hi)
    while not feas_hi:
        lo = hi
        hi *= 2.0
        if hi > opts.level_cap:
            return SdpSolution(
                y=np.full(problem.num_vars, np.nan),
                objective_value=np.nan,
                status="infeasible",
                min_block_eig=-np.inf,
                iterations=total_iters,
                bracket=(lo, hi),
                message=f"no feasible level found up to cap {opts.level_cap:g}"
                + (f" ({undecided} undecided levels treated as infeasible)" if undecided else ""),
            )
        feas_hi, r_hi = evaluate(hi)
    y_hi = r_hi.y.copy()

    # make sure lo is on the infeasible side; expand downward if not
    feas_lo, r_lo = evaluate(lo)
    width = max(1.0, hi - lo)
    while feas_lo:
        hi = lo
        y_hi = r_lo.y.copy()
        lo = lo - width
        width *= 2.0
        if lo < -opts.level_cap:
            return SdpSolution(
                y=full_y(y_hi, hi),
                objective_value=float(c @ full_y(y_hi, hi)),
                status="numerical_failure",
                min_block_eig=min_eig_margin(full_y(y_hi, hi), problem),
                iterations=total_iters,
                bracket=(lo, hi),
                message="objective appears unbounded below",
            )
        feas_lo, r_lo = evaluate(lo)

    # bisect
    steps = 0
    while hi - lo > opts.obj_tol * max(1.0, abs(hi)) and steps < 200:
        mid = 0.5 * (lo + hi)
        feas, r = evaluate(mid)
        if feas:
            hi = mid
            y_hi = r.y.copy()
        else:
            lo = mid
        steps += 1

    # re-center at the accepted level for a well-interior witness
    warm["y"] = y_hi.copy()
    rp = _phase1(
        level_problem(hi),
        y_hi,
        t_cap=opts.t_cap,
        max_newton=opts.max_iter,
        tol_gap=max(opts.feas_tol, 1e-12),
        chunk=opts.chunk_size,
    )
    total_iters += rp.iterations
    if rp.t > 0.0:
        y_hi = rp.y.copy()

    y_final = full_y(y_hi, hi)
    status: Status = "optimal" if steps < 200 else "max_iterations"
    return SdpSolution(
        y=y_final,
        objective_value=float(c @ y_final),
        status=status,
        min_block_eig=min_eig_margin(y_final, problem),
        iterations=total_iters,
        bracket=(lo, hi),
        message=f"{undecided} undecided levels treated as infeasible" if undecided else "",
    )
