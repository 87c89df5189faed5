"""Discrete-time control-affine systems, simulation, and excitation signals.

A system is ``x+ = f(x) + g(x) u`` with state dimension ``n_x`` and input
dimension ``n_u``.  Everything here is plain NumPy; systems are described by
callables plus axis-aligned operating domains used for validation, gridding,
and default sampling elsewhere in the package.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "NumericOverflowError",
    "Box",
    "NonlinearSystem",
    "Trajectory",
    "step",
    "simulate",
    "white_noise_input",
    "builtin_example",
]


class NumericOverflowError(RuntimeError):
    """A dynamics evaluation produced a non-finite (NaN or inf) value."""


@dataclass(frozen=True)
class Box:
    """Axis-aligned box ``{v : lo <= v <= hi}`` with per-axis bounds.

    Parameters
    ----------
    lo, hi : array_like, shape (dim,)
        Lower and upper bounds.  Must be finite with ``lo <= hi`` per axis.
    """

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self) -> None:
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if lo.ndim != 1 or lo.shape != hi.shape:
            raise ValueError(f"bounds must be 1-D and congruent, got {lo.shape} vs {hi.shape}")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("box bounds must be finite")
        if np.any(lo > hi):
            raise ValueError(f"empty box: lo={lo} exceeds hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return self.lo.shape[0]

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    def contains(self, v: np.ndarray, atol: float = 0.0) -> bool:
        """True if ``v`` (a point or an array of row points) lies in the box."""
        v = np.asarray(v, dtype=float)
        return bool(np.all(v >= self.lo - atol) and np.all(v <= self.hi + atol))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Draw ``n`` uniform points, shape ``(n, dim)``."""
        return rng.uniform(self.lo, self.hi, size=(n, self.dim))


@dataclass(frozen=True)
class NonlinearSystem:
    """Control-affine discrete-time system ``x+ = f(x) + g(x) u``.

    Parameters
    ----------
    n_x, n_u : int
        State and input dimensions.
    f : callable
        Drift map, ``(n_x,) -> (n_x,)``.
    g : callable
        Input map, ``(n_x,) -> (n_x, n_u)``.
    x_domain, u_domain : Box
        Operating domains.  ``f`` and ``g`` are spot-checked on the domain
        center and corners at construction; shape or finiteness failures
        raise immediately rather than deep inside a simulation.
    """

    n_x: int
    n_u: int
    f: Callable[[np.ndarray], np.ndarray]
    g: Callable[[np.ndarray], np.ndarray]
    x_domain: Box
    u_domain: Box

    def __post_init__(self) -> None:
        if self.n_x < 1 or self.n_u < 1:
            raise ValueError(f"dimensions must be positive, got n_x={self.n_x}, n_u={self.n_u}")
        if self.x_domain.dim != self.n_x:
            raise ValueError(f"x_domain dim {self.x_domain.dim} != n_x {self.n_x}")
        if self.u_domain.dim != self.n_u:
            raise ValueError(f"u_domain dim {self.u_domain.dim} != n_u {self.n_u}")
        for x in (self.x_domain.center, self.x_domain.lo, self.x_domain.hi):
            fx = np.asarray(self.f(x), dtype=float)
            gx = np.asarray(self.g(x), dtype=float)
            if fx.shape != (self.n_x,):
                raise ValueError(f"f(x) has shape {fx.shape}, expected ({self.n_x},)")
            if gx.shape != (self.n_x, self.n_u):
                raise ValueError(f"g(x) has shape {gx.shape}, expected ({self.n_x}, {self.n_u})")
            if not (np.all(np.isfinite(fx)) and np.all(np.isfinite(gx))):
                raise ValueError(f"f/g non-finite on domain point {x}")


@dataclass(frozen=True)
class Trajectory:
    """State/input record of a simulation.

    ``states`` has one more row than ``inputs``: states are x_0..x_N and
    inputs are u_0..u_{N-1} where u_k drives the transition k -> k+1.
    """

    states: np.ndarray
    inputs: np.ndarray

    def __post_init__(self) -> None:
        states = np.asarray(self.states, dtype=float)
        inputs = np.asarray(self.inputs, dtype=float)
        if states.ndim != 2 or inputs.ndim != 2:
            raise ValueError("states and inputs must be 2-D arrays")
        if states.shape[0] != inputs.shape[0] + 1:
            raise ValueError(
                f"need one more state than input, got {states.shape[0]} states "
                f"and {inputs.shape[0]} inputs"
            )
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "inputs", inputs)

    @property
    def length(self) -> int:
        """Number of transitions (N)."""
        return self.inputs.shape[0]

    @property
    def n_x(self) -> int:
        return self.states.shape[1]

    @property
    def n_u(self) -> int:
        return self.inputs.shape[1]

    def to_csv(self, path) -> None:
        """Write ``k,x1..xn,u1..um`` rows; the final row has empty input cells."""
        n_x, n_u = self.n_x, self.n_u
        header = ["k"] + [f"x{i+1}" for i in range(n_x)] + [f"u{j+1}" for j in range(n_u)]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for k in range(self.states.shape[0]):
                row = [str(k)] + [f"{v:.12g}" for v in self.states[k]]
                if k < self.length:
                    row += [f"{v:.12g}" for v in self.inputs[k]]
                else:
                    row += [""] * n_u
                writer.writerow(row)

    @classmethod
    def from_csv(cls, path) -> "Trajectory":
        """Read a trajectory written by :meth:`to_csv`."""
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows:
            raise ValueError(f"{path}: empty trajectory file")
        header = rows[0]
        n_x = sum(1 for c in header if c.startswith("x"))
        n_u = sum(1 for c in header if c.startswith("u"))
        if n_x == 0 or header[0] != "k":
            raise ValueError(f"{path}: unrecognized trajectory header {header}")
        states, inputs = [], []
        for row in rows[1:]:
            states.append([float(v) for v in row[1 : 1 + n_x]])
            u_cells = row[1 + n_x : 1 + n_x + n_u]
            if all(c != "" for c in u_cells):
                inputs.append([float(v) for v in u_cells])
        return cls(states=np.asarray(states), inputs=np.asarray(inputs).reshape(len(inputs), n_u))


def _check_finite(v: np.ndarray, what: str, k: int | None = None) -> None:
    if not np.all(np.isfinite(v)):
        bad = np.flatnonzero(~np.isfinite(v)).tolist()
        where = f" at step {k}" if k is not None else ""
        raise NumericOverflowError(f"{what} component(s) {bad} non-finite{where}")


def step(system: NonlinearSystem, x: np.ndarray, u: np.ndarray) -> np.ndarray:
    """One transition ``x+ = f(x) + g(x) u``.

    Raises
    ------
    ValueError
        On shape mismatch of ``x`` or ``u``.
    NumericOverflowError
        If the next state has non-finite components (message names them).
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    u = np.asarray(u, dtype=float).reshape(-1)
    if x.shape != (system.n_x,):
        raise ValueError(f"state has shape {x.shape}, expected ({system.n_x},)")
    if u.shape != (system.n_u,):
        raise ValueError(f"input has shape {u.shape}, expected ({system.n_u},)")
    x_next = np.asarray(system.f(x), dtype=float) + np.asarray(system.g(x), dtype=float) @ u
    _check_finite(x_next, "state")
    return x_next


def simulate(system: NonlinearSystem, x0: np.ndarray, u_seq: np.ndarray) -> Trajectory:
    """Roll the system forward under the input sequence ``u_seq``.

    Parameters
    ----------
    x0 : array_like, shape (n_x,)
    u_seq : array_like, shape (N, n_u) or (N,) when n_u == 1

    Returns
    -------
    Trajectory
        With N+1 states.  Step failures re-raise with the failing time index.
    """
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    u_seq = np.asarray(u_seq, dtype=float)
    if u_seq.ndim == 1:
        if system.n_u == 1:
            u_seq = u_seq.reshape(-1, 1)
        elif u_seq.size == 0:
            u_seq = u_seq.reshape(0, system.n_u)
        else:
            raise ValueError(f"1-D input sequence requires n_u == 1, got n_u={system.n_u}")
    if u_seq.size == 0:
        u_seq = u_seq.reshape(0, system.n_u)
    if u_seq.ndim != 2 or u_seq.shape[1] != system.n_u:
        raise ValueError(f"input sequence has shape {u_seq.shape}, expected (N, {system.n_u})")
    states = np.empty((u_seq.shape[0] + 1, system.n_x))
    states[0] = x0
    for k in range(u_seq.shape[0]):
        try:
            states[k + 1] = step(system, states[k], u_seq[k])
        except NumericOverflowError as exc:
            raise NumericOverflowError(f"step {k}: {exc}") from exc
    return Trajectory(states=states, inputs=u_seq.copy())


def white_noise_input(length: int, variance: float, seed: int) -> np.ndarray:
    """Seeded scalar white-noise sequence, shape ``(length, 1)``.

    Samples are i.i.d. normal with mean 0 and the given variance, drawn from
    ``np.random.default_rng(seed)`` so sequences are reproducible across
    platforms.  ``length == 0`` yields an empty sequence.
    """
    if length < 0:
        raise ValueError(f"length must be >= 0, got {length}")
    if not variance > 0:
        raise ValueError(f"variance must be positive, got {variance}")
    rng = np.random.default_rng(seed)
    return rng.normal(0.0, np.sqrt(variance), size=(length, 1))


def builtin_example(a1: float = 0.7, a2: float = 0.7, a3: float = 0.5) -> NonlinearSystem:
    """Benchmark system used throughout the package.

    ``x1+ = a1 x1 + u``; ``x2+ = a2 x2 - a3 x1^2 + x1^2 u``, i.e.
    ``f(x) = [a1 x1, a2 x2 - a3 x1^2]`` and ``g(x) = [1, x1^2]^T``, on the
    operating domain x1 in [-2.5, 2.5], x2 in [-10, 2.7], u in [-1.6, 2.1].
    """

    def f(x: np.ndarray) -> np.ndarray:
        return np.array([a1 * x[0], a2 * x[1] - a3 * x[0] ** 2])

    def g(x: np.ndarray) -> np.ndarray:
        return np.array([[1.0], [x[0] ** 2]])

    return NonlinearSystem(
        n_x=2,
        n_u=1,
        f=f,
        g=g,
        x_domain=Box(lo=np.array([-2.5, -10.0]), hi=np.array([2.5, 2.7])),
        u_domain=Box(lo=np.array([-1.6]), hi=np.array([2.1])),
    )
