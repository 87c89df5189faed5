"""Command-line pipeline: synthesis, analysis, bounds, simulation, artifacts.

Subcommands map 1:1 onto library operations and exchange data only through
documented artifacts (CSV trajectories, JSON matrices/tables).  Exit codes:
0 success, 1 configuration error, 2 synthesis infeasibility, 3 dictionary
invariance violation.
"""

from __future__ import annotations

import argparse
import copy
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import dynamics, edmd, error_analysis, lifting, lmi_synthesis
from .lifting import InvarianceViolationError
from .lmi_synthesis import InfeasibleProblemError, SolverOptions

__all__ = ["ConfigError", "RunConfig", "main", "console_main"]

# input matrix of the reference EDMD implementation, kept for cross-method
# comparison rows and figures
REFERENCE_EDMD_B = [[1.0], [0.4902], [0.3093]]

DEFAULT_CONFIG: dict = {
    "system": {"a1": 0.7, "a2": 0.7, "a3": 0.5},
    "grid": {
        "x": [[-2.5, 2.5, 0.05], [-10.0, 2.7, 0.25]],
        "u": [[-1.6, 2.1, 0.2]],
    },
    "criterion": "both",
    "quad_nodes": 8,
    "seed": 0,
    "invariance_tol": 1e-8,
    "x0": [1.0, 1.0],
    "noise": {"variance": 0.5, "length": 300, "seed": 0},
    "sample_time": 0.01,
    "sine_amplitude": 0.5,
    "constant_input": 1.0,
    "sim_steps": 300,
    "solver": {"feas_tol": 1e-8, "obj_tol": 1e-6, "max_iter": 200, "margin": None},
}


class ConfigError(Exception):
    """Invalid or inconsistent run configuration."""


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration (see DEFAULT_CONFIG for the schema)."""

    a1: float
    a2: float
    a3: float
    x_axes: tuple[tuple[float, float, float], ...]
    u_axes: tuple[tuple[float, float, float], ...]
    criterion: str
    quad_nodes: int
    seed: int
    invariance_tol: float
    x0: tuple[float, ...]
    noise_variance: float
    noise_length: int
    noise_seed: int
    sample_time: float
    sine_amplitude: float
    constant_input: float
    sim_steps: int
    feas_tol: float
    obj_tol: float
    max_iter: int
    margin: float | None

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        base = copy.deepcopy(DEFAULT_CONFIG)
        _merge(base, raw)
        try:
            axes_x = tuple(tuple(float(v) for v in ax) for ax in base["grid"]["x"])
            axes_u = tuple(tuple(float(v) for v in ax) for ax in base["grid"]["u"])
            cfg = cls(
                a1=float(base["system"]["a1"]),
                a2=float(base["system"]["a2"]),
                a3=float(base["system"]["a3"]),
                x_axes=axes_x,
                u_axes=axes_u,
                criterion=str(base["criterion"]),
                quad_nodes=int(base["quad_nodes"]),
                seed=int(base["seed"]),
                invariance_tol=float(base["invariance_tol"]),
                x0=tuple(float(v) for v in base["x0"]),
                noise_variance=float(base["noise"]["variance"]),
                noise_length=int(base["noise"]["length"]),
                noise_seed=int(base["noise"]["seed"]),
                sample_time=float(base["sample_time"]),
                sine_amplitude=float(base["sine_amplitude"]),
                constant_input=float(base["constant_input"]),
                sim_steps=int(base["sim_steps"]),
                feas_tol=float(base["solver"]["feas_tol"]),
                obj_tol=float(base["solver"]["obj_tol"]),
                max_iter=int(base["solver"]["max_iter"]),
                margin=None if base["solver"]["margin"] is None else float(base["solver"]["margin"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed configuration: {exc}") from exc
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.criterion not in ("l2", "h2", "both"):
            raise ConfigError(f"criterion must be l2, h2, or both, got {self.criterion!r}")
        for name, axes in (("x", self.x_axes), ("u", self.u_axes)):
            for ax in axes:
                if len(ax) != 3:
                    raise ConfigError(f"grid axis {ax} must be [lo, hi, step]")
                lo, hi, step = ax
                if step <= 0:
                    raise ConfigError(f"grid {name} axis step must be positive, got {step}")
                if lo > hi:
                    raise ConfigError(f"grid {name} axis range [{lo}, {hi}] is empty")
        if self.quad_nodes < 1:
            raise ConfigError(f"quad_nodes must be >= 1, got {self.quad_nodes}")
        if self.noise_variance <= 0:
            raise ConfigError(f"noise variance must be positive, got {self.noise_variance}")
        if self.noise_length < 1 or self.sim_steps < 1:
            raise ConfigError("noise length and sim_steps must be >= 1")
        if self.sample_time <= 0:
            raise ConfigError(f"sample_time must be positive, got {self.sample_time}")
        if self.feas_tol <= 0 or self.obj_tol <= 0 or self.max_iter < 1:
            raise ConfigError("solver tolerances must be positive and max_iter >= 1")
        if self.margin is not None and self.margin <= 0:
            raise ConfigError(f"margin must be positive when given, got {self.margin}")

    def solver_options(self) -> SolverOptions:
        return SolverOptions(
            feas_tol=self.feas_tol, obj_tol=self.obj_tol, max_iter=self.max_iter
        )


def _merge(base: dict, override: dict) -> None:
    for key, value in override.items():
        if key not in base:
            raise ConfigError(f"unknown configuration key {key!r}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"configuration key {key!r} must be a mapping")
            _merge(base[key], value)
        else:
            base[key] = value


def _apply_set(raw: dict, assignment: str) -> None:
    if "=" not in assignment:
        raise ConfigError(f"--set expects key=value, got {assignment!r}")
    path, _, text = assignment.partition("=")
    try:
        value = json.loads(text)
    except json.JSONDecodeError:
        value = text
    node = raw
    keys = path.split(".")
    for key in keys[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise ConfigError(f"--set path {path!r} crosses a non-mapping")
    node[keys[-1]] = value


def _load_config(args) -> RunConfig:
    raw: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {args.config} is not valid JSON: {exc}") from exc
    for assignment in args.set or []:
        _apply_set(raw, assignment)
    if getattr(args, "seed", None) is not None:
        raw.setdefault("seed", args.seed)
        raw["seed"] = args.seed
    if getattr(args, "criterion", None):
        raw["criterion"] = args.criterion
    return RunConfig.from_dict(raw)


# ---------------------------------------------------------------------------
# pipeline pieces


def _build_model(cfg: RunConfig) -> lifting.KoopmanLpvModel:
    system = dynamics.builtin_example(cfg.a1, cfg.a2, cfg.a3)
    dictionary = lifting.builtin_example_dictionary()
    return lifting.lpv_model(
        dictionary, system, quad_nodes=cfg.quad_nodes, invariance_tol=cfg.invariance_tol
    )


def _build_grid(cfg: RunConfig, model, args) -> lmi_synthesis.SchedulingGrid:
    spec = lmi_synthesis.GridSpec(
        x_axes=tuple(lmi_synthesis.AxisSpec(*ax) for ax in cfg.x_axes),
        u_axes=tuple(lmi_synthesis.AxisSpec(*ax) for ax in cfg.u_axes),
    )
    grid = lmi_synthesis.make_grid(model, spec)
    n_sub = getattr(args, "subsample", None)
    if n_sub is not None:
        if not 1 <= n_sub <= grid.size:
            raise ConfigError(f"--subsample {n_sub} not in [1, {grid.size}]")
        grid = lmi_synthesis.subsample(grid, n_sub, cfg.seed)
    if not getattr(args, "full_grid", False):
        grid = lmi_synthesis.reduce_constraints(grid)
    return grid


def _criteria(cfg: RunConfig) -> list[str]:
    return ["l2", "h2"] if cfg.criterion == "both" else [cfg.criterion]


def _signals(cfg: RunConfig) -> dict[str, np.ndarray]:
    k = np.arange(cfg.sim_steps)
    return {
        "white": dynamics.white_noise_input(cfg.noise_length, cfg.noise_variance, cfg.noise_seed),
        "constant": np.full((cfg.sim_steps, 1), cfg.constant_input),
        "sine": (cfg.sine_amplitude * np.sin(2.0 * np.pi * k * cfg.sample_time)).reshape(-1, 1),
    }


def _json_dump(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path, header: list[str], columns: list[np.ndarray]) -> None:
    # first column is the integer step index; NaN cells are written empty
    import csv as _csv

    with open(path, "w", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow(header)
        for k in range(len(columns[0])):
            row = [str(int(columns[0][k]))]
            for col in columns[1:]:
                row.append("" if np.isnan(col[k]) else f"{col[k]:.12g}")
            writer.writerow(row)


# ---------------------------------------------------------------------------
# subcommands


def cmd_reproduce(args) -> int:
    cfg = _load_config(args)
    out = _ensure_out(args)
    model = _build_model(cfg)
    system = model.system
    dictionary = model.dictionary
    grid = _build_grid(cfg, model, args)
    opts = cfg.solver_options()
    margin = cfg.margin

    criteria = _criteria(cfg)
    synths: dict[str, lmi_synthesis.SynthesisResult] = {}
    for crit in criteria:
        assemble = lmi_synthesis.assemble_l2 if crit == "l2" else lmi_synthesis.assemble_h2
        problem = assemble(model.A, model.C, grid, margin=margin)
        synths[crit] = lmi_synthesis.synthesize(problem, opts)

    # EDMD baseline regressed on the lifted white-noise trajectory (exact A kept)
    signals = _signals(cfg)
    white = signals["white"]
    traj = dynamics.simulate(system, np.asarray(cfg.x0), white)
    data = edmd.build_data_matrices(traj, dictionary)
    b_edmd, _ = edmd.edmd_input_known_A(data, model.A)
    b_reference = np.asarray(REFERENCE_EDMD_B)

    b_hats: dict[str, np.ndarray] = {}
    for crit in criteria:
        b_hats[crit] = synths[crit].b_hat
    b_hats["edmd"] = b_edmd
    b_hats["edmd_reference"] = b_reference

    # cross-analysis: every B_hat under every requested criterion
    gammas: dict[str, dict[str, float]] = {name: {} for name in b_hats}
    x_certs: dict[str, dict[str, np.ndarray]] = {name: {} for name in b_hats}
    for name, b_hat in b_hats.items():
        for crit in criteria:
            if name in synths and name == crit:
                gammas[name][crit] = synths[crit].gamma
                x_certs[name][crit] = synths[crit].x_cert
            else:
                g, X = lmi_synthesis.analyze(
                    model.A, model.C, b_hat, grid, crit, margin=margin, options=opts
                )
                gammas[name][crit] = g
                x_certs[name][crit] = X

    u_inf = float(np.max(np.abs(white)))
    bounds = {
        name: error_analysis.ErrorBound.compute(grid, b_hat, u_inf)
        for name, b_hat in b_hats.items()
    }

    rows = {}
    for name in b_hats:
        row = {f"gamma_{crit}": gammas[name][crit] for crit in criteria}
        eb = bounds[name]
        row["beta"] = eb.beta
        row["gamma_amp_per_unit_u"] = (
            None if eb.sigma_bar >= 1.0 else eb.beta / (1.0 - eb.sigma_bar)
        )
        row["gamma_amp_realized"] = eb.gamma_amp
        rows["l2_synth" if name == "l2" else "h2_synth" if name == "h2" else name] = row
    table = {
        "sigma_bar": error_analysis.max_singular_value(model.A),
        "rho": error_analysis.spectral_radius(model.A),
        "margin": margin if margin is not None else lmi_synthesis.default_margin(model.A),
        "u_inf_realized": u_inf,
        "grid_points": grid.size,
        "rows": rows,
    }
    _json_dump(table, out / "table1.json")
    _json_dump({name: b.tolist() for name, b in b_hats.items()}, out / "bhat.json")

    # fig2: nonlinear vs exact LPV under the white-noise signal
    z0 = lifting.lift(dictionary, np.asarray(cfg.x0))
    z_lpv = lifting.simulate_lifted(model, z0, white)
    x_lpv = z_lpv @ model.C.T
    ks = np.arange(traj.states.shape[0], dtype=float)
    _write_csv(
        out / "fig2_sim.csv",
        ["k", "x1_nl", "x2_nl", "x1_lpv", "x2_lpv"],
        [ks, traj.states[:, 0], traj.states[:, 1], x_lpv[:, 0], x_lpv[:, 1]],
    )

    # fig3: error norms vs amplitude bounds under the same signal
    header = ["k"]
    cols: list[np.ndarray] = [ks]
    fig3_names = [c for c in criteria] + ["edmd"]
    for name in fig3_names:
        lti = lifting.LtiKoopmanModel(A=model.A, B_hat=b_hats[name], C=model.C)
        trace = error_analysis.error_trajectory(model, lti, z0, white)
        eb = bounds[name]
        header += [f"norm_e_{name}", f"bound_{name}"]
        cols += [trace.norms, np.full(len(ks), np.nan if eb.gamma_amp is None else eb.gamma_amp)]
    _write_csv(out / "fig3_err.csv", header, cols)

    # fig4/fig5: state comparison under constant and sinusoid inputs
    for fname, sig in (("fig4_constant.csv", signals["constant"]), ("fig5_sine.csv", signals["sine"])):
        traj_s = dynamics.simulate(system, np.asarray(cfg.x0), sig)
        z_l = lifting.simulate_lifted(model, z0, sig)
        x_l = z_l @ model.C.T
        ks_s = np.arange(traj_s.states.shape[0], dtype=float)
        header = ["k", "u", "x1_nl", "x2_nl", "x1_lpv", "x2_lpv"]
        u_col = np.append(sig[:, 0], np.nan)
        cols = [ks_s, u_col, traj_s.states[:, 0], traj_s.states[:, 1], x_l[:, 0], x_l[:, 1]]
        for name in fig3_names:
            lti = lifting.LtiKoopmanModel(A=model.A, B_hat=b_hats[name], C=model.C)
            z_hat = lifting.simulate_lti(lti, z0, sig)
            x_hat = z_hat @ model.C.T
            header += [f"x1_{name}", f"x2_{name}"]
            cols += [x_hat[:, 0], x_hat[:, 1]]
        _write_csv(out / fname, header, cols)
    print(f"wrote table1.json, bhat.json, fig2-5 CSVs to {out}")
    return 0


def cmd_synth(args) -> int:
    cfg = _load_config(args)
    out = _ensure_out(args)
    model = _build_model(cfg)
    grid = _build_grid(cfg, model, args)
    opts = cfg.solver_options()
    result = {}
    for crit in _criteria(cfg):
        assemble = lmi_synthesis.assemble_l2 if crit == "l2" else lmi_synthesis.assemble_h2
        problem = assemble(model.A, model.C, grid, margin=cfg.margin)
        res = lmi_synthesis.synthesize(problem, opts)
        result[crit] = {
            "gamma": res.gamma,
            "b_hat": res.b_hat.tolist(),
            "x_cert": res.x_cert.tolist(),
            "stats": {
                "iterations": res.stats.iterations,
                "feasibility_margin": res.stats.feasibility_margin,
                "wall_time_s": res.stats.wall_time_s,
            },
        }
    _json_dump(result, out / "synthesis.json")
    for crit, entry in result.items():
        print(f"{crit}: gamma = {entry['gamma']:.6f}")
    return 0


def _load_bhats(path) -> dict[str, np.ndarray]:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read B matrix file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    if isinstance(raw, dict) and "B" in raw:
        raw = {"B": raw["B"]}
    elif not isinstance(raw, dict):
        raise ConfigError(f"{path} must map names to matrices")
    out = {}
    for name, mat in raw.items():
        arr = np.asarray(mat, dtype=float)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2:
            raise ConfigError(f"{path}: entry {name!r} is not a matrix")
        out[name] = arr
    return out


def cmd_analyze(args) -> int:
    cfg = _load_config(args)
    out = _ensure_out(args)
    model = _build_model(cfg)
    grid = _build_grid(cfg, model, args)
    opts = cfg.solver_options()
    b_hats = _load_bhats(args.bhat)
    result = {}
    for name, b_hat in b_hats.items():
        entry = {}
        for crit in _criteria(cfg):
            gamma, X = lmi_synthesis.analyze(
                model.A, model.C, b_hat, grid, crit, margin=cfg.margin, options=opts
            )
            entry[f"gamma_{crit}"] = gamma
            entry[f"x_cert_{crit}"] = X.tolist()
        result[name] = entry
    _json_dump(result, out / "analysis.json")
    for name, entry in result.items():
        values = ", ".join(f"{k} = {v:.6f}" for k, v in entry.items() if k.startswith("gamma"))
        print(f"{name}: {values}")
    return 0


def cmd_bound(args) -> int:
    cfg = _load_config(args)
    out = _ensure_out(args)
    model = _build_model(cfg)
    grid = _build_grid(cfg, model, args)
    b_hats = _load_bhats(args.bhat)
    u_inf = args.u_inf if args.u_inf is not None else 1.0
    result = {
        "sigma_bar": error_analysis.max_singular_value(model.A),
        "rho": error_analysis.spectral_radius(model.A),
        "u_inf": u_inf,
        "entries": {},
    }
    for name, b_hat in b_hats.items():
        eb = error_analysis.ErrorBound.compute(grid, b_hat, u_inf)
        result["entries"][name] = {
            "beta": eb.beta,
            "gamma_amp": eb.gamma_amp,
            "gamma_amp_per_unit_u": None if eb.sigma_bar >= 1 else eb.beta / (1 - eb.sigma_bar),
        }
    _json_dump(result, out / "bound.json")
    print(f"sigma_bar = {result['sigma_bar']:.5f}")
    return 0


def _parse_signal(cfg: RunConfig, text: str, steps: int) -> np.ndarray:
    kind, _, param = text.partition(":")
    if kind == "white":
        var = float(param) if param else cfg.noise_variance
        if var <= 0:
            raise ConfigError(f"white noise variance must be positive, got {var}")
        return dynamics.white_noise_input(steps, var, cfg.noise_seed)
    if kind == "constant":
        value = float(param) if param else cfg.constant_input
        return np.full((steps, 1), value)
    if kind == "sine":
        amp = float(param) if param else cfg.sine_amplitude
        k = np.arange(steps)
        return (amp * np.sin(2.0 * np.pi * k * cfg.sample_time)).reshape(-1, 1)
    raise ConfigError(f"unknown signal {text!r}; expected white[:var], constant[:v], sine[:amp]")


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    out = _ensure_out(args)
    system = dynamics.builtin_example(cfg.a1, cfg.a2, cfg.a3)
    steps = args.steps if args.steps is not None else cfg.sim_steps
    if steps < 1:
        raise ConfigError(f"--steps must be >= 1, got {steps}")
    u_seq = _parse_signal(cfg, args.signal, steps)
    traj = dynamics.simulate(system, np.asarray(cfg.x0), u_seq)
    traj.to_csv(out / "traj.csv")
    print(f"wrote {steps}-step trajectory to {out / 'traj.csv'}")
    return 0


def cmd_edmd(args) -> int:
    cfg = _load_config(args)
    out = _ensure_out(args)
    system = dynamics.builtin_example(cfg.a1, cfg.a2, cfg.a3)
    dictionary = lifting.builtin_example_dictionary()
    if args.traj:
        try:
            traj = dynamics.Trajectory.from_csv(args.traj)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read trajectory {args.traj}: {exc}") from exc
    else:
        white = dynamics.white_noise_input(cfg.noise_length, cfg.noise_variance, cfg.noise_seed)
        traj = dynamics.simulate(system, np.asarray(cfg.x0), white)
    data = edmd.build_data_matrices(traj, dictionary)
    if args.known_a:
        model = _build_model(cfg)
        B, residual = edmd.edmd_input_known_A(data, model.A)
        A = model.A
    else:
        A, B, residual = edmd.edmd_with_input(data)
    _json_dump({"A": A.tolist(), "B": B.tolist(), "residual_fro": residual}, out / "edmd.json")
    print(f"wrote EDMD estimates to {out / 'edmd.json'} (residual {residual:.3e})")
    return 0


# ---------------------------------------------------------------------------
# entry points


def _ensure_out(args):
    from pathlib import Path

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _add_common(sub, grid_flags: bool = True) -> None:
    sub.add_argument("--config", help="JSON run configuration (defaults are built in)")
    sub.add_argument("--out", default="out", help="output directory (default: out)")
    sub.add_argument("--seed", type=int, default=None, help="override the config seed")
    sub.add_argument("--set", action="append", metavar="KEY=VALUE",
                     help="override a config entry, e.g. --set solver.obj_tol=1e-7")
    if grid_flags:
        sub.add_argument("--full-grid", action="store_true",
                         help="solve over every grid point (no hull reduction)")
        sub.add_argument("--subsample", type=int, default=None, metavar="N",
                         help="random sub-selection of N grid points before reduction")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="koopman-lti",
        description="LTI approximation of exact LPV Koopman embeddings with gain certificates",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("reproduce-paper", help="run the full benchmark pipeline")
    _add_common(p)
    p.add_argument("--criterion", choices=["l2", "h2", "both"], default=None)
    p.set_defaults(func=cmd_reproduce)

    p = subs.add_parser("synth", help="synthesize an optimal constant input matrix")
    _add_common(p)
    p.add_argument("--criterion", choices=["l2", "h2", "both"], default=None)
    p.set_defaults(func=cmd_synth)

    p = subs.add_parser("analyze", help="certified gain levels of fixed input matrices")
    _add_common(p)
    p.add_argument("--criterion", choices=["l2", "h2", "both"], default=None)
    p.add_argument("--bhat", required=True, help="JSON file of input matrices (bhat.json)")
    p.set_defaults(func=cmd_analyze)

    p = subs.add_parser("bound", help="amplitude error bounds for fixed input matrices")
    _add_common(p)
    p.add_argument("--bhat", required=True, help="JSON file of input matrices (bhat.json)")
    p.add_argument("--u-inf", type=float, default=None, help="input amplitude (default 1)")
    p.set_defaults(func=cmd_bound)

    p = subs.add_parser("simulate", help="simulate the nonlinear system to CSV")
    _add_common(p, grid_flags=False)
    p.add_argument("--signal", default="white", help="white[:var] | constant[:v] | sine[:amp]")
    p.add_argument("--steps", type=int, default=None)
    p.set_defaults(func=cmd_simulate)

    p = subs.add_parser("edmd", help="EDMD estimates from a trajectory")
    _add_common(p, grid_flags=False)
    p.add_argument("--traj", default=None, help="trajectory CSV (default: simulate internally)")
    p.add_argument("--known-a", action="store_true",
                   help="keep the exact A and regress only the input matrix")
    p.set_defaults(func=cmd_edmd)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except InfeasibleProblemError as exc:
        print(f"synthesis infeasible: {exc}", file=sys.stderr)
        return 2
    except InvarianceViolationError as exc:
        print(f"invariance violation: {exc}", file=sys.stderr)
        return 3


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
