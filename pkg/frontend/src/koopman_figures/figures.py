"""Render pipeline CSV artifacts into comparison figures.

This package is a pure consumer of the synthesis pipeline's CSV files; it
never imports the pipeline itself.  Three figure kinds cover the four
artifacts:

- ``sim-overlay``  (fig2_sim.csv): two stacked state panels, nonlinear
  simulation against the exact lifted model.
- ``error-bound``  (fig3_err.csv): one error-norm curve per model plus a
  horizontal dash-dot line at each model's amplitude bound.
- ``comparison``   (fig4_constant.csv, fig5_sine.csv): two stacked state
  panels with the nonlinear, exact lifted, and fixed-input-matrix models.

Schema problems raise :class:`SchemaError` carrying a column diagnostic;
the CLI turns that into a nonzero exit.  Rendering is read-only over the
inputs and output filenames are deterministic (``<stem>.svg`` and
``<stem>.png``).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import matplotlib

matplotlib.use("Agg")
# salt the SVG element ids so identical inputs give identical bytes
matplotlib.rcParams["svg.hashsalt"] = "koopman-figures"

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "SchemaError",
    "FigureSpec",
    "read_table",
    "series_names",
    "build_figure",
    "render",
    "default_specs",
]

Kind = Literal["sim-overlay", "error-bound", "comparison"]

# display names for the series keys that appear in artifact headers
DEFAULT_LABELS: dict[str, str] = {
    "nl": "nonlinear",
    "lpv": "exact lifted",
    "l2": "l2 optimal",
    "h2": "h2 optimal",
    "edmd": "EDMD",
    "edmd_reference": "EDMD (reference)",
}

_SIM_HEADER = ("k", "x1_nl", "x2_nl", "x1_lpv", "x2_lpv")
_CMP_PREFIX = ("k", "u", "x1_nl", "x2_nl", "x1_lpv", "x2_lpv")


class SchemaError(ValueError):
    """CSV header or contents do not match the requested figure kind."""


@dataclass(frozen=True)
class FigureSpec:
    """One figure: an input CSV, its kind, and the output stem.

    ``output`` is extension-free; ``render`` writes ``output.svg`` and
    ``output.png``.  ``labels`` overrides the default display name of a
    series key (for example ``{"edmd": "EDMD baseline"}``).
    """

    input_csv: Path
    kind: Kind
    output: Path
    labels: dict[str, str] = field(default_factory=dict)

    def label(self, key: str) -> str:
        return self.labels.get(key, DEFAULT_LABELS.get(key, key))


def read_table(path: Path) -> tuple[list[str], np.ndarray]:
    """Read a CSV into (header, float matrix); empty cells become NaN.

    Raises SchemaError for a missing file read as empty, no data rows, or
    ragged/non-numeric rows.
    """
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"{path}: file does not exist")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        rows = [row for row in reader if row]
    if not rows:
        raise SchemaError(f"{path}: empty file, expected a header row")
    header = [c.strip() for c in rows[0]]
    if len(rows) == 1:
        raise SchemaError(f"{path}: header only, no data rows")
    data = np.empty((len(rows) - 1, len(header)))
    for i, row in enumerate(rows[1:]):
        if len(row) != len(header):
            raise SchemaError(
                f"{path}: row {i + 1} has {len(row)} cells, header has {len(header)}"
            )
        for j, cell in enumerate(row):
            cell = cell.strip()
            try:
                data[i, j] = math.nan if cell == "" else float(cell)
            except ValueError as exc:
                raise SchemaError(
                    f"{path}: row {i + 1}, column {header[j]!r}: not a number: {cell!r}"
                ) from exc
    return header, data


def series_names(header: list[str], kind: Kind, origin: str = "csv") -> list[str]:
    """Validate the header against the kind; return the model series keys.

    sim-overlay has no model series (returns []); error-bound returns the
    names X from its (norm_e_X, bound_X) column pairs; comparison returns
    the names X from its trailing (x1_X, x2_X) pairs.
    """
    if kind == "sim-overlay":
        if tuple(header) != _SIM_HEADER:
            raise SchemaError(
                f"{origin}: expected columns {list(_SIM_HEADER)}, found {header}"
            )
        return []
    if kind == "error-bound":
        if not header or header[0] != "k":
            raise SchemaError(f"{origin}: first column must be 'k', found {header[:1]}")
        rest = header[1:]
        if not rest or len(rest) % 2:
            raise SchemaError(
                f"{origin}: expected pairs (norm_e_<name>, bound_<name>) after 'k', "
                f"found {len(rest)} columns: {rest}"
            )
        names = []
        for a, b in zip(rest[0::2], rest[1::2]):
            if not a.startswith("norm_e_") or b != "bound_" + a[len("norm_e_"):]:
                raise SchemaError(
                    f"{origin}: columns {a!r}, {b!r} are not a (norm_e_<name>, "
                    f"bound_<name>) pair"
                )
            names.append(a[len("norm_e_"):])
        return names
    if kind == "comparison":
        if tuple(header[: len(_CMP_PREFIX)]) != _CMP_PREFIX:
            raise SchemaError(
                f"{origin}: expected leading columns {list(_CMP_PREFIX)}, "
                f"found {header[: len(_CMP_PREFIX)]}"
            )
        rest = header[len(_CMP_PREFIX):]
        if len(rest) % 2:
            raise SchemaError(
                f"{origin}: expected pairs (x1_<name>, x2_<name>) after "
                f"{list(_CMP_PREFIX)}, found {len(rest)} columns: {rest}"
            )
        names = []
        for a, b in zip(rest[0::2], rest[1::2]):
            if not a.startswith("x1_") or b != "x2_" + a[len("x1_"):]:
                raise SchemaError(
                    f"{origin}: columns {a!r}, {b!r} are not a (x1_<name>, "
                    f"x2_<name>) pair"
                )
            names.append(a[len("x1_"):])
        return names
    raise SchemaError(f"unknown figure kind {kind!r}")


def _state_panels(fig_title: str) -> tuple[plt.Figure, plt.Axes, plt.Axes]:
    fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(7.0, 4.8))
    fig.suptitle(fig_title)
    ax1.set_ylabel("$x_1$")
    ax2.set_ylabel("$x_2$")
    ax2.set_xlabel("$k$")
    for ax in (ax1, ax2):
        ax.grid(True, alpha=0.3)
    return fig, ax1, ax2


def build_figure(spec: FigureSpec) -> plt.Figure:
    """Validate the spec's CSV and draw the figure (not yet saved)."""
    header, data = read_table(spec.input_csv)
    names = series_names(header, spec.kind, origin=str(spec.input_csv))
    col = {name: data[:, j] for j, name in enumerate(header)}
    k = col["k"]

    if spec.kind == "sim-overlay":
        fig, ax1, ax2 = _state_panels("nonlinear simulation vs exact lifted model")
        ax1.plot(k, col["x1_nl"], color="k", lw=1.6, label=spec.label("nl"))
        ax1.plot(k, col["x1_lpv"], "--", color="tab:orange", lw=1.2, label=spec.label("lpv"))
        ax2.plot(k, col["x2_nl"], color="k", lw=1.6)
        ax2.plot(k, col["x2_lpv"], "--", color="tab:orange", lw=1.2)
        ax1.legend(loc="best", fontsize=8)
        return fig

    if spec.kind == "error-bound":
        fig, ax = plt.subplots(figsize=(7.0, 3.6))
        ax.set_xlabel("$k$")
        ax.set_ylabel(r"$\|e_k\|_2$")
        ax.set_title("lifted-state error and amplitude bound")
        ax.grid(True, alpha=0.3)
        for name in names:
            (line,) = ax.plot(k, col["norm_e_" + name], lw=1.4, label=spec.label(name))
            bounds = col["bound_" + name]
            finite = bounds[np.isfinite(bounds)]
            if finite.size:
                # bound column is constant by construction; draw it once
                ax.axhline(
                    float(finite[0]),
                    color=line.get_color(),
                    linestyle="-.",
                    lw=1.0,
                    label=f"{spec.label(name)} bound",
                )
        ax.legend(loc="best", fontsize=8, ncol=2)
        fig.tight_layout()
        return fig

    # comparison
    fig, ax1, ax2 = _state_panels("state trajectories under the test input")
    ax1.plot(k, col["x1_nl"], color="k", lw=1.8, label=spec.label("nl"))
    ax1.plot(k, col["x1_lpv"], "--", color="tab:orange", lw=1.3, label=spec.label("lpv"))
    ax2.plot(k, col["x2_nl"], color="k", lw=1.8)
    ax2.plot(k, col["x2_lpv"], "--", color="tab:orange", lw=1.3)
    for name in names:
        (line,) = ax1.plot(k, col["x1_" + name], lw=1.1, label=spec.label(name))
        ax2.plot(k, col["x2_" + name], lw=1.1, color=line.get_color())
    ax1.legend(loc="best", fontsize=8, ncol=2)
    return fig


def render(spec: FigureSpec) -> tuple[Path, Path]:
    """Draw the figure and write ``<output>.svg`` and ``<output>.png``."""
    fig = build_figure(spec)
    out = Path(spec.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    svg = out.with_suffix(".svg")
    png = out.with_suffix(".png")
    try:
        # strip the creation date so reruns produce identical SVGs
        fig.savefig(svg, format="svg", metadata={"Date": None})
        fig.savefig(png, format="png", dpi=150)
    finally:
        plt.close(fig)
    return svg, png


def default_specs(artifact_dir: Path, out_dir: Path | None = None) -> list[FigureSpec]:
    """The four standard artifacts of a pipeline run, in figure order."""
    artifact_dir = Path(artifact_dir)
    out_dir = artifact_dir if out_dir is None else Path(out_dir)
    layout: list[tuple[str, Kind, str]] = [
        ("fig2_sim.csv", "sim-overlay", "fig2"),
        ("fig3_err.csv", "error-bound", "fig3"),
        ("fig4_constant.csv", "comparison", "fig4"),
        ("fig5_sine.csv", "comparison", "fig5"),
    ]
    return [
        FigureSpec(input_csv=artifact_dir / src, kind=kind, output=out_dir / stem)
        for src, kind, stem in layout
    ]
