import csv
import math

import numpy as np
import pytest


def _write(path, header, cols):
    rows = zip(*cols)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow(["" if isinstance(v, float) and math.isnan(v) else v for v in row])


@pytest.fixture
def artifact_dir(tmp_path):
    """A synthetic artifact directory with all four CSVs in pipeline schema."""
    n = 30
    k = np.arange(n, dtype=float)
    x1 = 0.7**k
    x2 = np.sin(0.3 * k)
    _write(
        tmp_path / "fig2_sim.csv",
        ["k", "x1_nl", "x2_nl", "x1_lpv", "x2_lpv"],
        [k, x1, x2, x1, x2],
    )
    _write(
        tmp_path / "fig3_err.csv",
        ["k", "norm_e_l2", "bound_l2", "norm_e_h2", "bound_h2", "norm_e_edmd", "bound_edmd"],
        [
            k,
            0.5 * k,
            np.full(n, 40.0),
            0.4 * k,
            np.full(n, 30.0),
            0.9 * k,
            np.full(n, math.nan),
        ],
    )
    u = np.append(np.ones(n - 1), math.nan)
    for name in ("fig4_constant.csv", "fig5_sine.csv"):
        _write(
            tmp_path / name,
            ["k", "u", "x1_nl", "x2_nl", "x1_lpv", "x2_lpv", "x1_l2", "x2_l2", "x1_edmd", "x2_edmd"],
            [k, u, x1, x2, x1, x2, 1.1 * x1, 1.1 * x2, 1.3 * x1, 1.3 * x2],
        )
    return tmp_path
