import numpy as np
import pytest

from koopman_figures import FigureSpec, SchemaError, build_figure, default_specs, render
from koopman_figures.figures import read_table, series_names


def _nonempty(path):
    assert path.exists(), path
    assert path.stat().st_size > 0, path


def test_default_specs_cover_all_four_figures(artifact_dir):
    specs = default_specs(artifact_dir)
    assert [s.input_csv.name for s in specs] == [
        "fig2_sim.csv",
        "fig3_err.csv",
        "fig4_constant.csv",
        "fig5_sine.csv",
    ]
    assert [s.kind for s in specs] == ["sim-overlay", "error-bound", "comparison", "comparison"]
    assert [s.output.name for s in specs] == ["fig2", "fig3", "fig4", "fig5"]


def test_render_each_kind_emits_nonempty_svg_and_png(artifact_dir):
    for spec in default_specs(artifact_dir, artifact_dir / "out"):
        svg, png = render(spec)
        assert svg.name == spec.output.name + ".svg"
        assert png.name == spec.output.name + ".png"
        _nonempty(svg)
        _nonempty(png)
        assert b"<svg" in svg.read_bytes()[:500]
        assert png.read_bytes().startswith(b"\x89PNG")


def test_render_is_read_only_and_deterministic(artifact_dir):
    spec = default_specs(artifact_dir, artifact_dir / "a")[1]
    before = spec.input_csv.read_bytes()
    svg1, _ = render(spec)
    assert spec.input_csv.read_bytes() == before
    spec2 = default_specs(artifact_dir, artifact_dir / "b")[1]
    svg2, _ = render(spec2)
    assert svg1.read_bytes() == svg2.read_bytes()


def test_error_bound_draws_one_dash_dot_line_per_finite_bound(artifact_dir):
    spec = default_specs(artifact_dir)[1]
    fig = build_figure(spec)
    lines = fig.axes[0].get_lines()
    # conftest writes finite bounds for l2 and h2, NaN for edmd
    assert sum(1 for l in lines if l.get_linestyle() == "-.") == 2
    assert sum(1 for l in lines if l.get_linestyle() == "-") == 3


def test_comparison_panels_show_every_model(artifact_dir):
    spec = default_specs(artifact_dir)[2]
    fig = build_figure(spec)
    assert len(fig.axes) == 2
    # nonlinear + lifted + two models per panel
    assert len(fig.axes[0].get_lines()) == 4
    assert len(fig.axes[1].get_lines()) == 4


def test_labels_override_series_names(artifact_dir):
    spec = default_specs(artifact_dir)[1]
    renamed = FigureSpec(
        input_csv=spec.input_csv,
        kind=spec.kind,
        output=spec.output,
        labels={"l2": "energy-gain optimal"},
    )
    fig = build_figure(renamed)
    texts = [t.get_text() for t in fig.axes[0].get_legend().get_texts()]
    assert "energy-gain optimal" in texts


def test_read_table_parses_blank_cells_as_nan(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("k,u\n0,1.5\n1,\n")
    header, data = read_table(p)
    assert header == ["k", "u"]
    assert data.shape == (2, 2)
    assert np.isnan(data[1, 1])


def test_missing_file_and_empty_file_are_schema_errors(tmp_path):
    with pytest.raises(SchemaError, match="does not exist"):
        read_table(tmp_path / "nope.csv")
    p = tmp_path / "empty.csv"
    p.write_text("")
    with pytest.raises(SchemaError, match="empty"):
        read_table(p)
    p.write_text("k,x1_nl,x2_nl,x1_lpv,x2_lpv\n")
    with pytest.raises(SchemaError, match="no data rows"):
        read_table(p)


def test_ragged_and_non_numeric_rows_are_schema_errors(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("k,u\n0,1,2\n")
    with pytest.raises(SchemaError, match="cells"):
        read_table(p)
    p.write_text("k,u\n0,abc\n")
    with pytest.raises(SchemaError, match="not a number"):
        read_table(p)


def test_series_names_validation_messages_name_the_columns():
    with pytest.raises(SchemaError) as err:
        series_names(["k", "x1_nl", "x2_nl", "x1_lpv"], "sim-overlay")
    assert "x2_lpv" in str(err.value)

    with pytest.raises(SchemaError, match="pair"):
        series_names(["k", "norm_e_l2", "bound_h2"], "error-bound")
    with pytest.raises(SchemaError, match="pairs"):
        series_names(["k", "norm_e_l2"], "error-bound")
    with pytest.raises(SchemaError, match="leading columns"):
        series_names(["k", "x1_nl"], "comparison")

    assert series_names(["k", "norm_e_a", "bound_a"], "error-bound") == ["a"]
    cmp_header = ["k", "u", "x1_nl", "x2_nl", "x1_lpv", "x2_lpv", "x1_m", "x2_m"]
    assert series_names(cmp_header, "comparison") == ["m"]


def test_render_rejects_schema_mismatch_with_diagnostic(artifact_dir):
    # fig2 data rendered as error-bound must fail, naming the bad columns
    spec = FigureSpec(
        input_csv=artifact_dir / "fig2_sim.csv",
        kind="error-bound",
        output=artifact_dir / "x",
    )
    with pytest.raises(SchemaError, match="norm_e_"):
        render(spec)
    assert not (artifact_dir / "x.svg").exists()
