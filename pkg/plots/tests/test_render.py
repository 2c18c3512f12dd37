import subprocess
import sys
import textwrap
from pathlib import Path

import numpy as np
import pytest

from chanest_plots.render import (
    FigureSpec,
    SchemaError,
    belldiag_grid,
    gain_curves,
    main_belldiag,
    main_gain,
    main_resources,
    read_rows,
    render,
    resource_grid,
)

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


class TestSchemaValidation:
    def test_header_must_match_exactly(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("F,p,delta_R\n1.0,0.1,0.2\n", encoding="utf-8")
        with pytest.raises(SchemaError, match="delta_R"):
            read_rows(str(bad), "gain-curves")

    def test_empty_file(self, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text("", encoding="utf-8")
        with pytest.raises(SchemaError, match="empty"):
            read_rows(str(empty), "gain-curves")

    def test_header_only(self, tmp_path):
        lonely = tmp_path / "lonely.csv"
        lonely.write_text("F,p,gain\n", encoding="utf-8")
        with pytest.raises(SchemaError, match="no data rows"):
            read_rows(str(lonely), "gain-curves")

    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="unknown figure kind"):
            FigureSpec("x.csv", "scatter", "x.png")


class TestGainFigure:
    def test_three_curves_ordered_top_to_bottom_by_fidelity(self, tmp_path):
        spec = FigureSpec(str(FIXTURES / "gain.csv"), "gain-curves", str(tmp_path / "gain.png"))
        fig = render(spec)
        ax = fig.axes[0]
        labels = [line.get_label() for line in ax.lines if line.get_label().startswith("F")]
        assert labels == ["F = 1", "F = 0.9", "F = 0.83"]
        curves = [line.get_ydata() for line in ax.lines if line.get_label().startswith("F")]
        # higher fidelity curve sits above the next one everywhere
        assert np.all(np.asarray(curves[0]) >= np.asarray(curves[1]) - 1e-12)
        assert np.all(np.asarray(curves[1]) >= np.asarray(curves[2]) - 1e-12)
        assert (tmp_path / "gain.png").stat().st_size > 0

    def test_curve_grouping(self):
        rows = read_rows(str(FIXTURES / "gain.csv"), "gain-curves")
        curves = gain_curves(rows)
        assert [fidelity for fidelity, _, _ in curves] == [1.0, 0.9, 0.83]
        for _, p, _ in curves:
            assert np.all(np.diff(p) > 0)


class TestResourceFigure:
    def test_mask_hides_nonpositive_cells(self):
        rows = read_rows(str(FIXTURES / "resources.csv"), "resource-surface")
        _, _, masked = resource_grid(rows)
        assert masked.mask.any()  # fixture contains non-positive cells
        assert np.all(masked.compressed() > 0)
        raw = np.array([row["delta_R"] for row in rows])
        expected_hidden = np.count_nonzero(~(raw > 0))
        assert masked.mask.sum() == expected_hidden

    def test_render_uses_masked_grid(self, tmp_path):
        spec = FigureSpec(
            str(FIXTURES / "resources.csv"), "resource-surface", str(tmp_path / "resources.png")
        )
        fig = render(spec)
        mesh = fig.axes[0].collections[0]
        data = mesh.get_array()
        assert np.ma.is_masked(data)
        assert np.all(data.compressed() > 0)
        assert (tmp_path / "resources.png").stat().st_size > 0


class TestBellDiagFigure:
    def test_render_fixture(self, tmp_path):
        spec = FigureSpec(
            str(FIXTURES / "belldiag.csv"), "belldiag-heatmap", str(tmp_path / "belldiag.png")
        )
        render(spec)
        assert (tmp_path / "belldiag.png").stat().st_size > 0

    def test_nan_cells_are_masked(self, tmp_path):
        synthetic = tmp_path / "synthetic.csv"
        synthetic.write_text(
            "alpha1,alpha2,alpha3,alpha4,mean_error\n"
            "0.3,0.0,0.0,0.7,0.5\n"
            "0.3,0.1,0.0,0.6,nan\n"
            "0.3,0.0,0.1,0.6,0.4\n"
            "0.3,0.1,0.1,0.5,0.6\n",
            encoding="utf-8",
        )
        rows = read_rows(str(synthetic), "belldiag-heatmap")
        _, _, masked = belldiag_grid(rows)
        assert masked.mask.sum() == 1
        assert masked.compressed().size == 3


class TestDeterminism:
    def test_rerendering_is_byte_identical(self, tmp_path):
        first = tmp_path / "one.png"
        second = tmp_path / "two.png"
        render(FigureSpec(str(FIXTURES / "gain.csv"), "gain-curves", str(first)))
        render(FigureSpec(str(FIXTURES / "gain.csv"), "gain-curves", str(second)))
        assert first.read_bytes() == second.read_bytes()


class TestEntryPoints:
    def test_all_three_commands(self, tmp_path):
        assert main_gain([str(FIXTURES / "gain.csv"), str(tmp_path / "g.png")]) == 0
        assert main_resources([str(FIXTURES / "resources.csv"), str(tmp_path / "r.png")]) == 0
        assert main_belldiag([str(FIXTURES / "belldiag.csv"), str(tmp_path / "b.png")]) == 0
        for name in ("g.png", "r.png", "b.png"):
            assert (tmp_path / name).stat().st_size > 0

    def test_schema_mismatch_exit_code(self, tmp_path):
        assert main_gain([str(FIXTURES / "resources.csv"), str(tmp_path / "x.png")]) == 2

    def test_missing_file_exit_code(self, tmp_path):
        assert main_gain([str(tmp_path / "nope.csv"), str(tmp_path / "x.png")]) == 2


class TestDecoupling:
    def test_renders_without_the_estimation_package_loaded(self, tmp_path):
        # run in a fresh interpreter: rendering all three fixtures must not
        # pull in the estimation package (or anything outside CSV + plotting)
        script = textwrap.dedent(
            f"""
            import sys
            from chanest_plots.render import FigureSpec, render
            fixtures = {str(FIXTURES)!r}
            out = {str(tmp_path)!r}
            render(FigureSpec(fixtures + "/gain.csv", "gain-curves", out + "/g.png"))
            render(FigureSpec(fixtures + "/resources.csv", "resource-surface", out + "/r.png"))
            render(FigureSpec(fixtures + "/belldiag.csv", "belldiag-heatmap", out + "/b.png"))
            assert "chanest" not in sys.modules, "plots package must not import the estimation package"
            print("decoupled")
            """
        )
        result = subprocess.run(
            [sys.executable, "-c", script], capture_output=True, text=True, check=False
        )
        assert result.returncode == 0, result.stderr
        assert "decoupled" in result.stdout
