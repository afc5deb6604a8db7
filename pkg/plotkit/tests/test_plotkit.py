import csv
import json
import math

import numpy as np
import pytest

from plotkit import (
    FigureSpec,
    SchemaError,
    load_spec,
    plot_bic,
    plot_comparison,
    plot_map,
    project_points,
    read_bic_csv,
    read_map_csv,
    read_summary_csv,
)
from plotkit.figures import normalize_values


def ring_points(n=24, tilt=0.15):
    """Small cap of unit vectors around +z: one center plus a ring."""
    pts = [[0.0, 0.0, 1.0]]
    for k in range(n - 1):
        phi = 2.0 * math.pi * k / (n - 1)
        pts.append(
            [math.sin(tilt) * math.cos(phi), math.sin(tilt) * math.sin(phi), math.cos(tilt)]
        )
    return np.array(pts)


def write_map(path, values, points=None):
    points = ring_points(len(values)) if points is None else points
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "z", "weight", "value"])
        for p, v in zip(points, values):
            writer.writerow([f"{p[0]:.17g}", f"{p[1]:.17g}", f"{p[2]:.17g}", "0.01", f"{v:.17g}"])


def write_bic(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["M", "loglik", "bic", "selected"])
        writer.writerows(rows)


def write_summary(path, methods=("mb", "siml_joint"), snrs=(-5.0, 0.0, 5.0)):
    cols = [
        "method", "snr_db", "n",
        "rel_mse_fit_mean", "rel_mse_fit_std",
        "rel_mse_raw_mean", "rel_mse_raw_std",
        "rms_contrast_mean", "rms_contrast_std",
    ]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(cols)
        for m_idx, method in enumerate(methods):
            for snr in snrs:
                base = 0.5 / (m_idx + 1) + 0.01 * abs(snr)
                writer.writerow(
                    [method, snr, 10, base, 0.05, base * 1.1, 0.05, 0.2 * (m_idx + 1), 0.01]
                )


class TestSchemas:
    def test_map_reader_round_trip(self, tmp_path):
        path = tmp_path / "map.csv"
        vals = np.linspace(0.0, 2.0, 24)
        write_map(path, vals)
        data = read_map_csv(path)
        assert np.allclose(data.values, vals)
        assert data.points.shape == (24, 3)

    def test_map_missing_column_named(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x,y,z,weight\n0,0,1,0.1\n")
        with pytest.raises(SchemaError, match="'value'"):
            read_map_csv(path)

    def test_map_sidecar_label(self, tmp_path):
        path = tmp_path / "map.csv"
        side = tmp_path / "map.json"
        write_map(path, np.ones(24))
        side.write_text(json.dumps({"label": "mvdr snr=5"}))
        assert read_map_csv(path, sidecar=side).label == "mvdr snr=5"

    def test_bic_reader(self, tmp_path):
        path = tmp_path / "bic.csv"
        write_bic(path, [[2, -10.0, 120.0, 0], [4, -8.0, 90.0, 1], [6, -7.9, 140.0, 0]])
        scan = read_bic_csv(path)
        assert scan.selected_dim == 4
        assert scan.dims.tolist() == [2, 4, 6]

    def test_bic_requires_one_selection(self, tmp_path):
        path = tmp_path / "bic.csv"
        write_bic(path, [[2, -10.0, 120.0, 0], [4, -8.0, 90.0, 0]])
        with pytest.raises(SchemaError, match="selected"):
            read_bic_csv(path)

    def test_summary_reader(self, tmp_path):
        path = tmp_path / "summary.csv"
        write_summary(path)
        rows = read_summary_csv(path)
        assert len(rows) == 6
        assert {r["method"] for r in rows} == {"mb", "siml_joint"}

    def test_summary_missing_key_column(self, tmp_path):
        path = tmp_path / "summary.csv"
        path.write_text("method,rel_mse\nmb,0.5\n")
        with pytest.raises(SchemaError, match="'snr_db'"):
            read_summary_csv(path)


class TestProjections:
    def test_orthographic_preserves_sin_of_angle(self):
        pts = ring_points(12, tilt=0.3)
        coords = project_points(pts, "orthographic", center=[0.0, 0.0, 1.0])
        radii = np.linalg.norm(coords, axis=1)
        assert radii[0] == pytest.approx(0.0, abs=1e-12)
        assert np.allclose(radii[1:], math.sin(0.3), atol=1e-12)

    def test_gnomonic_preserves_tan_of_angle(self):
        pts = ring_points(12, tilt=0.3)
        coords = project_points(pts, "gnomonic", center=[0.0, 0.0, 1.0])
        radii = np.linalg.norm(coords, axis=1)
        assert np.allclose(radii[1:], math.tan(0.3), atol=1e-12)

    def test_gnomonic_rejects_far_hemisphere(self):
        pts = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]])
        with pytest.raises(ValueError, match="hemisphere"):
            project_points(pts, "gnomonic", center=[0.0, 0.0, 1.0])

    def test_default_center_is_mean_direction(self):
        pts = ring_points(20, tilt=0.2)
        auto = project_points(pts, "gnomonic")
        explicit = project_points(pts, "gnomonic", center=[0.0, 0.0, 1.0])
        assert np.allclose(np.linalg.norm(auto, axis=1), np.linalg.norm(explicit, axis=1), atol=1e-9)

    def test_unknown_projection(self):
        with pytest.raises(ValueError):
            project_points(ring_points(4), "mercator")


class TestFigureSpec:
    def test_defaults(self):
        spec = FigureSpec()
        assert spec.projection == "gnomonic"
        assert spec.normalization == "raw"

    @pytest.mark.parametrize(
        "kwargs", [{"projection": "mercator"}, {"normalization": "log"}, {"format": "pdf"}]
    )
    def test_invalid_fields(self, kwargs):
        with pytest.raises(ValueError):
            FigureSpec(**kwargs)

    def test_load_spec_rejects_unknown_keys(self, tmp_path):
        path = tmp_path / "spec.json"
        path.write_text(json.dumps({"projection": "orthographic", "colormap": "jet"}))
        with pytest.raises(SchemaError, match="colormap"):
            load_spec(path)

    def test_normalize_modes(self):
        vals = np.array([-2.0, 1.0, 4.0])
        assert np.array_equal(normalize_values(vals, "raw"), vals)
        assert np.array_equal(normalize_values(vals, "clip"), [0.0, 1.0, 4.0])
        assert np.array_equal(normalize_values(vals, "peak"), [-0.5, 0.25, 1.0])


class TestFigures:
    def test_constant_map_renders(self, tmp_path):
        path = tmp_path / "map.csv"
        write_map(path, np.full(24, 1.5))
        out = plot_map(path, tmp_path / "map.png", FigureSpec(normalization="peak"))
        assert (tmp_path / "map.png").stat().st_size > 0
        assert out.endswith("map.png")

    def test_hot_pixel_map_with_negatives_renders(self, tmp_path):
        path = tmp_path / "map.csv"
        vals = np.full(24, -0.05)
        vals[7] = 3.0
        write_map(path, vals)
        plot_map(path, tmp_path / "map.svg", FigureSpec(format="svg"))
        body = (tmp_path / "map.svg").read_text()
        assert "<svg" in body

    def test_map_svg_deterministic(self, tmp_path):
        path = tmp_path / "map.csv"
        rng = np.random.default_rng(0)
        write_map(path, rng.random(24))
        spec = FigureSpec(format="svg", projection="orthographic")
        plot_map(path, tmp_path / "a.svg", spec)
        plot_map(path, tmp_path / "b.svg", spec)
        assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()

    def test_map_png_deterministic(self, tmp_path):
        path = tmp_path / "map.csv"
        rng = np.random.default_rng(1)
        write_map(path, rng.random(24))
        plot_map(path, tmp_path / "a.png")
        plot_map(path, tmp_path / "b.png")
        assert (tmp_path / "a.png").read_bytes() == (tmp_path / "b.png").read_bytes()

    def test_comparison_curves(self, tmp_path):
        path = tmp_path / "summary.csv"
        write_summary(path)
        plot_comparison(path, tmp_path / "cmp.svg", FigureSpec(format="svg"))
        assert (tmp_path / "cmp.svg").stat().st_size > 0

    def test_comparison_single_point(self, tmp_path):
        path = tmp_path / "summary.csv"
        write_summary(path, methods=("mb",), snrs=(5.0,))
        plot_comparison(path, tmp_path / "one.png")
        assert (tmp_path / "one.png").stat().st_size > 0

    def test_bic_two_point_scan(self, tmp_path):
        path = tmp_path / "bic.csv"
        write_bic(path, [[2, -10.0, 120.0, 1], [4, -8.0, 130.0, 0]])
        plot_bic(path, tmp_path / "bic.png")
        assert (tmp_path / "bic.png").stat().st_size > 0

    def test_bic_with_trend_panel(self, tmp_path):
        bic_path = tmp_path / "bic.csv"
        write_bic(bic_path, [[2, -10.0, 120.0, 0], [4, -8.0, 90.0, 1], [6, -7.0, 140.0, 0]])
        metrics = tmp_path / "metrics.csv"
        with open(metrics, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["method", "M", "snr_db", "seed", "rel_mse_fit"])
            for snr, m in [(-5, 4), (0, 8), (5, 12)]:
                writer.writerow(["siml_joint", m, snr, 1, 0.5])
        spec = FigureSpec(metrics_csv=str(metrics))
        plot_bic(bic_path, tmp_path / "bic2.png", spec)
        assert (tmp_path / "bic2.png").stat().st_size > 0


class TestCli:
    def test_map_subcommand(self, tmp_path):
        from plotkit.cli import main

        path = tmp_path / "map.csv"
        write_map(path, np.linspace(0, 1, 24))
        spec = tmp_path / "spec.json"
        spec.write_text(json.dumps({"projection": "orthographic", "format": "svg"}))
        code = main([
            "map", "--in", str(path), "--out", str(tmp_path / "m.svg"), "--spec", str(spec)
        ])
        assert code == 0
        assert (tmp_path / "m.svg").exists()

    def test_schema_error_exit_code(self, tmp_path):
        from plotkit.cli import main

        bad = tmp_path / "bad.csv"
        bad.write_text("a,b\n1,2\n")
        assert main(["map", "--in", str(bad), "--out", str(tmp_path / "x.png")]) == 2
