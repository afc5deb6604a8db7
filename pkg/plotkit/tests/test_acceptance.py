"""Secondary acceptance: regenerate every figure type from real artifacts.

A scaled-down run of the comparison experiment is produced through the
primary package's public CLI (the only coupling is the subprocess call and
the documented file formats).  All three figure types must render without
error, SVG output must be byte-identical across reruns, and the input
artifacts must remain untouched.
"""

import hashlib
import json
import math
import subprocess
import sys

import pytest

from plotkit import FigureSpec, plot_bic, plot_comparison, plot_map


def small_experiment_config(out_dir):
    def raised(x, y):
        return [x, y, math.sqrt(1.0 - x * x - y * y)]

    return {
        "array": {"L": 30, "aperture_in_wavelengths": 15.0, "layout_seed": 42},
        "wavelength": 1.0,
        "grid": {"kind": "cap", "center": [0.0, 0.0, 1.0], "radius": 0.2, "n_rings": 8},
        "source_model": {
            "components": [
                {"type": "blob", "center": raised(0.05, 0.02), "width": 0.05, "peak_power": 1.0},
                {"type": "blob", "center": raised(-0.07, -0.04), "width": 0.07, "peak_power": 0.6},
                {"type": "blob", "center": raised(-0.01, 0.10), "width": 0.04, "peak_power": 0.8},
                {"type": "point", "direction": raised(-0.04, 0.055), "power": 2e-3},
                {"type": "point", "direction": raised(0.09, -0.07), "power": 1.5e-3},
            ],
            "correlations": [{"i": 3, "j": 4, "rho": [0.9, 0.0]}],
        },
        "snr_db_list": [-10.0, -5.0, 0.0, 5.0, 10.0],
        "n_snapshots": 400,
        "n_repeats": 2,
        "seed_base": 9,
        "methods": ["siml_known", "siml_joint", "mb", "mvdr", "aar"],
        "siml": {"M": "bic", "bic_range": [2, 20, 2], "clip_negative": False},
        "output_dir": str(out_dir),
    }


def run_primary_cli(*args):
    result = subprocess.run(
        [sys.executable, "-m", "siml", *args], capture_output=True, text=True
    )
    assert result.returncode == 0, result.stderr
    return result


@pytest.fixture(scope="module")
def artifacts(tmp_path_factory):
    root = tmp_path_factory.mktemp("artifacts")
    config_path = root / "config.json"
    out_dir = root / "run"
    config_path.write_text(json.dumps(small_experiment_config(out_dir)))
    run_primary_cli("run", "--config", str(config_path), "--out", str(out_dir))
    run_primary_cli("summarize", "--report", str(out_dir))
    return out_dir


def tree_digest(root):
    digest = hashlib.sha256()
    for path in sorted(p for p in root.rglob("*") if p.is_file()):
        digest.update(str(path.relative_to(root)).encode())
        digest.update(path.read_bytes())
    return digest.hexdigest()


def test_c11_figures_from_experiment_artifacts(artifacts, tmp_path):
    before = tree_digest(artifacts)

    svg = FigureSpec(format="svg")
    outputs = []

    for method in ("siml_joint", "mb", "mvdr"):
        out = tmp_path / f"{method}.svg"
        plot_map(
            artifacts / "maps" / f"{method}_snr5_rep0.csv",
            out,
            svg,
            sidecar=artifacts / "maps" / f"{method}_snr5_rep0.json",
        )
        outputs.append(out)

    truth_png = tmp_path / "truth.png"
    plot_map(
        artifacts / "truth_map.csv",
        truth_png,
        FigureSpec(format="png", projection="orthographic", normalization="peak"),
    )
    outputs.append(truth_png)

    cmp_out = tmp_path / "comparison.svg"
    plot_comparison(artifacts / "summary.csv", cmp_out, svg)
    outputs.append(cmp_out)

    bic_out = tmp_path / "bic.svg"
    bic_spec = FigureSpec(format="svg", metrics_csv=str(artifacts / "metrics.csv"))
    plot_bic(artifacts / "bic" / "bic_snr5_rep0.csv", bic_out, bic_spec)
    outputs.append(bic_out)

    for out in outputs:
        assert out.exists() and out.stat().st_size > 0, out

    # determinism: an identical rerun reproduces every SVG byte for byte
    for out in outputs:
        if out.suffix != ".svg":
            continue
        again = tmp_path / ("again_" + out.name)
        if "comparison" in out.name:
            plot_comparison(artifacts / "summary.csv", again, svg)
        elif "bic" in out.name:
            plot_bic(artifacts / "bic" / "bic_snr5_rep0.csv", again, bic_spec)
        else:
            method = out.stem
            plot_map(
                artifacts / "maps" / f"{method}_snr5_rep0.csv",
                again,
                svg,
                sidecar=artifacts / "maps" / f"{method}_snr5_rep0.json",
            )
        assert again.read_bytes() == out.read_bytes(), out.name

    # the plot scripts are read-only consumers
    assert tree_digest(artifacts) == before
    print("\nACCEPTANCE 11 PASS: map/comparison/scan figures regenerated "
          "deterministically from experiment artifacts")
