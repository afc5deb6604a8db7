"""Config-driven experiment runner and command-line entry point.

A single JSON config declares the array, grid, source model, SNR sweep,
snapshot count, repeat count, and method list; ``run`` executes every
(snr, repeat) cell, writes per-method intensity maps, metric rows, BIC
scans, and a manifest with content hashes.  Outputs are deterministic:
the same config always produces byte-identical artifacts.

Subcommands: ``simulate``, ``estimate``, ``beamform``, ``bic-scan``,
``run``, ``summarize``.  Exit codes: 0 success, 2 config error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .array_model import (
    SensorArray,
    random_disk_array,
    read_array_csv,
    write_array_csv,
)
from .beamformers import KINDS as BEAMFORMER_KINDS
from .beamformers import BeamformerSpec, beamform_spectrum
from .estimators import (
    bic_scan,
    eigen_sieve,
    estimate_joint,
    estimate_known_noise,
    intensity_estimate,
    write_bic_csv,
    write_estimate,
)
from .exceptions import ConfigError, SimlError
from .field_sim import (
    SampleCovariance,
    SourceModel,
    intensity_map,
    model_from_json,
    model_to_json,
    population_covariance,
    read_covariance_csv,
    sample_covariance,
    sigma_for_snr_db,
    write_covariance_csv,
)
from .metrics import IntensityMap, relative_mse, rms_contrast, scale_fit, write_map_csv
from .sphere_grid import (
    Direction,
    SphereGrid,
    make_cap_grid,
    make_fibonacci_grid,
    write_grid_csv,
)

METHODS = ("siml_known", "siml_joint", "mb", "mvdr", "aar")

METRIC_COLUMNS = (
    "method",
    "M",
    "snr_db",
    "seed",
    "rel_mse_fit",
    "rel_mse_raw",
    "rms_contrast",
    "rms_contrast_fit",
    "rms_contrast_norm",
)


@dataclass(frozen=True)
class ArrayConfig:
    n_sensors: int = 0
    aperture_in_wavelengths: float = 50.0
    layout_seed: int | None = None
    layout_file: str | None = None


@dataclass(frozen=True)
class GridConfig:
    kind: str = "full"
    n_points: int = 1000
    center: tuple = (0.0, 0.0, 1.0)
    radius: float = 0.1
    n_rings: int = 10


@dataclass(frozen=True)
class SimlConfig:
    M: object = "bic"  # positive int or the string "bic"
    bic_range: tuple | None = None  # (lo, hi, stride)
    clip_negative: bool = False


@dataclass(frozen=True)
class ExperimentConfig:
    array: ArrayConfig
    wavelength: float
    grid: GridConfig
    source_model: SourceModel
    snr_db_list: tuple
    n_snapshots: int
    n_repeats: int
    seed_base: int
    methods: tuple
    siml: SimlConfig = field(default_factory=SimlConfig)
    output_dir: str = "out"


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def parse_config(data: dict) -> ExperimentConfig:
    """Validate a config dict, raising ConfigError naming the bad field."""
    _require(isinstance(data, dict), "config must be a JSON object")

    arr = data.get("array")
    _require(isinstance(arr, dict), "array: must be an object")
    layout_file = arr.get("layout_file")
    layout_seed = arr.get("layout_seed")
    n_sensors = int(arr.get("L", 0))
    if layout_file is None:
        _require(n_sensors >= 1, "array.L: must be >= 1")
        _require(layout_seed is not None, "array.layout_seed or array.layout_file required")
    aperture = float(arr.get("aperture_in_wavelengths", 50.0))
    _require(aperture > 0, "array.aperture_in_wavelengths: must be > 0")
    array_cfg = ArrayConfig(
        n_sensors=n_sensors,
        aperture_in_wavelengths=aperture,
        layout_seed=None if layout_seed is None else int(layout_seed),
        layout_file=layout_file,
    )

    wavelength = float(data.get("wavelength", 0.0))
    _require(wavelength > 0, "wavelength: must be > 0")

    grid = data.get("grid")
    _require(isinstance(grid, dict), "grid: must be an object")
    kind = grid.get("kind", "full")
    _require(kind in ("full", "cap"), "grid.kind: must be 'full' or 'cap'")
    if kind == "full":
        n_points = int(grid.get("P", 0))
        _require(n_points >= 1, "grid.P: must be >= 1")
        grid_cfg = GridConfig(kind="full", n_points=n_points)
    else:
        radius = float(grid.get("radius", 0.0))
        _require(0 < radius <= math.pi / 2, "grid.radius: must lie in (0, pi/2]")
        n_rings = int(grid.get("n_rings", 0))
        _require(n_rings >= 1, "grid.n_rings: must be >= 1")
        center = tuple(float(v) for v in grid.get("center", (0.0, 0.0, 1.0)))
        _require(len(center) == 3, "grid.center: must be a 3-vector")
        grid_cfg = GridConfig(kind="cap", center=center, radius=radius, n_rings=n_rings)

    model_data = data.get("source_model")
    _require(isinstance(model_data, dict), "source_model: must be an object")
    try:
        model = model_from_json(model_data)
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"source_model: {exc}") from exc

    snr_list = data.get("snr_db_list")
    _require(
        isinstance(snr_list, (list, tuple)) and len(snr_list) >= 1,
        "snr_db_list: must be a non-empty list",
    )
    snr_list = tuple(float(v) for v in snr_list)
    _require(all(math.isfinite(v) for v in snr_list), "snr_db_list: entries must be finite")

    n_snapshots = int(data.get("n_snapshots", 0))
    _require(n_snapshots >= 1, "n_snapshots: must be >= 1")
    n_repeats = int(data.get("n_repeats", 1))
    _require(n_repeats >= 1, "n_repeats: must be >= 1")
    seed_base = int(data.get("seed_base", 0))

    methods = data.get("methods")
    _require(
        isinstance(methods, (list, tuple)) and len(methods) >= 1,
        "methods: must be a non-empty list",
    )
    for m in methods:
        _require(m in METHODS, f"methods: unknown method {m!r}")
    methods = tuple(m for m in METHODS if m in methods)  # canonical order

    siml_data = data.get("siml", {})
    _require(isinstance(siml_data, dict), "siml: must be an object")
    m_choice = siml_data.get("M", "bic")
    if m_choice != "bic":
        m_choice = int(m_choice)
        _require(m_choice >= 1, "siml.M: must be >= 1 or 'bic'")
        if layout_file is None and "siml_joint" in methods:
            _require(
                m_choice <= n_sensors - 1,
                "siml.M: must be <= L - 1 for joint estimation",
            )
    bic_range = siml_data.get("bic_range")
    if bic_range is not None:
        _require(
            isinstance(bic_range, (list, tuple)) and len(bic_range) == 3,
            "siml.bic_range: must be [lo, hi, stride]",
        )
        bic_range = tuple(int(v) for v in bic_range)
        _require(
            bic_range[0] >= 1 and bic_range[1] >= bic_range[0] and bic_range[2] >= 1,
            "siml.bic_range: need 1 <= lo <= hi and stride >= 1",
        )
    siml_cfg = SimlConfig(
        M=m_choice,
        bic_range=bic_range,
        clip_negative=bool(siml_data.get("clip_negative", False)),
    )

    return ExperimentConfig(
        array=array_cfg,
        wavelength=wavelength,
        grid=grid_cfg,
        source_model=model,
        snr_db_list=snr_list,
        n_snapshots=n_snapshots,
        n_repeats=n_repeats,
        seed_base=seed_base,
        methods=methods,
        siml=siml_cfg,
        output_dir=str(data.get("output_dir", "out")),
    )


def serialize_config(config: ExperimentConfig) -> dict:
    """Inverse of parse_config: a JSON-ready dict that parses back equal."""
    arr = {"aperture_in_wavelengths": config.array.aperture_in_wavelengths}
    if config.array.layout_file is not None:
        arr["layout_file"] = config.array.layout_file
        if config.array.n_sensors:
            arr["L"] = config.array.n_sensors
    else:
        arr["L"] = config.array.n_sensors
        arr["layout_seed"] = config.array.layout_seed
    if config.grid.kind == "full":
        grid = {"kind": "full", "P": config.grid.n_points}
    else:
        grid = {
            "kind": "cap",
            "center": list(config.grid.center),
            "radius": config.grid.radius,
            "n_rings": config.grid.n_rings,
        }
    siml = {"M": config.siml.M, "clip_negative": config.siml.clip_negative}
    if config.siml.bic_range is not None:
        siml["bic_range"] = list(config.siml.bic_range)
    return {
        "array": arr,
        "wavelength": config.wavelength,
        "grid": grid,
        "source_model": model_to_json(config.source_model),
        "snr_db_list": list(config.snr_db_list),
        "n_snapshots": config.n_snapshots,
        "n_repeats": config.n_repeats,
        "seed_base": config.seed_base,
        "methods": list(config.methods),
        "siml": siml,
        "output_dir": config.output_dir,
    }


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "r") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return parse_config(data)


def build_array(config: ExperimentConfig) -> SensorArray:
    if config.array.layout_file is not None:
        return read_array_csv(config.array.layout_file, config.wavelength)
    return random_disk_array(
        config.array.n_sensors,
        config.wavelength,
        seed=config.array.layout_seed,
        aperture_in_wavelengths=config.array.aperture_in_wavelengths,
    )


def build_grid(config: ExperimentConfig) -> SphereGrid:
    if config.grid.kind == "full":
        return make_fibonacci_grid(config.grid.n_points)
    return make_cap_grid(
        Direction.from_vector(np.array(config.grid.center)),
        config.grid.radius,
        config.grid.n_rings,
    )


def default_bic_values(config: ExperimentConfig, n_sensors: int) -> list:
    if config.siml.bic_range is not None:
        lo, hi, stride = config.siml.bic_range
    else:
        lo, hi, stride = 2, min(n_sensors - 1, config.n_snapshots), 1
    hi = min(hi, n_sensors - 1)
    return list(range(lo, hi + 1, stride))


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_json(data, path) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(data, fh, sort_keys=True, indent=2)
        fh.write("\n")


def config_hash(config: ExperimentConfig) -> str:
    canonical = json.dumps(serialize_config(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def _metric_row(
    method: str,
    m_used: int,
    snr: float,
    seed: int,
    estimate: IntensityMap,
    truth: IntensityMap,
) -> dict:
    fit = scale_fit(estimate, truth)
    contrast = rms_contrast(estimate)
    peak = float(np.max(np.abs(estimate.values)))
    return {
        "method": method,
        "M": m_used,
        "snr_db": snr,
        "seed": seed,
        "rel_mse_fit": relative_mse(estimate, truth, scale_fit_flag=True),
        "rel_mse_raw": relative_mse(estimate, truth, scale_fit_flag=False),
        "rms_contrast": contrast,
        "rms_contrast_fit": abs(fit) * contrast,
        "rms_contrast_norm": contrast / peak if peak > 0 else 0.0,
    }


def write_metrics_csv(rows, path) -> None:
    rows = sorted(rows, key=lambda r: (r["method"], r["snr_db"], r["seed"]))
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(METRIC_COLUMNS) + "\n")
        for row in rows:
            fields = []
            for col in METRIC_COLUMNS:
                val = row[col]
                fields.append(_fmt(val) if isinstance(val, float) else str(val))
            fh.write(",".join(fields) + "\n")


def read_metrics_csv(path) -> list:
    rows = []
    with open(path, "r") as fh:
        header = fh.readline().strip().split(",")
        for line in fh:
            if not line.strip():
                continue
            raw = dict(zip(header, line.strip().split(",")))
            row = {"method": raw["method"]}
            for key, val in raw.items():
                if key == "method":
                    continue
                row[key] = int(val) if key in ("M", "seed") else float(val)
            rows.append(row)
    return rows


def _snr_tag(snr: float) -> str:
    return f"{snr:g}"


def _run_cell(
    config: ExperimentConfig,
    array: SensorArray,
    grid: SphereGrid,
    truth: IntensityMap,
    snr: float,
    repeat: int,
    sigma: float,
    pop_cov: np.ndarray,
    out_dir: str,
):
    """Simulate one (snr, repeat) cell and run every requested method.

    Returns (metric rows, emitted file relpaths, failure records).
    """
    seed = config.seed_base + repeat
    rows, files, failures = [], [], []
    tag = f"snr{_snr_tag(snr)}_rep{repeat}"

    cov = sample_covariance(pop_cov, config.n_snapshots, seed)

    wants_siml = any(m.startswith("siml") for m in config.methods)
    selected_m = None
    if wants_siml:
        if config.siml.M == "bic":
            try:
                scan = bic_scan(cov, array, default_bic_values(config, array.n_sensors))
                selected_m = scan.selected_M
                rel = f"bic/bic_{tag}.csv"
                write_bic_csv(scan, os.path.join(out_dir, rel))
                files.append(rel)
            except SimlError as exc:
                failures.append({"cell": tag, "stage": "bic_scan", "error": str(exc)})
        else:
            selected_m = int(config.siml.M)

    for method in config.methods:
        try:
            if method in BEAMFORMER_KINDS:
                values = beamform_spectrum(cov, array, grid, BeamformerSpec(kind=method))
                m_used = 0
            else:
                if selected_m is None:
                    raise SimlError("no sieve dimension available (scan failed)")
                m_used = selected_m
                if method == "siml_known":
                    m_used = min(m_used, array.n_sensors)
                    basis = eigen_sieve(cov, array, m_used)
                    est = estimate_known_noise(cov, basis, sigma)
                else:
                    basis = eigen_sieve(cov, array, m_used)
                    est = estimate_joint(cov, basis)
                values = intensity_estimate(est, array, grid)
                if config.siml.clip_negative:
                    values = np.clip(values, 0.0, None)
                rel_csv = f"estimates/{method}_{tag}_R.csv"
                rel_meta = f"estimates/{method}_{tag}_meta.json"
                write_estimate(
                    est,
                    os.path.join(out_dir, rel_csv),
                    os.path.join(out_dir, rel_meta),
                )
                files.extend([rel_csv, rel_meta])

            label = f"{method} snr={_snr_tag(snr)} rep={repeat} M={m_used}"
            est_map = IntensityMap(grid=grid, values=values, label=label)
            rel_map = f"maps/{method}_{tag}.csv"
            rel_side = f"maps/{method}_{tag}.json"
            write_map_csv(
                est_map,
                os.path.join(out_dir, rel_map),
                os.path.join(out_dir, rel_side),
            )
            files.extend([rel_map, rel_side])
            rows.append(_metric_row(method, m_used, snr, seed, est_map, truth))
        except (SimlError, np.linalg.LinAlgError) as exc:
            failures.append({"cell": tag, "stage": method, "error": str(exc)})
    return rows, files, failures


def run_experiment(
    config: ExperimentConfig, out_dir: str | None = None, threads: int = 1
) -> dict:
    """Execute the full experiment described by the config.

    Writes all artifacts under the output directory and returns the
    manifest.  Cells are independent; with ``threads > 1`` they run
    concurrently, with identical output bytes either way.
    """
    out_dir = out_dir or config.output_dir
    os.makedirs(out_dir, exist_ok=True)
    for sub in ("maps", "estimates", "bic"):
        os.makedirs(os.path.join(out_dir, sub), exist_ok=True)

    array = build_array(config)
    grid = build_grid(config)
    model = config.source_model
    truth = IntensityMap(
        grid=grid, values=intensity_map(model, grid), label="ground truth"
    )

    files = []
    write_array_csv(array, os.path.join(out_dir, "array.csv"))
    write_grid_csv(grid, os.path.join(out_dir, "grid.csv"))
    write_map_csv(
        truth,
        os.path.join(out_dir, "truth_map.csv"),
        os.path.join(out_dir, "truth_map.json"),
    )
    _write_json(model_to_json(model), os.path.join(out_dir, "model.json"))
    _write_json(serialize_config(config), os.path.join(out_dir, "config.json"))
    files.extend(["array.csv", "grid.csv", "truth_map.csv", "truth_map.json",
                  "model.json", "config.json"])

    cells = []
    sigma_by_snr = {}
    for snr in config.snr_db_list:
        sigma = sigma_for_snr_db(model, array, snr, grid)
        sigma_by_snr[_snr_tag(snr)] = sigma
        pop_cov = population_covariance(model, array, sigma, grid)
        for repeat in range(config.n_repeats):
            cells.append((snr, repeat, sigma, pop_cov))

    def work(cell):
        snr, repeat, sigma, pop_cov = cell
        return _run_cell(config, array, grid, truth, snr, repeat, sigma, pop_cov, out_dir)

    all_rows, all_failures = [], []
    if threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, cells))
    else:
        results = [work(cell) for cell in cells]
    for rows, cell_files, failures in results:
        all_rows.extend(rows)
        files.extend(cell_files)
        all_failures.extend(failures)

    write_metrics_csv(all_rows, os.path.join(out_dir, "metrics.csv"))
    files.append("metrics.csv")

    manifest = {
        "tool_version": __version__,
        "config_hash": config_hash(config),
        "config": serialize_config(config),
        "seeds": [config.seed_base + r for r in range(config.n_repeats)],
        "sigma_by_snr": sigma_by_snr,
        "files": {rel: _sha256(os.path.join(out_dir, rel)) for rel in sorted(files)},
        "failures": sorted(
            all_failures, key=lambda f: (f["cell"], f["stage"])
        ),
        "warnings": [],
    }
    _write_json(manifest, os.path.join(out_dir, "manifest.json"))
    return manifest


def summarize(report_dir: str, out_path: str | None = None) -> list:
    """Aggregate metrics over repeats: mean and std per (method, snr).

    Standard deviations use the population convention so a single repeat
    reports 0 rather than NaN.
    """
    rows = read_metrics_csv(os.path.join(report_dir, "metrics.csv"))
    metric_names = [
        "rel_mse_fit",
        "rel_mse_raw",
        "rms_contrast",
        "rms_contrast_fit",
        "rms_contrast_norm",
    ]
    groups = {}
    for row in rows:
        groups.setdefault((row["method"], row["snr_db"]), []).append(row)
    summary = []
    for (method, snr) in sorted(groups):
        members = groups[(method, snr)]
        entry = {"method": method, "snr_db": snr, "n": len(members)}
        for name in metric_names:
            vals = np.array([m[name] for m in members])
            entry[f"{name}_mean"] = float(np.mean(vals))
            entry[f"{name}_std"] = float(np.std(vals))
        summary.append(entry)
    if out_path is not None:
        cols = ["method", "snr_db", "n"]
        for name in metric_names:
            cols.extend([f"{name}_mean", f"{name}_std"])
        with open(out_path, "w", newline="\n") as fh:
            fh.write(",".join(cols) + "\n")
            for entry in summary:
                fields = []
                for col in cols:
                    val = entry[col]
                    fields.append(_fmt(val) if isinstance(val, float) else str(val))
                fh.write(",".join(fields) + "\n")
    return summary


def _load_covariance_arg(path: str) -> SampleCovariance:
    sidecar = os.path.splitext(path)[0] + ".json"
    return read_covariance_csv(path, sidecar)


def _cmd_simulate(args) -> int:
    config = load_config(args.config)
    out_dir = args.out or config.output_dir
    os.makedirs(out_dir, exist_ok=True)
    array = build_array(config)
    grid = build_grid(config)
    model = config.source_model
    snr = config.snr_db_list[0]
    sigma = sigma_for_snr_db(model, array, snr, grid)
    seed = args.seed if args.seed is not None else config.seed_base
    pop = population_covariance(model, array, sigma, grid)
    cov = sample_covariance(pop, config.n_snapshots, seed)
    write_covariance_csv(
        cov,
        os.path.join(out_dir, "covariance.csv"),
        os.path.join(out_dir, "covariance.json"),
    )
    truth = IntensityMap(grid=grid, values=intensity_map(model, grid), label="ground truth")
    write_map_csv(
        truth,
        os.path.join(out_dir, "truth_map.csv"),
        os.path.join(out_dir, "truth_map.json"),
    )
    write_array_csv(array, os.path.join(out_dir, "array.csv"))
    write_grid_csv(grid, os.path.join(out_dir, "grid.csv"))
    print(f"simulated covariance at snr={_snr_tag(snr)} dB, sigma={sigma:.6g}, seed={seed}")
    return 0


def _cmd_estimate(args) -> int:
    config = load_config(args.config)
    out_dir = args.out or config.output_dir
    os.makedirs(out_dir, exist_ok=True)
    array = build_array(config)
    grid = build_grid(config)
    cov = _load_covariance_arg(args.cov)

    if config.siml.M == "bic":
        scan = bic_scan(cov, array, default_bic_values(config, array.n_sensors))
        write_bic_csv(scan, os.path.join(out_dir, "bic.csv"))
        m_used = scan.selected_M
    else:
        m_used = int(config.siml.M)

    if args.method == "siml_known":
        if args.sigma is None:
            raise ConfigError("--sigma is required for siml_known")
        basis = eigen_sieve(cov, array, m_used)
        est = estimate_known_noise(cov, basis, args.sigma)
    else:
        basis = eigen_sieve(cov, array, m_used)
        est = estimate_joint(cov, basis)

    values = intensity_estimate(est, array, grid)
    if config.siml.clip_negative:
        values = np.clip(values, 0.0, None)
    est_map = IntensityMap(grid=grid, values=values, label=f"{args.method} M={m_used}")
    write_estimate(
        est,
        os.path.join(out_dir, "estimate_R.csv"),
        os.path.join(out_dir, "estimate_meta.json"),
    )
    write_map_csv(
        est_map,
        os.path.join(out_dir, "estimate_map.csv"),
        os.path.join(out_dir, "estimate_map.json"),
    )
    print(
        f"{args.method}: M={m_used}, sigma_hat={est.sigma_hat:.6g}, "
        f"loglik={est.log_likelihood:.6g}"
    )
    return 0


def _cmd_beamform(args) -> int:
    config = load_config(args.config)
    out_dir = args.out or config.output_dir
    os.makedirs(out_dir, exist_ok=True)
    array = build_array(config)
    grid = build_grid(config)
    cov = _load_covariance_arg(args.cov)
    values = beamform_spectrum(cov, array, grid, BeamformerSpec(kind=args.method))
    est_map = IntensityMap(grid=grid, values=values, label=args.method)
    write_map_csv(
        est_map,
        os.path.join(out_dir, f"{args.method}_map.csv"),
        os.path.join(out_dir, f"{args.method}_map.json"),
    )
    print(f"{args.method}: spectrum over {grid.size} pixels")
    return 0


def _cmd_bic_scan(args) -> int:
    config = load_config(args.config)
    out_dir = args.out or config.output_dir
    os.makedirs(out_dir, exist_ok=True)
    array = build_array(config)
    cov = _load_covariance_arg(args.cov)
    scan = bic_scan(cov, array, default_bic_values(config, array.n_sensors))
    write_bic_csv(scan, os.path.join(out_dir, "bic.csv"))
    print(f"selected M = {scan.selected_M}")
    return 0


def _cmd_run(args) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        data = serialize_config(config)
        data["seed_base"] = args.seed
        config = parse_config(data)
    manifest = run_experiment(config, out_dir=args.out, threads=args.threads)
    n_cells = len(config.snr_db_list) * config.n_repeats
    print(
        f"ran {n_cells} cells, {len(manifest['files'])} files, "
        f"{len(manifest['failures'])} failures"
    )
    if manifest["failures"] and not any(
        row for row in manifest["files"] if row.startswith("maps/")
    ):
        return 3
    return 0


def _cmd_summarize(args) -> int:
    out_path = args.out or os.path.join(args.report, "summary.csv")
    summary = summarize(args.report, out_path)
    print(f"wrote {len(summary)} summary rows to {out_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="siml",
        description="Sieved maximum-likelihood intensity mapping experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, cov=False, method=None):
        p.add_argument("--config", required=True, help="experiment config JSON")
        p.add_argument("--out", default=None, help="output directory")
        if cov:
            p.add_argument(
                "--cov",
                required=True,
                help="covariance CSV (sidecar JSON expected alongside)",
            )
        if method:
            p.add_argument("--method", choices=method, default=method[0])

    p = sub.add_parser("simulate", help="simulate one sample covariance")
    add_common(p)
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("estimate", help="sieved ML estimate from a covariance file")
    add_common(p, cov=True, method=("siml_joint", "siml_known"))
    p.add_argument("--sigma", type=float, default=None, help="known noise power")

    p = sub.add_parser("beamform", help="beamformer spectrum from a covariance file")
    add_common(p, cov=True, method=tuple(BEAMFORMER_KINDS))

    p = sub.add_parser("bic-scan", help="scan sieve dimensions by BIC")
    add_common(p, cov=True)

    p = sub.add_parser("run", help="run the full experiment grid")
    add_common(p)
    p.add_argument("--seed", type=int, default=None, help="override seed_base")
    p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("summarize", help="aggregate metrics over repeats")
    p.add_argument("--report", required=True, help="experiment output directory")
    p.add_argument("--out", default=None, help="summary CSV path")

    return parser


_COMMANDS = {
    "simulate": _cmd_simulate,
    "estimate": _cmd_estimate,
    "beamform": _cmd_beamform,
    "bic-scan": _cmd_bic_scan,
    "run": _cmd_run,
    "summarize": _cmd_summarize,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, ValueError, OSError) as exc:
        # bad config fields, malformed input files, unreadable paths
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (SimlError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
