import math

import numpy as np
import pytest

from siml import (
    BlobSource,
    Correlation,
    Direction,
    PointSource,
    SampleCovariance,
    SensorArray,
    SourceModel,
    SphereGrid,
    intensity_map,
    make_fibonacci_grid,
    model_from_json,
    model_to_json,
    population_covariance,
    random_disk_array,
    read_covariance_csv,
    sample_covariance,
    sigma_for_snr_db,
    snr_db,
    steering_vector,
    write_covariance_csv,
)

ZHAT = Direction(0.0, 0.0, 1.0)
XHAT = Direction(1.0, 0.0, 0.0)


def two_point_model(power=1.0, rho=None):
    components = (
        PointSource(direction=ZHAT, power=power),
        PointSource(direction=XHAT, power=power),
    )
    correlations = () if rho is None else (Correlation(i=0, j=1, rho=rho),)
    return SourceModel(components=components, correlations=correlations)


class TestSourceModelValidation:
    def test_negative_power_rejected(self):
        with pytest.raises(ValueError):
            PointSource(direction=ZHAT, power=-1.0)

    def test_nonpositive_width_rejected(self):
        with pytest.raises(ValueError):
            BlobSource(center=ZHAT, width=0.0, peak_power=1.0)

    def test_rho_magnitude_bounded(self):
        with pytest.raises(ValueError):
            Correlation(i=0, j=1, rho=1.2)

    def test_correlation_must_reference_points(self):
        components = (
            PointSource(direction=ZHAT, power=1.0),
            BlobSource(center=XHAT, width=0.1, peak_power=1.0),
        )
        with pytest.raises(ValueError, match="point"):
            SourceModel(components=components, correlations=(Correlation(0, 1, 0.5),))

    def test_non_psd_correlations_rejected(self):
        # pairwise coefficients (1, 1, -1) admit no valid joint distribution
        components = tuple(
            PointSource(direction=d, power=1.0)
            for d in (ZHAT, XHAT, Direction(0.0, 1.0, 0.0))
        )
        correlations = (
            Correlation(0, 1, 1.0),
            Correlation(0, 2, 1.0),
            Correlation(1, 2, -1.0),
        )
        with pytest.raises(ValueError, match="positive semidefinite"):
            SourceModel(components=components, correlations=correlations)

    def test_full_correlation_on_boundary_accepted(self):
        model = two_point_model(rho=1.0)
        assert len(model.correlations) == 1


class TestIntensityMap:
    def test_empty_model_all_zeros(self):
        grid = make_fibonacci_grid(64)
        assert np.array_equal(intensity_map(SourceModel(), grid), np.zeros(64))

    def test_blob_center_value(self):
        grid = SphereGrid(
            points=np.array([[0.0, 0.0, 1.0]]), weights=np.array([1.0]), kind="cap",
        )
        model = SourceModel(components=(BlobSource(center=ZHAT, width=0.05, peak_power=2.5),))
        assert intensity_map(model, grid)[0] == pytest.approx(2.5)

    def test_blob_one_sigma_profile(self):
        width = 0.05
        off_axis = np.array([math.sin(width), 0.0, math.cos(width)])
        grid = SphereGrid(
            points=np.vstack([[0.0, 0.0, 1.0], off_axis]),
            weights=np.array([1.0, 1.0]),
            kind="cap",
        )
        model = SourceModel(components=(BlobSource(center=ZHAT, width=width, peak_power=1.0),))
        values = intensity_map(model, grid)
        assert values[1] == pytest.approx(math.exp(-0.5), rel=1e-10)

    def test_point_deposits_power_over_pixel_weight(self):
        grid = make_fibonacci_grid(200)
        model = SourceModel(components=(PointSource(direction=ZHAT, power=3.0),))
        values = intensity_map(model, grid)
        hot = int(np.argmax(grid.points @ ZHAT.as_array()))
        assert values[hot] == pytest.approx(3.0 / grid.weights[hot])
        assert np.count_nonzero(values) == 1
        # the map integrates back to the deposited power
        assert np.sum(grid.weights * values) == pytest.approx(3.0)


class TestPopulationCovariance:
    def test_empty_model_gives_noise_identity(self):
        arr = random_disk_array(6, 1.0, seed=0)
        grid = make_fibonacci_grid(32)
        cov = population_covariance(SourceModel(), arr, 1.0, grid)
        assert np.allclose(cov, np.eye(6))

    def test_single_point_rank_one(self):
        arr = random_disk_array(8, 1.0, seed=1)
        grid = make_fibonacci_grid(32)
        q = 2.3
        model = SourceModel(components=(PointSource(direction=XHAT, power=q),))
        cov = population_covariance(model, arr, 0.0, grid)
        a = steering_vector(arr, XHAT)
        assert np.allclose(cov, q * np.outer(a, a.conj()), atol=1e-12)
        eigvals = np.linalg.eigvalsh(cov)
        assert np.sum(eigvals > 1e-9) == 1
        assert np.real(np.trace(cov)) == pytest.approx(q * arr.n_sensors)

    def test_fully_correlated_pair_rank_one(self):
        # expanding the kernel of two coherent unit-power points gives the
        # rank-one outer product of the summed steering vectors
        arr = random_disk_array(10, 1.0, seed=2)
        grid = make_fibonacci_grid(32)
        q = 0.7
        model = two_point_model(power=q, rho=1.0)
        cov = population_covariance(model, arr, 0.0, grid)
        a1 = steering_vector(arr, ZHAT)
        a2 = steering_vector(arr, XHAT)
        s = a1 + a2
        assert np.allclose(cov, q * np.outer(s, s.conj()), atol=1e-10)
        eigvals = np.linalg.eigvalsh(cov)
        assert np.sum(eigvals > 1e-9 * eigvals[-1]) == 1

    def test_negative_sigma_rejected(self):
        arr = random_disk_array(4, 1.0, seed=3)
        grid = make_fibonacci_grid(16)
        with pytest.raises(ValueError):
            population_covariance(SourceModel(), arr, -0.1, grid)

    @pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
    def test_random_models_psd(self, seed):
        rng = np.random.default_rng(seed)
        arr = random_disk_array(12, 1.0, seed=seed)
        grid = make_fibonacci_grid(128)
        comps = []
        for _ in range(rng.integers(1, 4)):
            comps.append(
                PointSource(
                    direction=Direction.from_vector(rng.standard_normal(3)),
                    power=float(rng.uniform(0.1, 2.0)),
                )
            )
        for _ in range(rng.integers(0, 3)):
            comps.append(
                BlobSource(
                    center=Direction.from_vector(rng.standard_normal(3)),
                    width=float(rng.uniform(0.02, 0.3)),
                    peak_power=float(rng.uniform(0.1, 2.0)),
                )
            )
        rho = rng.uniform(0, 0.9) * np.exp(2j * math.pi * rng.random())
        model = SourceModel(
            components=tuple(comps),
            correlations=(Correlation(0, 1, complex(rho)),) if len(comps) >= 2 and isinstance(comps[1], PointSource) else (),
        )
        cov = population_covariance(model, arr, float(rng.uniform(0, 1)), grid)
        assert np.allclose(cov, cov.conj().T)
        eigvals = np.linalg.eigvalsh(cov)
        assert eigvals[0] >= -1e-10 * max(1.0, eigvals[-1])


class TestSampleCovariance:
    def test_zero_covariance(self):
        est = sample_covariance(np.zeros((5, 5)), 10, seed=0)
        assert np.array_equal(est.matrix, np.zeros((5, 5)))

    def test_deterministic_given_seed(self):
        sigma = np.eye(6)
        a = sample_covariance(sigma, 50, seed=42)
        b = sample_covariance(sigma, 50, seed=42)
        assert np.array_equal(a.matrix, b.matrix)

    def test_single_snapshot_rank_one(self):
        est = sample_covariance(np.eye(8), 1, seed=3)
        eigvals = np.linalg.eigvalsh(est.matrix)
        assert np.sum(eigvals > 1e-12 * eigvals[-1]) == 1
        assert est.n_snapshots == 1

    def test_non_psd_rejected(self):
        bad = np.diag([1.0, -0.5])
        with pytest.raises(ValueError, match="PSD"):
            sample_covariance(bad, 10, seed=0)

    def test_non_hermitian_rejected(self):
        bad = np.array([[1.0, 1.0], [0.0, 1.0]])
        with pytest.raises(ValueError, match="Hermitian"):
            sample_covariance(bad, 10, seed=0)

    def test_montecarlo_mean_matches_population(self):
        # unbiasedness: the average over 200 independent draws concentrates
        # around the population covariance
        n_dim, n_snap, n_seeds = 20, 500, 200
        acc = np.zeros((n_dim, n_dim), dtype=complex)
        for seed in range(n_seeds):
            acc += sample_covariance(np.eye(n_dim), n_snap, seed=seed).matrix
        mean = acc / n_seeds
        rel = np.linalg.norm(mean - np.eye(n_dim)) / np.linalg.norm(np.eye(n_dim))
        assert rel < 0.02

    def test_sqrt_n_concentration(self):
        # quadrupling the snapshot count should roughly halve the error
        rng = np.random.default_rng(11)
        x = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
        sigma = x @ x.conj().T / 16
        sigma = 0.5 * (sigma + sigma.conj().T)
        norm = np.linalg.norm(sigma)

        def mean_err(n_snap):
            errs = [
                np.linalg.norm(sample_covariance(sigma, n_snap, seed=s).matrix - sigma) / norm
                for s in range(20)
            ]
            return np.mean(errs)

        ratio = mean_err(250) / mean_err(1000)
        assert 1.5 <= ratio <= 2.5

    def test_distinct_seeds_decorrelate(self):
        sigma = np.eye(20)
        a = sample_covariance(sigma, 100, seed=1).matrix - sigma
        b = sample_covariance(sigma, 100, seed=2).matrix - sigma
        va, vb = a.ravel(), b.ravel()
        corr = abs(np.vdot(va, vb)) / (np.linalg.norm(va) * np.linalg.norm(vb))
        assert corr < 0.1

    def test_circular_symmetry(self):
        # the unconjugated second moment of circular draws vanishes
        n_dim, n_snap = 20, 10000
        sigma = np.eye(n_dim)
        eigvals, eigvecs = np.linalg.eigh(sigma)
        root = eigvecs * np.sqrt(np.clip(eigvals, 0, None))
        rng = np.random.default_rng(7)
        snaps = root @ (
            (rng.standard_normal((n_dim, n_snap)) + 1j * rng.standard_normal((n_dim, n_snap)))
            / math.sqrt(2.0)
        )
        pseudo = snaps @ snaps.T / n_snap
        cov = snaps @ snaps.conj().T / n_snap
        assert np.linalg.norm(pseudo) < 0.05 * np.linalg.norm(cov)


class TestSnr:
    def test_zero_db(self):
        arr = random_disk_array(10, 1.0, seed=4)
        grid = make_fibonacci_grid(64)
        model = SourceModel(components=(PointSource(direction=ZHAT, power=1.0),))
        # a unit-power point contributes trace L, so sigma = 1 gives 0 dB
        assert snr_db(model, arr, 1.0, grid) == pytest.approx(0.0, abs=1e-12)

    def test_ten_db(self):
        arr = random_disk_array(10, 1.0, seed=4)
        grid = make_fibonacci_grid(64)
        model = SourceModel(components=(PointSource(direction=ZHAT, power=1.0),))
        assert snr_db(model, arr, 0.1, grid) == pytest.approx(10.0, abs=1e-12)

    def test_five_db_sigma(self):
        arr = random_disk_array(10, 1.0, seed=4)
        grid = make_fibonacci_grid(64)
        model = SourceModel(components=(PointSource(direction=ZHAT, power=1.0),))
        sigma = 10.0 ** (-0.5)
        assert snr_db(model, arr, sigma, grid) == pytest.approx(5.0, abs=1e-12)
        assert sigma_for_snr_db(model, arr, 5.0, grid) == pytest.approx(sigma, rel=1e-12)

    def test_zero_sigma_rejected(self):
        arr = random_disk_array(4, 1.0, seed=4)
        grid = make_fibonacci_grid(16)
        model = SourceModel(components=(PointSource(direction=ZHAT, power=1.0),))
        with pytest.raises(ValueError):
            snr_db(model, arr, 0.0, grid)


class TestSerialization:
    def test_model_json_round_trip(self):
        model = SourceModel(
            components=(
                PointSource(direction=ZHAT, power=1.5),
                BlobSource(center=XHAT, width=0.07, peak_power=0.4),
                PointSource(direction=Direction.from_vector([1, 1, 1]), power=0.2),
            ),
            correlations=(Correlation(0, 2, 0.3 - 0.2j),),
        )
        back = model_from_json(model_to_json(model))
        assert back == model

    def test_unknown_component_type_rejected(self):
        with pytest.raises(ValueError, match="component type"):
            model_from_json({"components": [{"type": "ring"}]})

    def test_covariance_csv_round_trip(self, tmp_path):
        cov = sample_covariance(np.eye(7), 30, seed=5)
        csv_path, meta_path = tmp_path / "cov.csv", tmp_path / "cov.json"
        write_covariance_csv(cov, csv_path, meta_path)
        back = read_covariance_csv(csv_path, meta_path)
        assert np.array_equal(back.matrix, cov.matrix)
        assert back.n_snapshots == 30

    def test_sample_covariance_dim_guard(self):
        with pytest.raises(ValueError):
            SampleCovariance(matrix=np.ones((2, 3)), n_snapshots=5)
