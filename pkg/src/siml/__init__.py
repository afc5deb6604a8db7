"""Sieved maximum-likelihood intensity mapping for phased sensor arrays.

The package covers the full desk-scale experiment loop: sphere grids
(`sphere_grid`), array geometry and sampling operators (`array_model`),
ground-truth fields and Wishart snapshot simulation (`field_sim`), the
sieved maximum-likelihood estimator with BIC order selection
(`estimators`), classical beamformer baselines (`beamformers`), image
metrics (`metrics`), and a config-driven experiment runner (`cli`).
"""

from .array_model import (
    SamplingMatrix,
    SensorArray,
    gram_matrix,
    random_disk_array,
    read_array_csv,
    sampling_matrix,
    steering_vector,
    write_array_csv,
)
from .beamformers import BeamformerSpec, beamform_spectrum
from .estimators import (
    BicEntry,
    BicScanResult,
    KappaEstimate,
    SievedBasis,
    bic_scan,
    eigen_sieve,
    estimate_joint,
    estimate_known_noise,
    intensity_estimate,
    kappa_project_expectation,
    log_likelihood,
    make_sieve,
    write_bic_csv,
    write_estimate,
)
from .exceptions import (
    CoherencyError,
    ConditioningError,
    ConfigError,
    IdentifiabilityError,
    InversionError,
    LikelihoodDomainError,
    ScanError,
    SimlError,
    UndefinedMetricError,
)
from .field_sim import (
    BlobSource,
    Correlation,
    PointSource,
    SampleCovariance,
    SourceModel,
    intensity_map,
    model_from_json,
    model_to_json,
    population_covariance,
    read_covariance_csv,
    sample_covariance,
    sigma_for_snr_db,
    snr_db,
    write_covariance_csv,
)
from .metrics import IntensityMap, relative_mse, rms_contrast, scale_fit, write_map_csv
from .sphere_grid import (
    Direction,
    SphereGrid,
    cap_area,
    make_cap_grid,
    make_fibonacci_grid,
    quadrature,
    write_grid_csv,
)

__version__ = "0.1.0"
