"""Read-only figure generation for sieved-ML experiment artifacts."""

from .figures import FigureSpec, load_spec, plot_bic, plot_comparison, plot_map
from .projections import project_points
from .schemas import (
    SchemaError,
    read_bic_csv,
    read_map_csv,
    read_metrics_csv,
    read_summary_csv,
)

__version__ = "0.1.0"
