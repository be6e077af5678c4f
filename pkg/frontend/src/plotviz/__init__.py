"""plotviz: two-panel rate-region figures from simulator frontier CSVs."""

from .render import (
    CSV_COLUMNS,
    PlotDataError,
    PlotSpec,
    read_frontier,
    render,
    series_label,
)

__version__ = "0.1.0"

__all__ = [
    "CSV_COLUMNS",
    "PlotDataError",
    "PlotSpec",
    "read_frontier",
    "render",
    "series_label",
]
