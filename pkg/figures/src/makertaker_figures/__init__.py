"""Figure rendering for maker-rebate sweep results.

Consumes the CSV tables produced by the ``makertaker sweep`` command and
draws the headline metrics against the rebate grid.  The only coupling to
the simulator is the CSV column layout in
:data:`makertaker_figures.plots.SWEEP_COLUMNS`.
"""

from .plots import (
    METRIC_COLUMNS,
    STANDARD_FIGURES,
    SWEEP_COLUMNS,
    FigureSpec,
    SweepFormatError,
    SweepPoint,
    build_figure,
    load_sweep,
    render,
    render_standard_set,
    split_baseline,
)

__all__ = [
    "METRIC_COLUMNS",
    "STANDARD_FIGURES",
    "SWEEP_COLUMNS",
    "FigureSpec",
    "SweepFormatError",
    "SweepPoint",
    "build_figure",
    "load_sweep",
    "render",
    "render_standard_set",
    "split_baseline",
]
