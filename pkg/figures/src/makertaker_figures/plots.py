"""Loading and plotting of rebate-sweep result tables.

The input is the CSV written by the ``makertaker sweep`` command.  Each
sweep point (one fee schedule) contributes one row per seed followed by a
``mean`` row and a ``sem`` row; an optional fee-free baseline uses the
same layout with both the rebate and taker-fee columns at zero.  This
module consumes only that tabular interface — it never imports the
simulator.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from matplotlib.figure import Figure

#: Column layout of a sweep CSV, in file order.
SWEEP_COLUMNS: tuple[str, ...] = (
    "r_m",
    "c_t",
    "theta_m",
    "seed",
    "volatility",
    "mi",
    "m_ie_abs",
    "m_ie_signed",
    "total_cost_ratio",
    "excess_kurtosis",
    "acf_sq_1",
    "acf_sq_2",
    "acf_sq_3",
    "acf_sq_4",
    "acf_sq_5",
    "n_buy",
    "trades",
    "maker_pnl",
    "exchange_revenue",
)

#: Columns that hold per-run measurements and may be plotted against the
#: rebate.  Everything except the fee schedule itself and the seed label.
METRIC_COLUMNS: frozenset[str] = frozenset(SWEEP_COLUMNS[4:])

#: Axis labels for the commonly plotted metrics; anything else falls back
#: to the raw column name.
_METRIC_LABELS: dict[str, str] = {
    "volatility": "volatility (std. dev. of log returns)",
    "mi": "market impact",
    "m_ie_abs": "market inefficiency",
    "m_ie_signed": "signed market inefficiency",
    "total_cost_ratio": "total taker cost ratio",
    "excess_kurtosis": "excess kurtosis of returns",
    "maker_pnl": "market maker profit",
    "exchange_revenue": "exchange revenue",
}


class SweepFormatError(ValueError):
    """Raised when a CSV does not follow the sweep table layout."""


@dataclass(frozen=True)
class SweepPoint:
    """Aggregated results for one fee schedule in a sweep.

    ``mean`` and ``sem`` map metric columns to the across-seed average
    and its standard error; ``seeds`` holds the individual runs in file
    order.  ``rebate`` is the maker rebate as a fraction of the
    fundamental price (negative values are maker fees).
    """

    rebate: float
    taker_fee: float
    is_baseline: bool
    mean: dict[str, float]
    sem: dict[str, float]
    seeds: tuple[dict[str, float], ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class FigureSpec:
    """One figure to render: a metric from a sweep CSV onto an image file.

    ``baseline`` draws the fee-free run's mean as a horizontal reference
    line (the CSV must then contain a baseline block).  ``error_bars``
    adds mean ± standard-error bars across seeds.
    """

    csv_path: Path
    metric: str
    out_path: Path
    baseline: bool = False
    error_bars: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "csv_path", Path(self.csv_path))
        object.__setattr__(self, "out_path", Path(self.out_path))
        if self.metric not in METRIC_COLUMNS:
            raise ValueError(
                f"unknown metric column {self.metric!r}; "
                f"expected one of {sorted(METRIC_COLUMNS)}"
            )


def _parse_metrics(row: dict[str, str], path: Path) -> dict[str, float]:
    out: dict[str, float] = {}
    for name in METRIC_COLUMNS:
        text = row[name]
        try:
            out[name] = float(text)
        except ValueError as exc:
            raise SweepFormatError(
                f"{path}: column {name!r} holds non-numeric value {text!r}"
            ) from exc
    return out


def load_sweep(path: Path | str) -> list[SweepPoint]:
    """Read a sweep CSV into one :class:`SweepPoint` per fee schedule.

    Points keep their file order (the baseline, when present, is written
    last by the sweep command).  Raises :class:`SweepFormatError` when the
    header does not match :data:`SWEEP_COLUMNS`, when there are no data
    rows, or when a schedule lacks its ``mean``/``sem`` summary rows.
    """
    path = Path(path)
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames
        rows = list(reader)

    if header is None:
        raise SweepFormatError(f"{path}: file is empty, expected a sweep CSV")
    missing = [name for name in SWEEP_COLUMNS if name not in header]
    if missing:
        raise SweepFormatError(
            f"{path}: not a sweep CSV, header is missing columns {missing}"
        )
    if not rows:
        raise SweepFormatError(f"{path}: sweep CSV has a header but no data rows")

    # Group rows by fee schedule, preserving first-seen order.
    grouped: dict[tuple[str, str, str], list[dict[str, str]]] = {}
    for row in rows:
        key = (row["r_m"], row["c_t"], row["theta_m"])
        grouped.setdefault(key, []).append(row)

    points: list[SweepPoint] = []
    for (r_m_text, c_t_text, _), group in grouped.items():
        try:
            rebate = float(r_m_text)
            taker_fee = float(c_t_text)
        except ValueError as exc:
            raise SweepFormatError(
                f"{path}: fee columns hold non-numeric values "
                f"{(r_m_text, c_t_text)!r}"
            ) from exc
        summaries = {
            row["seed"]: row for row in group if row["seed"] in ("mean", "sem")
        }
        if "mean" not in summaries or "sem" not in summaries:
            raise SweepFormatError(
                f"{path}: schedule r_m={r_m_text} lacks mean/sem summary rows"
            )
        seeds = tuple(
            _parse_metrics(row, path)
            for row in group
            if row["seed"] not in ("mean", "sem")
        )
        points.append(
            SweepPoint(
                rebate=rebate,
                taker_fee=taker_fee,
                is_baseline=(rebate == 0.0 and taker_fee == 0.0),
                mean=_parse_metrics(summaries["mean"], path),
                sem=_parse_metrics(summaries["sem"], path),
                seeds=seeds,
            )
        )
    return points


def split_baseline(
    points: list[SweepPoint],
) -> tuple[list[SweepPoint], SweepPoint | None]:
    """Separate sweep points into the rebate grid and the optional baseline.

    The grid comes back sorted by rebate; at most one baseline block is
    accepted.
    """
    grid = sorted(
        (p for p in points if not p.is_baseline), key=lambda p: p.rebate
    )
    baselines = [p for p in points if p.is_baseline]
    if len(baselines) > 1:
        raise SweepFormatError("sweep CSV contains more than one baseline block")
    return grid, baselines[0] if baselines else None


def build_figure(
    spec: FigureSpec,
    grid: list[SweepPoint],
    baseline: SweepPoint | None,
) -> Figure:
    """Draw ``spec.metric`` against the rebate grid and return the figure.

    The x axis is the maker rebate in percent of the fundamental price,
    covering every grid point.  The y axis is the across-seed mean, with
    standard-error bars when ``spec.error_bars`` is set, and the fee-free
    baseline as a dashed horizontal line when ``spec.baseline`` is set.
    """
    if not grid:
        raise SweepFormatError("sweep CSV contains no rebate grid points")
    if spec.baseline and baseline is None:
        raise SweepFormatError(
            f"{spec.csv_path}: baseline overlay requested but the CSV has no "
            "fee-free baseline block (rows with r_m and c_t both zero)"
        )

    x = [p.rebate * 100.0 for p in grid]
    y = [p.mean[spec.metric] for p in grid]

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    if spec.error_bars:
        yerr = [p.sem[spec.metric] for p in grid]
        if any(math.isnan(e) for e in yerr):
            yerr = None  # single-seed sweeps have no spread estimate
        label = "mean" if yerr is None else "mean ± s.e."
        ax.errorbar(x, y, yerr=yerr, marker="o", capsize=3.0, label=label)
    else:
        ax.plot(x, y, marker="o", label="mean")
    if spec.baseline:
        assert baseline is not None
        ax.axhline(
            baseline.mean[spec.metric],
            linestyle="--",
            color="tab:red",
            label="no-fee baseline",
        )
    ax.set_xlabel("maker rebate (% of fundamental price)")
    ax.set_ylabel(_METRIC_LABELS.get(spec.metric, spec.metric))
    ax.margins(x=0.05)
    ax.grid(True, alpha=0.3)
    if spec.baseline or spec.error_bars:
        ax.legend()
    fig.tight_layout()
    return fig


def render(spec: FigureSpec) -> Path:
    """Render one figure from a sweep CSV and save it to ``spec.out_path``.

    Returns the written path.  Rendering the same spec twice writes the
    same image.  On malformed input a :class:`SweepFormatError` is raised
    before anything is written.
    """
    grid, baseline = split_baseline(load_sweep(spec.csv_path))
    fig = build_figure(spec, grid, baseline)
    try:
        spec.out_path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(spec.out_path, dpi=150)
    finally:
        plt.close(fig)
    return spec.out_path


#: The standard set rendered by the command-line entry point: file stem,
#: metric column, and whether the fee-free baseline is overlaid.
STANDARD_FIGURES: tuple[tuple[str, str, bool], ...] = (
    ("volatility", "volatility", False),
    ("market_impact", "mi", False),
    ("market_inefficiency", "m_ie_abs", False),
    ("total_cost", "total_cost_ratio", True),
)


def render_standard_set(csv_path: Path | str, out_dir: Path | str) -> list[Path]:
    """Render the four headline figures plus error-bar variants of each.

    Images land in ``out_dir`` as ``<name>.png`` and
    ``<name>_errorbars.png``.  Returns the written paths.
    """
    csv_path = Path(csv_path)
    out_dir = Path(out_dir)
    written: list[Path] = []
    for stem, metric, with_baseline in STANDARD_FIGURES:
        for suffix, bars in (("", False), ("_errorbars", True)):
            spec = FigureSpec(
                csv_path=csv_path,
                metric=metric,
                out_path=out_dir / f"{stem}{suffix}.png",
                baseline=with_baseline,
                error_bars=bars,
            )
            written.append(render(spec))
    return written
