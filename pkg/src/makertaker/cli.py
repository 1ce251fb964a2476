"""Command-line front end: single runs, the rebate sweep, and validation.

The sweep CSV schema (one row per (rebate, seed), then mean and standard-
error rows per rebate point) is the stable interface consumed by the
plotting package.  Rate columns are exact decimal strings; a no-fee
baseline row has r_m = 0 and c_t = 0, which no enabled schedule can
produce (an enabled zero-rebate schedule still charges c_t = r_ex).
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from decimal import Decimal
from typing import Optional, Sequence

import numpy as np

from .core import (
    BUY,
    ConfigError,
    FeeSchedule,
    SimConfig,
    coerce_value,
    fee_schedule_from_rebate,
    load_config,
    no_fee_schedule,
    parse_config,
)
from .metrics import bundle_from_run, stylized_stats
from .simulation import RunResult, run

#: Maker-rebate grid of the standard experiment, smallest to largest.
GRID_REBATES: tuple[str, ...] = (
    "-0.100%", "-0.075%", "-0.050%", "-0.025%", "0.000%", "0.025%",
    "0.050%", "0.075%", "0.100%", "0.125%", "0.140%", "0.145%",
)

CSV_COLUMNS: tuple[str, ...] = (
    "r_m", "c_t", "theta_m", "seed",
    "volatility", "mi", "m_ie_abs", "m_ie_signed", "total_cost_ratio",
    "excess_kurtosis", "acf_sq_1", "acf_sq_2", "acf_sq_3", "acf_sq_4",
    "acf_sq_5", "n_buy", "trades", "maker_pnl", "exchange_revenue",
)

#: Reference statistics for the standard full-scale configuration at zero
#: rebate: excess kurtosis and squared-return autocorrelations at lags
#: 1-5.  `validate` prints them for side-by-side comparison; the pass
#: criterion is positivity of the measured values, not closeness to these.
REFERENCE_KURTOSIS = 17.54
REFERENCE_ACF_SQ = (0.045, 0.045, 0.044, 0.042, 0.040)


def _rate_str(rate: Decimal) -> str:
    """Canonical minimal decimal string for a fee rate ('0.0005', '0')."""
    return str(rate.normalize())


def _cell(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _format_row(fee: FeeSchedule, seed_label: str, cells: Sequence) -> list[str]:
    return [
        _rate_str(fee.maker_rebate),
        _rate_str(fee.taker_fee),
        _rate_str(fee.maker_base_spread),
        seed_label,
        *map(_cell, cells),
    ]


def _write_csv(stream, rows) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    writer.writerows(rows)


def _metrics_cells(result: RunResult) -> tuple:
    """Numeric cells for the columns after `seed`, in schema order."""
    b = bundle_from_run(result)
    return (
        b.volatility, b.market_impact, b.m_ie_abs, b.m_ie_signed,
        b.total_cost_ratio, b.excess_kurtosis, *b.acf_sq,
        b.n_buy, result.n_trades, result.maker_pnl(), result.fees.exchange,
    )


def _point_fee(rebate: Optional[str], config: SimConfig) -> FeeSchedule:
    """Fee schedule for one sweep point; None marks the no-fee baseline."""
    if rebate is None:
        return no_fee_schedule(config.re_m)
    return fee_schedule_from_rebate(rebate, config.re_m, config.r_ex)


def _sweep_task(task: tuple[SimConfig, Optional[str]]) -> tuple:
    config, rebate = task
    return _metrics_cells(run(config, _point_fee(rebate, config)))


def _aggregate_rows(fee: FeeSchedule, block: list[tuple]) -> list[list[str]]:
    """Mean and standard-error rows over one rebate point's seeds."""
    arr = np.asarray(block, dtype=np.float64)
    mean = arr.mean(axis=0)
    if arr.shape[0] > 1:
        sem = arr.std(axis=0, ddof=1) / math.sqrt(arr.shape[0])
    else:
        sem = np.full(arr.shape[1], math.nan)
    return [
        _format_row(fee, "mean", mean),
        _format_row(fee, "sem", sem),
    ]


class _EventLogger:
    """CSV sink for order-book events (prices in ticks)."""

    def __init__(self, stream):
        self._writer = csv.writer(stream, lineterminator="\n")
        self._writer.writerow(("step", "event", "order_id", "side", "price", "owner"))

    def __call__(self, step, event, order_id, side, price, owner) -> None:
        self._writer.writerow(
            (step, event, order_id, "buy" if side == BUY else "sell", price, owner)
        )


def _write_trade_log(path: str, result: RunResult) -> None:
    fee_cash = 0.0
    if result.fee.enabled:
        fee_cash = float(result.fee.taker_fee * Decimal(repr(result.config.p_f)))
    dp = result.config.delta_p
    with open(path, "w", newline="") as stream:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(("step", "price", "buyer", "seller", "taker_side", "taker_fee"))
        for tr in result.trades:
            writer.writerow((
                tr.step, repr(tr.price * dp), tr.buyer, tr.seller,
                "buy" if tr.taker_side == BUY else "sell", repr(fee_cash),
            ))


def _parse_seeds(text: str) -> list[int]:
    """'30' means seeds 1..30; '4,7,9' means exactly those."""
    text = text.strip()
    try:
        if "," in text:
            seeds = [int(part) for part in text.split(",")]
        else:
            seeds = list(range(1, int(text) + 1))
    except ValueError as exc:
        raise ConfigError(f"bad --seeds value {text!r}") from exc
    if not seeds:
        raise ConfigError("seed list must be nonempty")
    return seeds


def _config_from_args(args) -> SimConfig:
    overrides = {}
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key = key.strip()
        overrides[key] = coerce_value(key, value.strip())
    if args.t_end is not None:
        overrides["t_end"] = args.t_end
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if args.config:
        return load_config(args.config, overrides)
    return parse_config("", overrides)


def _fee_from_args(args, config: SimConfig) -> FeeSchedule:
    if args.no_fees and args.rebate is not None:
        raise ConfigError("--rebate and --no-fees are mutually exclusive")
    if args.no_fees:
        return no_fee_schedule(config.re_m)
    rebate = args.rebate if args.rebate is not None else 0
    return fee_schedule_from_rebate(rebate, config.re_m, config.r_ex)


def cmd_run(args) -> int:
    config = _config_from_args(args)
    fee = _fee_from_args(args, config)
    event_file = None
    sink = None
    if args.log_events:
        event_file = open(args.log_events, "w", newline="")
        sink = _EventLogger(event_file)
    try:
        result = run(
            config, fee,
            check_invariants=args.check,
            collect_trades=args.trade_log is not None,
            event_sink=sink,
        )
    finally:
        if event_file is not None:
            event_file.close()
    if args.trade_log:
        _write_trade_log(args.trade_log, result)
    rows = [_format_row(fee, str(config.seed), _metrics_cells(result))]
    if args.out:
        with open(args.out, "w", newline="") as stream:
            _write_csv(stream, rows)
    else:
        _write_csv(sys.stdout, rows)
    return 0


def cmd_sweep(args) -> int:
    config = _config_from_args(args)
    if args.rebates:
        rebates: list[Optional[str]] = [r.strip() for r in args.rebates.split(",")]
    else:
        rebates = list(GRID_REBATES)
    if not args.no_baseline:
        rebates.append(None)
    seeds = _parse_seeds(args.seeds)
    # Materialize every schedule up front so a bad grid point aborts before
    # any simulation time is spent.
    fees = [_point_fee(reb, config) for reb in rebates]
    tasks = [
        (replace(config, seed=seed), reb) for reb in rebates for seed in seeds
    ]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_task, tasks, chunksize=1))
    else:
        results = [_sweep_task(task) for task in tasks]

    rows: list[list[str]] = []
    index = 0
    for fee in fees:
        block = []
        for seed in seeds:
            cells = results[index]
            index += 1
            rows.append(_format_row(fee, str(seed), cells))
            block.append(cells)
        rows.extend(_aggregate_rows(fee, block))
    if args.out:
        with open(args.out, "w", newline="") as stream:
            _write_csv(stream, rows)
    else:
        _write_csv(sys.stdout, rows)
    return 0


def _synthetic_gaussian_prices(config: SimConfig) -> np.ndarray:
    """Negative-control series: i.i.d. Gaussian log returns, which have no
    fat tails and no volatility clustering."""
    rng = np.random.default_rng(config.seed)
    log_returns = rng.normal(0.0, 1e-3, config.t_end)
    log_price = np.concatenate(([0.0], np.cumsum(log_returns)))
    return config.p_f * np.exp(log_price)


def cmd_validate(args) -> int:
    config = _config_from_args(args)
    seeds = _parse_seeds(args.seeds)
    fee = fee_schedule_from_rebate(0, config.re_m, config.r_ex)
    report = []
    passes = 0
    for seed in seeds:
        cfg = replace(config, seed=seed)
        if args.synthetic_gaussian:
            prices = _synthetic_gaussian_prices(cfg)
        else:
            prices = run(cfg, fee).prices
        try:
            kurt, acf = stylized_stats(prices, args.interval)
        except ValueError as exc:
            raise ConfigError(f"validation needs a longer run: {exc}") from exc
        ok = kurt > 0.0 and all(a > 0.0 for a in acf)
        passes += ok
        report.append((str(seed), kurt, acf, "pass" if ok else "FAIL"))

    acf_heads = "  ".join(f"{f'acf_sq_{i}':>8}" for i in range(1, 6))
    print(f"{'seed':>9}  {'excess_kurt':>11}  {acf_heads}  result")
    for label, kurt, acf, verdict in report:
        acf_cells = "  ".join(f"{a:>8.4f}" for a in acf)
        print(f"{label:>9}  {kurt:>11.4f}  {acf_cells}  {verdict}")
    ref_cells = "  ".join(f"{a:>8.4f}" for a in REFERENCE_ACF_SQ)
    print(f"{'reference':>9}  {REFERENCE_KURTOSIS:>11.4f}  {ref_cells}")

    needed = math.ceil(0.8 * len(seeds))
    overall = passes >= needed
    print(
        f"validate: {'PASS' if overall else 'FAIL'} "
        f"({passes}/{len(seeds)} seeds show fat tails and volatility "
        f"clustering; need {needed})"
    )
    return 0 if overall else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="makertaker",
        description="Agent-based stock market with maker-taker fees",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", metavar="FILE",
                       help="flat key=value config file")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override one config field (repeatable)")
        p.add_argument("--t-end", type=int, default=None, metavar="N",
                       help="shorthand for --set t_end=N")

    p = sub.add_parser("run", help="single simulation run")
    add_common(p)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--rebate", metavar="RATE",
                   help="maker rebate, e.g. '0.050%%' or 0.0005 (default 0)")
    p.add_argument("--no-fees", action="store_true",
                   help="run the no-fee baseline market")
    p.add_argument("--out", metavar="FILE", help="metrics CSV (default stdout)")
    p.add_argument("--log-events", metavar="FILE", help="order-book event CSV")
    p.add_argument("--trade-log", metavar="FILE", help="trade CSV")
    p.add_argument("--check", action="store_true",
                   help="assert invariants every step (slow)")

    p = sub.add_parser("sweep", help="rebate grid x seeds experiment")
    add_common(p)
    p.add_argument("--seeds", default="30", metavar="SPEC",
                   help="count N (seeds 1..N) or comma list (default 30)")
    p.add_argument("--rebates", metavar="LIST",
                   help="comma list of maker rebates (default: standard grid)")
    p.add_argument("--no-baseline", action="store_true",
                   help="omit the no-fee baseline point")
    p.add_argument("--out", metavar="FILE", help="sweep CSV (default stdout)")
    p.add_argument("--jobs", type=int, default=1, metavar="N",
                   help="worker processes (default 1; output is identical)")

    p = sub.add_parser(
        "validate",
        help="check fat tails and volatility clustering at zero rebate",
    )
    add_common(p)
    p.add_argument("--seeds", default="5", metavar="SPEC",
                   help="count N (seeds 1..N) or comma list (default 5)")
    p.add_argument("--interval", type=int, default=100, metavar="K",
                   help="return subsampling stride (default 100)")
    p.add_argument("--synthetic-gaussian", action="store_true",
                   help="negative control: score i.i.d. Gaussian returns "
                        "instead of simulation output (must FAIL)")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"run": cmd_run, "sweep": cmd_sweep, "validate": cmd_validate}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
