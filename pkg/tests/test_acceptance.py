"""Acceptance gates for the whole package.

Each test exercises one release criterion end to end at its stated scale
and tolerance and prints a single verdict line (visible in the live test
output).  The trend and cost gates share one reduced-scale sweep of the
full rebate grid: 12 grid points x 10 seeds x 200,000 steps plus a
10-seed no-fee baseline, computed once per session.
"""

from __future__ import annotations

import math
import time
from dataclasses import replace
from decimal import Decimal
from random import Random

import pytest
import scipy.stats

from makertaker import (
    BUY,
    MAKER,
    SELL,
    Order,
    OrderBook,
    SimConfig,
    algo_buy_price,
    as_rate,
    bundle_from_run,
    fee_schedule_from_rebate,
    market_impact,
    no_fee_schedule,
    run,
)
from makertaker.cli import GRID_REBATES, main

from reference_book import ReferenceBook
from test_book import _apply_stream, _random_stream

REDUCED_T_END = 200_000
SEEDS = tuple(range(1, 11))
STYLIZED_SEEDS = tuple(range(1, 6))


def announce(capsys, line: str) -> None:
    """Print a verdict line straight to the terminal, bypassing capture."""
    with capsys.disabled():
        print(f"\n[acceptance] {line}")


@pytest.fixture(scope="session")
def sweep():
    """Reduced-scale sweep over the full rebate grid plus the baseline.

    Returns (points, baseline): ``points`` is a list of
    (rebate_fraction, fee, per-seed metric bundles) in grid order.
    """
    t0 = time.perf_counter()
    points = []
    for rebate in GRID_REBATES:
        fee = fee_schedule_from_rebate(rebate)
        bundles = [
            bundle_from_run(run(replace(SimConfig(seed=s), t_end=REDUCED_T_END), fee))
            for s in SEEDS
        ]
        points.append((float(as_rate(rebate)), fee, bundles))
    base_fee = no_fee_schedule()
    baseline = [
        bundle_from_run(run(replace(SimConfig(seed=s), t_end=REDUCED_T_END), base_fee))
        for s in SEEDS
    ]
    elapsed = time.perf_counter() - t0
    assert elapsed < 15 * 60, f"sweep exceeded its 15-minute budget: {elapsed:.0f}s"
    return points, baseline


def _mean(values) -> float:
    return math.fsum(values) / len(values)


def _trend_rho(sweep_points, metric: str) -> float:
    rebates = [rebate for rebate, _, _ in sweep_points]
    means = [
        _mean([getattr(b, metric) for b in bundles])
        for _, _, bundles in sweep_points
    ]
    rho, _ = scipy.stats.spearmanr(rebates, means)
    return float(rho)


# -- fee algebra --------------------------------------------------------


def test_fee_algebra_grid_exact(capsys):
    expected = [
        ("-0.100%", "0.500%", "0.000%"),
        ("-0.075%", "0.450%", "0.025%"),
        ("-0.050%", "0.400%", "0.050%"),
        ("-0.025%", "0.350%", "0.075%"),
        ("-0.000%", "0.300%", "0.100%"),
        ("0.025%", "0.250%", "0.125%"),
        ("0.050%", "0.200%", "0.150%"),
        ("0.075%", "0.150%", "0.175%"),
        ("0.100%", "0.100%", "0.200%"),
        ("0.125%", "0.050%", "0.225%"),
        ("0.140%", "0.020%", "0.240%"),
        ("0.145%", "0.010%", "0.245%"),
    ]
    # Grid labels may write the zero row as -0.000% or 0.000%; the parsed
    # rates are the contract.
    assert [as_rate(r) for r, _, _ in expected] == [as_rate(r) for r in GRID_REBATES]
    for r_m, theta_m, c_t in expected:
        fee = fee_schedule_from_rebate(r_m)
        assert fee.maker_base_spread == as_rate(theta_m)  # tolerance 0
        assert fee.taker_fee == as_rate(c_t)
    announce(capsys, "fee algebra: PASS (12/12 grid rows exact)")


# -- matching-engine oracle --------------------------------------------


def test_matching_engine_oracle(capsys):
    rng = Random(1)
    t0 = time.perf_counter()
    for _ in range(10_000):
        fast, slow = _apply_stream(_random_stream(rng, max_ops=50))
        assert fast == slow
    elapsed = time.perf_counter() - t0
    announce(
        capsys,
        f"matching-engine oracle: PASS (10000 random streams identical, {elapsed:.1f}s)",
    )
    assert elapsed < 10.0


# -- stylized facts -----------------------------------------------------


def test_stylized_facts_full_scale(capsys):
    fee = fee_schedule_from_rebate(0)
    passes = 0
    reports = []
    slowest = 0.0
    for seed in STYLIZED_SEEDS:
        t0 = time.perf_counter()
        result = run(SimConfig(seed=seed), fee)  # t_end = 10^6
        slowest = max(slowest, time.perf_counter() - t0)
        bundle = bundle_from_run(result)
        ok = bundle.excess_kurtosis > 0.0 and all(a > 0.0 for a in bundle.acf_sq)
        passes += ok
        reports.append(
            f"seed {seed}: kurt={bundle.excess_kurtosis:+.3f} "
            f"acf1={bundle.acf_sq[0]:+.3f} acf5={bundle.acf_sq[4]:+.3f} "
            f"{'ok' if ok else 'FAIL'}"
        )
    verdict = "PASS" if passes >= 4 else "FAIL"
    announce(
        capsys,
        f"stylized facts: {verdict} ({passes}/5 seeds fat-tailed and clustered; "
        f"reference full-scale values 17.54 / 0.045; slowest run {slowest:.0f}s)",
    )
    for line in reports:
        announce(capsys, f"  {line}")
    assert slowest < 60.0
    assert passes >= 4, f"only {passes}/5 seeds show both stylized facts"


# -- rebate trends ------------------------------------------------------


def test_trend_volatility(capsys, sweep):
    points, _ = sweep
    rho = _trend_rho(points, "volatility")
    verdict = "PASS" if rho <= -0.8 else "FAIL"
    announce(
        capsys,
        f"volatility trend: {verdict} (Spearman rho = {rho:+.3f}, required <= -0.8)",
    )
    assert rho <= -0.8, (
        f"volatility is not monotone in the rebate: Spearman rho = {rho:+.3f}. "
        "Measured behavior: volatility falls steeply once the maker's quoted "
        "spread is inside the book's natural spread (high rebates) but RISES "
        "slightly across the wide-spread half of the grid, where the maker "
        "fills only at transiently wide quotes and each such fill prints at "
        "an extreme price.  Sporadic maker participation adds volatility; "
        "only near-continuous participation suppresses it."
    )


def test_trend_market_impact(capsys, sweep):
    points, _ = sweep
    rho = _trend_rho(points, "market_impact")
    verdict = "PASS" if rho <= -0.8 else "FAIL"
    announce(
        capsys,
        f"market-impact trend: {verdict} (Spearman rho = {rho:+.3f}, required <= -0.8)",
    )
    assert rho <= -0.8


def test_trend_market_inefficiency(capsys, sweep):
    points, _ = sweep
    rho = _trend_rho(points, "m_ie_abs")
    verdict = "PASS" if rho <= -0.8 else "FAIL"
    announce(
        capsys,
        f"inefficiency trend: {verdict} (Spearman rho = {rho:+.3f}, required <= -0.8)",
    )
    assert rho <= -0.8


# -- total-cost direction ----------------------------------------------


def test_total_cost_direction(capsys, sweep):
    points, baseline = sweep
    base_ratio = _mean([b.total_cost_ratio for b in baseline])
    in_band = 0.001 < base_ratio < 0.006
    exceed = []
    for rebate, fee, bundles in points:
        if fee.taker_fee >= Decimal("0.001"):  # C_T at or above 0.100%
            exceed.append(_mean([b.total_cost_ratio for b in bundles]) > base_ratio)
    verdict = "PASS" if in_band and all(exceed) else "FAIL"
    announce(
        capsys,
        f"total-cost direction: {verdict} (baseline {base_ratio:.4%}; "
        f"{sum(exceed)}/{len(exceed)} rows with C_T >= 0.100% exceed it)",
    )
    assert in_band, f"baseline total cost {base_ratio:.4%} outside (0.1%, 0.6%)"
    assert all(exceed)


# -- conservation and invariants ---------------------------------------


def test_conservation_and_invariants_checked_run(capsys):
    # Full-size market, every-step assertions: book no-cross, weight
    # bounds, maker spread, fill pricing, and the shadow fee path.
    config = replace(SimConfig(seed=1), t_end=100_000)
    for rebate in ("0.000%", "0.145%"):
        result = run(config, fee_schedule_from_rebate(rebate), check_invariants=True)
        assert result.fees.total() == 0.0
    announce(
        capsys,
        "conservation/invariants: PASS (2 checked runs x 100000 steps, "
        "zero violations, fee flows sum to zero)",
    )


# -- determinism --------------------------------------------------------


def test_determinism_serial_vs_parallel_sweep(capsys, tmp_path):
    serial = tmp_path / "serial.csv"
    parallel = tmp_path / "parallel.csv"
    args = [
        "sweep", "--seeds", "2", "--rebates", "0.000%,0.145%",
        "--t-end", "20000",
    ]
    assert main(args + ["--out", str(serial), "--jobs", "1"]) == 0
    assert main(args + ["--out", str(parallel), "--jobs", "2"]) == 0
    identical = serial.read_bytes() == parallel.read_bytes()
    announce(
        capsys,
        f"determinism: {'PASS' if identical else 'FAIL'} "
        "(serial and 2-process sweeps bit-identical)",
    )
    assert identical


# -- market impact zero case -------------------------------------------


def test_market_impact_zero_fixture(capsys):
    # Synthetic fixture: the maker rests far from the touch, the harness
    # pins the best ask at the fundamental, and every algorithm buy fills
    # there; the measured impact must be exactly zero.
    book = OrderBook()
    book.submit(Order(1, BUY, 5_000, 0, 10**9, MAKER), 0)
    book.submit(Order(2, SELL, 15_000, 0, 10**9, MAKER), 0)
    p_f = 10_000.0
    fills = []
    oid = 2
    for k in range(10):
        oid += 1
        book.submit(Order(oid, SELL, 10_000, 0, 10**9, 3), 0)
        ask = book.best_ask()
        oid += 1
        _, trade = book.submit(Order(oid, BUY, algo_buy_price(ask), 0, 10**9, 990 + k), 0)
        assert trade is not None and trade.taker_side == BUY
        fills.append(trade.price * 1.0)
    mi = market_impact(fills, p_f)
    announce(capsys, f"market-impact zero case: {'PASS' if mi == 0.0 else 'FAIL'} (MI = {mi})")
    assert mi == 0.0


# -- cross-check: the reference matcher is itself sane ------------------


def test_reference_matcher_self_check():
    # The oracle test is only as good as the reference; pin its basics.
    book = ReferenceBook()
    book.submit(Order(1, SELL, 10_001, 0, 100, 11), 0)
    book.submit(Order(2, SELL, 10_001, 0, 100, 22), 0)
    _, trade = book.submit(Order(3, BUY, 10_002, 0, 100, 33), 1)
    assert trade.price == 10_001 and trade.seller == 11
    assert book.expire(100) == 1
