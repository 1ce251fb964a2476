"""Run metrics: volatility, market impact, market inefficiency, taker
total cost, and distributional statistics of returns.

All metrics are pure functions of a finished run's outputs.  Price-level
metrics are ratios to the fundamental price, so they are invariant under a
common rescaling of prices and fundamental.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal
from typing import Sequence

import numpy as np

from .core import FeeSchedule
from .simulation import RunResult


def _series(values) -> np.ndarray:
    return np.asarray(values, dtype=np.float64)


def volatility(prices: Sequence[float]) -> float:
    """Population standard deviation of per-step log returns."""
    p = _series(prices)
    if p.size < 2:
        raise ValueError("volatility needs at least two prices")
    r = np.diff(np.log(p))
    return float(r.std())


def market_impact(fill_prices: Sequence[float], p_f: float) -> float:
    """Mean premium over the fundamental paid by algorithm-agent buys.

    Signed: fills below the fundamental contribute negatively.  NaN when
    there are no fills (undefined, deliberately distinct from zero).
    """
    p = _series(fill_prices)
    if p.size == 0:
        return math.nan
    return float(np.mean((p - p_f) / p_f))


def market_inefficiency(prices: Sequence[float], p_f: float) -> tuple[float, float]:
    """Time-averaged relative deviation of price from fundamental.

    Returns (absolute, signed).  The signed variant sums (P^t - P_f)/P_f
    over t = 0..t_e and divides by t_e (the step-0 term is zero by
    construction since P^0 = P_f); positive and negative deviations cancel.
    The absolute variant averages magnitudes and is the usable inefficiency
    measure — a persistent but sign-alternating mispricing should not look
    efficient.
    """
    p = _series(prices)
    t_e = p.size - 1
    if t_e < 1:
        raise ValueError("market inefficiency needs at least two prices")
    dev = (p - p_f) / p_f
    signed = float(dev.sum() / t_e)
    absolute = float(np.abs(dev).sum() / t_e)
    return absolute, signed


def total_cost_ratio(
    fill_prices: Sequence[float], fee: FeeSchedule, p_f: float
) -> float:
    """Average total cost of an algorithm-agent buy, relative to cost plus price.

    Per fill, the cost is the premium over the fundamental plus the taker
    fee in cash: (P - P_f) + C_T * P_f; the reported figure is the mean of
    cost / (cost + P).  NaN when there are no fills.
    """
    p = _series(fill_prices)
    if p.size == 0:
        return math.nan
    fee_cash = float(fee.taker_fee * Decimal(repr(p_f)))
    cost = (p - p_f) + fee_cash
    return float(np.mean(cost / (cost + p)))


def stylized_stats(
    prices: Sequence[float], interval: int = 100
) -> tuple[float, tuple[float, float, float, float, float]]:
    """Fat-tail and volatility-clustering statistics of subsampled returns.

    Subsamples the price series every ``interval`` steps, takes log
    returns, and reports (excess kurtosis, autocorrelations of squared
    returns at lags 1..5).  Excess kurtosis is m4/m2^2 - 3 from population
    central moments, so an i.i.d. Gaussian series scores ~0 and fat tails
    score positive.  The autocorrelation uses the standard biased
    estimator (full-sample variance in the denominator), which keeps every
    lag in [-1, 1].
    """
    if interval < 1:
        raise ValueError("interval must be >= 1")
    p = _series(prices)
    sub = p[::interval]
    if sub.size < 31:
        raise ValueError(
            f"need at least 30 subsampled returns, got {max(sub.size - 1, 0)}"
        )
    r = np.diff(np.log(sub))
    dev = r - r.mean()
    m2 = float(np.mean(dev * dev))
    if m2 == 0.0:
        raise ValueError("zero return variance; kurtosis undefined")
    m4 = float(np.mean(dev ** 4))
    excess_kurtosis = m4 / (m2 * m2) - 3.0
    sq = r * r
    sq_dev = sq - sq.mean()
    denom = float(np.dot(sq_dev, sq_dev))
    if denom == 0.0:
        raise ValueError("zero squared-return variance; autocorrelation undefined")
    acf = tuple(
        float(np.dot(sq_dev[lag:], sq_dev[:-lag]) / denom) for lag in range(1, 6)
    )
    return excess_kurtosis, acf


@dataclass(frozen=True)
class MetricsBundle:
    """Every per-run metric, NaN where undefined for the given run."""

    volatility: float
    market_impact: float
    m_ie_abs: float
    m_ie_signed: float
    total_cost_ratio: float
    excess_kurtosis: float
    acf_sq: tuple[float, float, float, float, float]
    n_buy: int


_NAN_ACF = (math.nan,) * 5


def bundle_from_run(result: RunResult, interval: int = 100) -> MetricsBundle:
    """Compute all metrics for a finished run.

    Degenerate inputs (no algorithm fills, too-short series, zero
    variance) yield NaN fields instead of raising, so short diagnostic runs
    and sweep rows stay rectangular.
    """
    p_f = result.config.p_f
    prices = result.prices
    try:
        vol = volatility(prices)
    except ValueError:
        vol = math.nan
    try:
        m_ie_abs, m_ie_signed = market_inefficiency(prices, p_f)
    except ValueError:
        m_ie_abs = m_ie_signed = math.nan
    try:
        kurt, acf = stylized_stats(prices, interval)
    except ValueError:
        kurt, acf = math.nan, _NAN_ACF
    return MetricsBundle(
        volatility=vol,
        market_impact=market_impact(result.algo_fill_prices, p_f),
        m_ie_abs=m_ie_abs,
        m_ie_signed=m_ie_signed,
        total_cost_ratio=total_cost_ratio(result.algo_fill_prices, result.fee, p_f),
        excess_kurtosis=kurt,
        acf_sq=acf,
        n_buy=result.n_buy,
    )
