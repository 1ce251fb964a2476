"""Agent behaviors: learning normal agents, buy-only algorithm agents, and
a position-based market maker.

Normal agents blend a fundamental view (price should revert to its
fundamental value), a trend-following view (the realized log return over
the agent's lookback window), and noise into an expected return, then draw
an order price around the implied expected price — buying when they expect
to pay less than their valuation, selling otherwise.  The weights on the
first two views adapt to recent realized returns.

Algorithm agents model execution algorithms slicing a large parent buy:
every turn they cross the spread for one share.

The market maker quotes both sides around the book midpoint, skewing quotes
down when long and up when short so inventory mean-reverts, with a spread
fixed in currency terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from random import Random
from typing import Optional

from .core import BUY, SELL, SimConfig, round_to_tick

#: Bounded retries for degenerate order-price draws (non-positive price or
#: an exact tie with the expected price).  Exhaustion skips the turn.
_MAX_PRICE_REDRAWS = 100

@dataclass(frozen=True, slots=True)
class AlgoFill:
    """One algorithm-agent buy: the step it printed at and its trade price."""

    step: int
    price: float


class NormalAgent:
    """A general investor mixing fundamental, technical, and noise views.

    Weights ``w1`` (fundamental) and ``w2`` (technical) evolve through
    learning; the noise weight ``u`` and trend horizon ``tau`` are fixed at
    initialization.  Each agent owns an independent RNG stream so that
    results do not depend on instrumentation elsewhere.
    """

    __slots__ = (
        "w1", "w2", "u", "tau", "rng",
        "_w1_max", "_w2_max", "_k_l", "_delta_l", "_sigma_eps", "_est",
    )

    def __init__(self, config: SimConfig, rng: Random):
        self.rng = rng
        self.w1 = rng.uniform(0.0, config.w1_max)
        self.w2 = rng.uniform(0.0, config.w2_max)
        u = rng.uniform(0.0, config.u_max)
        while u == 0.0:
            # u > 0 keeps the expected-return denominator positive even if
            # learning drives both strategy weights to zero.
            u = rng.uniform(0.0, config.u_max)
        self.u = u
        self.tau = rng.randint(1, config.tau_max)
        self._w1_max = config.w1_max
        self._w2_max = config.w2_max
        self._k_l = config.k_l
        self._delta_l = config.delta_l
        self._sigma_eps = config.sigma_epsilon
        self._est = config.est

    def learn(self, r1: float, r2: float, r_l: float) -> None:
        """Adapt strategy weights to the realized return ``r_l``.

        A weight grows toward its cap when its strategy's current expected
        return agrees in sign with ``r_l`` and shrinks toward zero when they
        disagree; a zero on either side leaves it unchanged.  Afterwards each
        weight is independently re-randomized with small probability,
        modeling trial-and-error strategy switching.  Weights are clamped to
        their bounds: the update form only stays inside them while the gain
        is below one, and extreme realized returns can push past.
        """
        rng = self.rng
        q1 = rng.random()
        q2 = rng.random()
        if r_l > 0.0:
            sign1 = 1 if r1 > 0.0 else (-1 if r1 < 0.0 else 0)
            sign2 = 1 if r2 > 0.0 else (-1 if r2 < 0.0 else 0)
        elif r_l < 0.0:
            sign1 = 1 if r1 < 0.0 else (-1 if r1 > 0.0 else 0)
            sign2 = 1 if r2 < 0.0 else (-1 if r2 > 0.0 else 0)
        else:
            sign1 = sign2 = 0
        if sign1 or sign2:
            gain = self._k_l * abs(r_l)
            if sign1 > 0:
                w1 = self.w1 + gain * q1 * (self._w1_max - self.w1)
                self.w1 = w1 if w1 <= self._w1_max else self._w1_max
            elif sign1 < 0:
                w1 = self.w1 - gain * q1 * self.w1
                self.w1 = w1 if w1 >= 0.0 else 0.0
            if sign2 > 0:
                w2 = self.w2 + gain * q2 * (self._w2_max - self.w2)
                self.w2 = w2 if w2 <= self._w2_max else self._w2_max
            elif sign2 < 0:
                w2 = self.w2 - gain * q2 * self.w2
                self.w2 = w2 if w2 >= 0.0 else 0.0
        delta_l = self._delta_l
        if rng.random() < delta_l:
            self.w1 = rng.uniform(0.0, self._w1_max)
        if rng.random() < delta_l:
            self.w2 = rng.uniform(0.0, self._w2_max)

    def expected_return(self, r1: float, r2: float) -> float:
        """Weighted blend of fundamental return, trend return, and noise."""
        w1 = self.w1
        w2 = self.w2
        u = self.u
        eps = self.rng.gauss(0.0, self._sigma_eps)
        return (w1 * r1 + w2 * r2 + u * eps) / (w1 + w2 + u)

    def draw_order(self, r_e: float, p_prev: float) -> Optional[tuple[int, float]]:
        """Draw (side, raw price) around the expected price.

        The expected price is the last market price compounded by ``r_e``;
        the order price is a normal draw around it with relative spread
        ``est``.  The agent buys when its valuation exceeds the drawn price
        and sells when it is below; non-positive, non-finite, and exact-tie
        draws are redrawn — an expectation so extreme that it overflows
        produces only degenerate draws and the turn is skipped.  Returns
        None if redraws are exhausted.
        """
        p_e = p_prev * math.exp(r_e)
        sigma = p_e * self._est
        gauss = self.rng.gauss
        isfinite = math.isfinite
        for _ in range(_MAX_PRICE_REDRAWS):
            p_o = gauss(p_e, sigma)
            if p_o <= 0.0 or p_o == p_e or not isfinite(p_o):
                continue
            return (BUY, p_o) if p_e > p_o else (SELL, p_o)
        return None

    def act(self, r1: float, r2: float, r_l: float, p_prev: float) -> Optional[tuple[int, float]]:
        """One full turn: learn, form an expectation, draw an order."""
        self.learn(r1, r2, r_l)
        return self.draw_order(self.expected_return(r1, r2), p_prev)


def algo_buy_price(best_ask: Optional[int]) -> Optional[int]:
    """Price (ticks) of an algorithm agent's one-share buy.

    One tick through the best ask, so the order is marketable and fills at
    the best ask itself.  No resting ask means no order.
    """
    return None if best_ask is None else best_ask + 1


class MarketMaker:
    """Inventory and live-quote bookkeeping for the market maker.

    ``position`` is signed shares held (buys minus sells since start);
    ``cash`` tracks trading cash flow excluding rebates, for mark-to-market
    profit reporting.  At most one live quote per side.
    """

    __slots__ = ("position", "cash", "live_bid_id", "live_ask_id")

    def __init__(self) -> None:
        self.position = 0
        self.cash = 0.0
        self.live_bid_id: Optional[int] = None
        self.live_ask_id: Optional[int] = None

    def on_quote_filled(self, taker_side: int, price_cash: float) -> None:
        """Record a fill against one of the live quotes.

        An incoming sell hits the maker's bid (position +1); an incoming buy
        lifts the maker's ask (position -1).  The maker only ever rests, so
        every maker trade goes through here.
        """
        if taker_side == SELL:
            self.position += 1
            self.cash -= price_cash
            self.live_bid_id = None
        else:
            self.position -= 1
            self.cash += price_cash
            self.live_ask_id = None


def maker_quote_prices(
    position: int,
    best_bid: Optional[int],
    best_ask: Optional[int],
    last_price: float,
    spread_cash: float,
    w_m: float,
    delta_p: float,
) -> tuple[int, int, float, float]:
    """Compute the maker's bid and ask for the current book state.

    Returns (bid_ticks, ask_ticks, bid_raw, ask_raw); the raw currency
    prices are exposed so checked runs can verify the quoted spread.

    The base value is the book midpoint scaled by (1 - w_m * position^3):
    long inventory lowers both quotes (easier to sell out), short inventory
    raises them.  With one side of the book empty the last market price
    stands in for the midpoint.  Quotes sit half the spread either side of
    the base value.  A quote that would cross the opposite best is pulled
    one tick inside it and its partner re-derived at the full spread, so the
    maker always rests.  Buys round down to the tick grid, sells round up.
    """
    if best_bid is not None and best_ask is not None:
        mid = 0.5 * (best_bid + best_ask) * delta_p
    else:
        mid = last_price
    pbv = (1.0 - w_m * position * position * position) * mid
    half = 0.5 * spread_cash
    bid_raw = pbv - half
    ask_raw = pbv + half

    p_ba = None if best_ask is None else best_ask * delta_p
    p_bb = None if best_bid is None else best_bid * delta_p
    cross_bid = p_ba is not None and bid_raw >= p_ba
    cross_ask = p_bb is not None and ask_raw <= p_bb
    assert not (cross_bid and cross_ask), "book crossed under maker"
    if cross_bid:
        bid_raw = p_ba - delta_p
        ask_raw = bid_raw + spread_cash
    elif cross_ask:
        ask_raw = p_bb + delta_p
        bid_raw = ask_raw - spread_cash

    if bid_raw < delta_p:
        # Degenerate inventory skew (|position| far beyond its operating
        # range) can push quotes to or below zero; floor at one tick.
        bid_raw = delta_p
        if ask_raw < bid_raw + spread_cash:
            ask_raw = bid_raw + spread_cash

    bid = round_to_tick(bid_raw, BUY, delta_p)
    ask = round_to_tick(ask_raw, SELL, delta_p)
    # Tick rounding snaps prices within 1e-9 to the nearest multiple, which
    # in boundary cases could land a quote exactly on the opposite best;
    # pull it one tick back so maker quotes never take.
    if best_ask is not None and bid >= best_ask:
        bid = best_ask - 1
    if best_bid is not None and ask <= best_bid:
        ask = best_bid + 1
    return bid, ask, bid_raw, ask_raw
