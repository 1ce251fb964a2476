"""The market event loop: scheduling, time semantics, and fee tallying.

Each step runs four phases:

1. resting orders whose effective period has elapsed are swept out;
2. the market maker cancels any live quotes and posts a fresh bid and ask
   (this never advances time);
3. the scheduled agent acts — normal agents cycle 0..n-1, and after every
   floor(n/m) normal orders an algorithm agent takes a turn (cycling
   0..m-1); a normal agent learns, then submits its drawn order, while an
   algorithm agent submits its marketable buy or passes when no ask rests;
4. if an order was placed, time advances by one and the step's market price
   is recorded (last trade price, carried forward when nothing traded).

A passed algorithm turn or a normal agent whose price draw degenerates does
not advance time.  Owner ids: normal agent j is j (0-based), algorithm
agent k is n+k, the market maker is -1.

Runs are deterministic for a fixed (config, fee schedule): one master RNG
seeds a private stream per normal agent, so instrumentation or refactoring
elsewhere cannot perturb agent randomness.
"""

from __future__ import annotations

import math
from array import array
from dataclasses import dataclass
from decimal import Decimal
from random import Random
from typing import Optional

from .agents import AlgoFill, MarketMaker, NormalAgent, maker_quote_prices
from .book import EventSink, OrderBook, SubmitStatus
from .core import BUY, MAKER, SELL, FeeSchedule, Order, SimConfig, Trade, round_to_tick


@dataclass
class FeeTallies:
    """Net fee cash flow per agent class (currency units; negative = paid)."""

    normal: float = 0.0
    algo: float = 0.0
    maker: float = 0.0
    exchange: float = 0.0

    def total(self) -> float:
        return self.normal + self.algo + self.maker + self.exchange


def apply_trade_fees(
    trade: Trade, fee: FeeSchedule, tallies: FeeTallies, n: int, p_f: float
) -> FeeTallies:
    """Apply one trade's fee flows to the tallies (reference path).

    The taker pays the taker fee; the market maker receives the rebate only
    when its own resting quote was executed; the exchange keeps the
    remainder.  Resting orders of normal agents earn nothing.  All amounts
    are fractions of the fundamental price, so every trade moves the same
    cash regardless of its price.  ``n`` (normal-agent count) classifies
    owner ids.  The hot loop accumulates the same amounts with precomputed
    floats; checked runs compare the two paths.
    """
    if not fee.enabled:
        return tallies
    p_f_dec = Decimal(repr(p_f))
    fee_cash = float(fee.taker_fee * p_f_dec)
    rebate_cash = float(fee.maker_rebate * p_f_dec)
    taker = trade.buyer if trade.taker_side == BUY else trade.seller
    if taker == MAKER:
        raise AssertionError("market maker quotes never take")
    if taker >= n:
        tallies.algo -= fee_cash
    else:
        tallies.normal -= fee_cash
    if trade.resting_owner == MAKER:
        tallies.maker += rebate_cash
        tallies.exchange += fee_cash - rebate_cash
    else:
        tallies.exchange += fee_cash
    return tallies


@dataclass
class RunResult:
    """Everything a finished run exposes to metrics and persistence."""

    config: SimConfig
    fee: FeeSchedule
    prices: array                 # market price per step, index 0..t_end
    n_trades: int
    algo_fill_steps: array        # step of each algorithm-agent buy
    algo_fill_prices: array       # trade price of each algorithm-agent buy
    fees: FeeTallies
    maker_position: int           # shares held at the end
    maker_cash: float             # maker trading cash flow, rebates excluded
    maker_position_steps: array   # steps at which the position changed
    maker_position_values: array  # position after each change
    skipped_normal_turns: int     # degenerate price draws (no time advance)
    algo_passes: int              # algorithm turns with no resting ask
    trades: Optional[list[Trade]] = None

    @property
    def n_buy(self) -> int:
        return len(self.algo_fill_prices)

    @property
    def last_price(self) -> float:
        return self.prices[-1]

    def algo_fills(self) -> list[AlgoFill]:
        return [
            AlgoFill(step, price)
            for step, price in zip(self.algo_fill_steps, self.algo_fill_prices)
        ]

    def maker_pnl(self) -> float:
        """Maker profit: trading cash flow + rebates + inventory marked at
        the final market price."""
        return self.maker_cash + self.fees.maker + self.maker_position * self.last_price


# Tolerance for the checked-mode maker spread assertion: the quoted raw
# spread equals the configured cash spread only up to float rounding of
# midpoint +/- half-spread.
_SPREAD_ABS_TOL = 1e-6



def run(
    config: SimConfig,
    fee: FeeSchedule,
    *,
    check_invariants: bool = False,
    collect_trades: bool = False,
    event_sink: Optional[EventSink] = None,
    enable_maker: bool = True,
) -> RunResult:
    """Run one simulation to t_end and return its result.

    ``check_invariants`` re-verifies book, weight, spread, and fee-flow
    invariants every step (several times slower; for tests and debugging).
    ``collect_trades`` retains the full trade list.  ``enable_maker=False``
    removes the market maker (ablation switch; the default market always
    has one).
    """
    n = config.n
    m = config.m
    t_end = config.t_end
    t_c = config.t_c
    t_l = config.t_l
    p_f = config.p_f
    w_m = config.w_m
    delta_p = config.delta_p
    algo_every = n // m

    p_f_dec = Decimal(repr(p_f))
    fee_enabled = fee.enabled
    fee_cash = float(fee.taker_fee * p_f_dec)
    rebate_cash = float(fee.maker_rebate * p_f_dec)
    exch_share_maker = fee_cash - rebate_cash
    spread_cash = float(fee.maker_base_spread * p_f_dec)

    master = Random(config.seed)
    agents = [NormalAgent(config, Random(master.getrandbits(64))) for _ in range(n)]

    book = OrderBook(event_sink)
    maker = MarketMaker()
    tallies = FeeTallies()
    shadow_tallies = FeeTallies() if check_invariants else None

    prices = array("d", [0.0]) * (t_end + 1)
    prices[0] = p_f
    last_price = p_f
    fill_steps = array("q")
    fill_prices = array("d")
    pos_steps = array("q")
    pos_values = array("q")
    trades: Optional[list[Trade]] = [] if collect_trades else None

    # Hot-loop local bindings.
    submit = book.submit
    cancel = book.cancel
    expire = book.expire
    best_bid = book.best_bid
    best_ask = book.best_ask
    log = math.log
    t_normal = tallies.normal
    t_algo = tallies.algo
    t_maker = tallies.maker
    t_exchange = tallies.exchange

    t = 0
    next_agent = 0
    next_algo = 0
    normal_since_algo = 0
    order_id = 0
    n_trades = 0
    skipped = 0
    algo_passes = 0
    # Turns that place no order do not advance time.  If every single
    # agent's draws degenerate (a wildly diverged price path in an extreme
    # configuration), the loop would otherwise spin forever; fail loudly
    # after several full rounds of the population instead.
    stalled = 0
    stall_limit = 100 * (n + m)

    while t < t_end:
        T = t + 1
        expire(T)

        if enable_maker:
            live = maker.live_bid_id
            if live is not None:
                cancel(live)
                maker.live_bid_id = None
            live = maker.live_ask_id
            if live is not None:
                cancel(live)
                maker.live_ask_id = None
            bb = best_bid()
            ba = best_ask()
            mbid, mask, bid_raw, ask_raw = maker_quote_prices(
                maker.position, bb, ba, last_price, spread_cash, w_m, delta_p
            )
            if check_invariants and bid_raw != delta_p:
                gap = ask_raw - bid_raw
                assert abs(gap - spread_cash) < _SPREAD_ABS_TOL, (
                    f"maker raw spread {gap} != {spread_cash} at step {T}"
                )
            if mbid > 0:
                order_id += 1
                status, _ = submit(Order(order_id, BUY, mbid, T, T + t_c, MAKER), T)
                maker.live_bid_id = order_id
                if check_invariants:
                    assert status is SubmitStatus.RESTED, "maker bid must rest"
            order_id += 1
            status, _ = submit(Order(order_id, SELL, mask, T, T + t_c, MAKER), T)
            maker.live_ask_id = order_id
            if check_invariants:
                assert status is SubmitStatus.RESTED, "maker ask must rest"
                book.assert_uncrossed()

        if normal_since_algo >= algo_every:
            # Algorithm-agent turn.
            normal_since_algo = 0
            owner = n + next_algo
            next_algo += 1
            if next_algo == m:
                next_algo = 0
            ba = best_ask()
            if ba is None:
                algo_passes += 1
                stalled += 1
                if stalled > stall_limit:
                    raise RuntimeError(
                        f"market stalled at t={t}: {stalled} consecutive "
                        "turns placed no order"
                    )
                continue
            order_id += 1
            _, trade = submit(Order(order_id, BUY, ba + 1, T, T + t_c, owner), T)
            price_cash = trade.price * delta_p
            last_price = price_cash
            n_trades += 1
            fill_steps.append(T)
            fill_prices.append(price_cash)
            resting = trade.seller
            if resting == MAKER:
                maker.on_quote_filled(BUY, price_cash)
                pos_steps.append(T)
                pos_values.append(maker.position)
            if fee_enabled:
                t_algo -= fee_cash
                if resting == MAKER:
                    t_maker += rebate_cash
                    t_exchange += exch_share_maker
                else:
                    t_exchange += fee_cash
            if trades is not None:
                trades.append(trade)
            if check_invariants:
                assert trade.price == ba, "algorithm buy must fill at the best ask"
                apply_trade_fees(trade, fee, shadow_tallies, n, p_f)
                book.assert_uncrossed()
            t = T
            prices[T] = last_price
            stalled = 0
            continue

        # Normal-agent turn.
        j = next_agent
        next_agent += 1
        if next_agent == n:
            next_agent = 0
        agent = agents[j]
        # Strategy returns are anchored n steps back (the price around the
        # agent's own previous turn).  Before a lookback window is fully
        # inside recorded history the corresponding return is zero — a
        # neutral start.  The fundamental return only needs one anchor, so
        # it clamps to the initial price instead (P^0 = P_f, also zero).
        i1 = T - n
        if i1 < 0:
            i1 = 0
        i2 = i1 - agent.tau
        il = T - t_l
        p_i1 = prices[i1]
        r1 = log(p_f / p_i1)
        r2 = 0.0 if i2 < 0 else log(p_i1 / prices[i2])
        r_l = 0.0 if il < 0 else log(last_price / prices[il])
        drawn = agent.act(r1, r2, r_l, last_price)
        if check_invariants:
            assert 0.0 <= agent.w1 <= config.w1_max, f"w1 out of bounds: {agent.w1}"
            assert 0.0 <= agent.w2 <= config.w2_max, f"w2 out of bounds: {agent.w2}"
        if drawn is None:
            skipped += 1
            stalled += 1
            if stalled > stall_limit:
                raise RuntimeError(
                    f"market stalled at t={t}: {stalled} consecutive "
                    "turns placed no order"
                )
            continue
        side, raw_price = drawn
        price = round_to_tick(raw_price, side, delta_p)
        if price <= 0:
            skipped += 1
            stalled += 1
            if stalled > stall_limit:
                raise RuntimeError(
                    f"market stalled at t={t}: {stalled} consecutive "
                    "turns placed no order"
                )
            continue
        order_id += 1
        _, trade = submit(Order(order_id, side, price, T, T + t_c, j), T)
        if trade is not None:
            price_cash = trade.price * delta_p
            last_price = price_cash
            n_trades += 1
            resting = trade.seller if side == BUY else trade.buyer
            if resting == MAKER:
                maker.on_quote_filled(side, price_cash)
                pos_steps.append(T)
                pos_values.append(maker.position)
            if fee_enabled:
                t_normal -= fee_cash
                if resting == MAKER:
                    t_maker += rebate_cash
                    t_exchange += exch_share_maker
                else:
                    t_exchange += fee_cash
            if trades is not None:
                trades.append(trade)
            if check_invariants:
                apply_trade_fees(trade, fee, shadow_tallies, n, p_f)
        if check_invariants:
            book.assert_uncrossed()
        normal_since_algo += 1
        t = T
        prices[T] = last_price
        stalled = 0

    tallies.normal = t_normal
    tallies.algo = t_algo
    tallies.maker = t_maker
    tallies.exchange = t_exchange
    if check_invariants:
        assert tallies == shadow_tallies, (
            f"fee fast path diverged: {tallies} != {shadow_tallies}"
        )

    return RunResult(
        config=config,
        fee=fee,
        prices=prices,
        n_trades=n_trades,
        algo_fill_steps=fill_steps,
        algo_fill_prices=fill_prices,
        fees=tallies,
        maker_position=maker.position,
        maker_cash=maker.cash,
        maker_position_steps=pos_steps,
        maker_position_values=pos_values,
        skipped_normal_turns=skipped,
        algo_passes=algo_passes,
        trades=trades,
    )
