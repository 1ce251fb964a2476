"""Continuous double auction with price-time priority.

One share per order, marketable-limit execution: an incoming buy priced at
or above the best ask trades immediately at the best ask (the resting
order's price); symmetric for sells.  Non-crossing orders rest.  Heaps with
lazy deletion keep submit/cancel cheap; stale entries are dropped when they
surface and the heaps are compacted when mostly dead.
"""

from __future__ import annotations

import heapq
from enum import Enum
from typing import Callable, Optional

from .core import BUY, SELL, Order, Trade


class SubmitStatus(Enum):
    FILLED = "filled"
    RESTED = "rested"
    REJECTED = "rejected"


#: Event rows are (step, event_type, order_id, side, price, owner).
EventSink = Callable[[int, str, int, int, int, int], None]

_SIDE_NAME = {BUY: "buy", SELL: "sell"}


class OrderBook:
    """Single-instrument book over integer tick prices.

    Order ids must be unique for the lifetime of the book (the simulation
    hands out ordinals); reuse would confuse lazy heap deletion.
    """

    def __init__(self, event_sink: Optional[EventSink] = None):
        self._bids: list = []    # (-price, seq, id)
        self._asks: list = []    # (price, seq, id)
        self._expiry: list = []  # (expires_at, id)
        self._orders: dict[int, Order] = {}
        self._n_bids = 0
        self._n_asks = 0
        self._seq = 0
        self._clock = 0          # last step seen, for cancel event stamps
        self._event_sink = event_sink

    def __len__(self) -> int:
        return len(self._orders)

    def __contains__(self, order_id: int) -> bool:
        return order_id in self._orders

    def get(self, order_id: int) -> Optional[Order]:
        return self._orders.get(order_id)

    def resting_orders(self) -> list[Order]:
        """Snapshot of live orders, in submission order."""
        return sorted(self._orders.values(), key=lambda o: o.id)

    # -- top of book ---------------------------------------------------

    def best_bid(self) -> Optional[int]:
        bids = self._bids
        orders = self._orders
        while bids:
            if bids[0][2] in orders:
                return -bids[0][0]
            heapq.heappop(bids)
        return None

    def best_ask(self) -> Optional[int]:
        asks = self._asks
        orders = self._orders
        while asks:
            if asks[0][2] in orders:
                return asks[0][0]
            heapq.heappop(asks)
        return None

    # -- operations ----------------------------------------------------

    def submit(self, order: Order, now: int) -> tuple[SubmitStatus, Optional[Trade]]:
        """Match the order against the book or let it rest.

        ``now`` is the step index stamped on any resulting trade.  Exactly
        one share moves on a fill (single-share orders make partial fills
        impossible).
        """
        self._clock = now
        sink = self._event_sink
        if order.price <= 0 or order.quantity != 1 or order.side not in (BUY, SELL):
            if sink is not None:
                sink(now, "rejected", order.id, order.side, order.price, order.owner)
            return SubmitStatus.REJECTED, None

        orders = self._orders
        if order.side == BUY:
            ask = self.best_ask()
            if ask is not None and order.price >= ask:
                _, _, rid = heapq.heappop(self._asks)
                resting = orders.pop(rid)
                self._n_asks -= 1
                trade = Trade(
                    step=now, price=resting.price,
                    buyer=order.owner, seller=resting.owner, taker_side=BUY,
                )
                if sink is not None:
                    sink(now, "filled", order.id, BUY, resting.price, order.owner)
                return SubmitStatus.FILLED, trade
            self._seq += 1
            orders[order.id] = order
            heapq.heappush(self._bids, (-order.price, self._seq, order.id))
            self._n_bids += 1
        else:
            bid = self.best_bid()
            if bid is not None and order.price <= bid:
                _, _, rid = heapq.heappop(self._bids)
                resting = orders.pop(rid)
                self._n_bids -= 1
                trade = Trade(
                    step=now, price=resting.price,
                    buyer=resting.owner, seller=order.owner, taker_side=SELL,
                )
                if sink is not None:
                    sink(now, "filled", order.id, SELL, resting.price, order.owner)
                return SubmitStatus.FILLED, trade
            self._seq += 1
            orders[order.id] = order
            heapq.heappush(self._asks, (order.price, self._seq, order.id))
            self._n_asks += 1

        heapq.heappush(self._expiry, (order.expires_at, order.id))
        if sink is not None:
            sink(now, "rested", order.id, order.side, order.price, order.owner)
        self._maybe_compact()
        return SubmitStatus.RESTED, None

    def cancel(self, order_id: int) -> bool:
        """Remove a resting order.  False when absent (already filled, etc.)."""
        order = self._orders.pop(order_id, None)
        if order is None:
            return False
        if order.side == BUY:
            self._n_bids -= 1
        else:
            self._n_asks -= 1
        if self._event_sink is not None:
            self._event_sink(
                self._clock, "canceled", order.id, order.side, order.price, order.owner
            )
        return True

    def expire(self, now: int) -> int:
        """Remove every resting order whose expires_at <= now."""
        self._clock = now
        count = 0
        expiry = self._expiry
        orders = self._orders
        while expiry and expiry[0][0] <= now:
            _, oid = heapq.heappop(expiry)
            order = orders.pop(oid, None)
            if order is not None:
                count += 1
                if order.side == BUY:
                    self._n_bids -= 1
                else:
                    self._n_asks -= 1
                if self._event_sink is not None:
                    self._event_sink(
                        now, "expired", order.id, order.side, order.price, order.owner
                    )
        return count

    # -- maintenance ---------------------------------------------------

    def _maybe_compact(self) -> None:
        # Stale entries accumulate from cancels and fills; rebuild when a
        # heap is mostly dead so memory stays proportional to live orders.
        orders = self._orders
        if len(self._bids) > 64 + 4 * self._n_bids:
            self._bids = [e for e in self._bids if e[2] in orders]
            heapq.heapify(self._bids)
        if len(self._asks) > 64 + 4 * self._n_asks:
            self._asks = [e for e in self._asks if e[2] in orders]
            heapq.heapify(self._asks)
        if len(self._expiry) > 64 + 4 * len(orders):
            self._expiry = [e for e in self._expiry if e[1] in orders]
            heapq.heapify(self._expiry)

    def assert_uncrossed(self) -> None:
        bid = self.best_bid()
        ask = self.best_ask()
        if bid is not None and ask is not None and bid >= ask:
            raise AssertionError(f"book crossed: best bid {bid} >= best ask {ask}")
