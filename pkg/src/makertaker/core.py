"""Shared domain types: fee schedule, tick grid, orders, and run configuration.

Prices live on an integer tick grid inside the matching engine (exact
comparisons, no float drift); agents produce real-valued raw prices that are
snapped onto the grid just before submission.  Fee rates are kept as
``Decimal`` so that the rebate/taker-fee/spread algebra is exact for the
short decimal rates used in practice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Union

BUY = 1
SELL = -1

#: Owner id of the market maker.  Normal agents own ids 0..n-1 and
#: algorithm agents n..n+m-1, so -1 can never collide.
MAKER = -1

RateLike = Union[Decimal, str, float, int]


class ConfigError(ValueError):
    """Raised for invalid run configuration or fee parameters."""


def as_rate(value: RateLike) -> Decimal:
    """Normalize a fee rate to an exact ``Decimal`` fraction.

    Accepts percent strings ("0.05%"), plain decimal strings ("0.0005"),
    floats, ints, and Decimals.  Floats are converted via ``repr`` so short
    literals keep their short decimal form (0.003 stays 0.003).
    """
    if isinstance(value, Decimal):
        return value
    if isinstance(value, str):
        text = value.strip()
        try:
            if text.endswith("%"):
                return Decimal(text[:-1]) / 100
            return Decimal(text)
        except InvalidOperation as exc:
            raise ConfigError(f"not a rate: {value!r}") from exc
    if isinstance(value, (int, float)):
        return Decimal(repr(value))
    raise TypeError(f"cannot interpret {value!r} as a rate")


@dataclass(frozen=True)
class FeeSchedule:
    """Maker-taker fee structure tying the rebate to taker fee and spread.

    All rates are fractions of the fundamental price.  With fees enabled the
    taker fee is exchange_fee + maker_rebate and the maker quotes a base
    spread of maker_expected_return - 2 * maker_rebate (the maker can earn
    the rebate on both of its quotes, hence the factor two).  The no-fee
    market keeps the spread at maker_expected_return with zero fees.
    """

    exchange_fee: Decimal
    maker_rebate: Decimal
    taker_fee: Decimal
    maker_base_spread: Decimal
    maker_expected_return: Decimal
    enabled: bool

    def __post_init__(self) -> None:
        if self.enabled:
            if self.taker_fee != self.exchange_fee + self.maker_rebate:
                raise ConfigError("taker fee must equal exchange fee plus rebate")
            if self.maker_base_spread != self.maker_expected_return - 2 * self.maker_rebate:
                raise ConfigError("base spread inconsistent with rebate")
        else:
            if self.taker_fee != 0 or self.maker_rebate != 0:
                raise ConfigError("disabled schedule must have zero fees")
            if self.maker_base_spread != self.maker_expected_return:
                raise ConfigError("disabled schedule must quote the full expected return")
        if self.maker_base_spread <= 0:
            raise ConfigError(
                f"maker base spread must be positive, got {self.maker_base_spread}"
            )


def fee_schedule_from_rebate(
    r_m: RateLike, re_m: RateLike = "0.300%", r_ex: RateLike = "0.100%"
) -> FeeSchedule:
    """Build an enabled fee schedule from the maker rebate.

    Raises ConfigError when the implied maker spread would be non-positive
    (rebates above half the maker's expected return).
    """
    rebate = as_rate(r_m)
    expected = as_rate(re_m)
    exchange = as_rate(r_ex)
    spread = expected - 2 * rebate
    if spread <= 0:
        raise ConfigError(
            f"rebate {rebate} yields non-positive maker spread {spread}"
        )
    return FeeSchedule(
        exchange_fee=exchange,
        maker_rebate=rebate,
        taker_fee=exchange + rebate,
        maker_base_spread=spread,
        maker_expected_return=expected,
        enabled=True,
    )


def no_fee_schedule(re_m: RateLike = "0.300%") -> FeeSchedule:
    """The baseline market without maker-taker fees (spread = expected return)."""
    expected = as_rate(re_m)
    zero = Decimal(0)
    return FeeSchedule(
        exchange_fee=zero,
        maker_rebate=zero,
        taker_fee=zero,
        maker_base_spread=expected,
        maker_expected_return=expected,
        enabled=False,
    )


# Relative tolerance for treating a raw price as already tick-aligned.
# Without the snap, float division noise would make rounding non-idempotent
# for non-integer tick sizes.
_SNAP_REL = 1e-9


def round_to_tick(raw_price: float, side: int, delta_p: float) -> int:
    """Snap a raw price onto the tick grid, returning integer ticks.

    Sell prices round up to the next tick, buy prices round down; exact
    multiples are fixed points for both sides.  A buy can round to zero or
    below for raw prices under one tick; callers treat that as a rejected
    order.
    """
    if raw_price <= 0.0:
        raise ValueError(f"raw price must be positive, got {raw_price}")
    q = raw_price / delta_p
    nearest = round(q)
    if abs(q - nearest) <= _SNAP_REL * max(1.0, abs(q)):
        return int(nearest)
    return math.ceil(q) if side == SELL else math.floor(q)


@dataclass(slots=True)
class Order:
    """A one-share limit order.

    ``price`` is in integer ticks.  ``expires_at`` is placed_at + t_c under
    the simulation's single order effective period; the book itself only
    honors whatever expires_at it is given.
    """

    id: int
    side: int  # BUY or SELL
    price: int
    placed_at: int
    expires_at: int
    owner: int
    quantity: int = 1


@dataclass(frozen=True, slots=True)
class Trade:
    """An executed match.  ``price`` is the resting order's price in ticks.

    ``step`` is the step index whose market price this trade sets.
    """

    step: int
    price: int
    buyer: int
    seller: int
    taker_side: int  # BUY if the buyer crossed the book, SELL otherwise

    @property
    def resting_owner(self) -> int:
        return self.seller if self.taker_side == BUY else self.buyer


@dataclass(frozen=True, slots=True)
class SimConfig:
    """Model parameters.  Defaults are the standard full-scale configuration."""

    n: int = 990                 # normal agents
    m: int = 10                  # algorithm agents
    w1_max: float = 1.0          # fundamental-weight cap
    w2_max: float = 10.0         # technical-weight cap
    u_max: float = 1.0           # noise-weight cap
    tau_max: int = 10_000        # max chartist horizon
    sigma_epsilon: float = 0.06  # noise std-dev
    est: float = 0.003           # order-price variation coefficient
    delta_p: float = 1.0         # tick size
    p_f: float = 10_000.0        # fundamental price
    t_l: int = 10_000            # learning lookback
    t_c: int = 20_000            # order effective period
    k_l: float = 4.0             # learning gain
    delta_l: float = 0.01        # weight-reset probability
    w_m: float = 5.0e-8          # maker position coefficient
    re_m: float = 0.003          # maker expected return per transaction
    r_ex: float = 0.001          # exchange fee
    t_end: int = 1_000_000       # total steps
    seed: int = 1

    def __post_init__(self) -> None:
        if not 1 <= self.m <= self.n:
            raise ConfigError(f"need 1 <= m <= n, got m={self.m}, n={self.n}")
        positive = (
            ("w1_max", self.w1_max), ("w2_max", self.w2_max), ("u_max", self.u_max),
            ("tau_max", self.tau_max), ("sigma_epsilon", self.sigma_epsilon),
            ("est", self.est), ("delta_p", self.delta_p), ("p_f", self.p_f),
            ("t_l", self.t_l), ("t_c", self.t_c), ("k_l", self.k_l),
            ("re_m", self.re_m),
        )
        for name, val in positive:
            if val <= 0:
                raise ConfigError(f"{name} must be positive, got {val}")
        if not 0.0 <= self.delta_l <= 1.0:
            raise ConfigError(f"delta_l must be in [0, 1], got {self.delta_l}")
        if not 0.0 < self.est <= 1.0:
            raise ConfigError(f"est must be in (0, 1], got {self.est}")
        if self.w_m < 0:
            raise ConfigError(f"w_m must be non-negative, got {self.w_m}")
        if self.r_ex < 0:
            raise ConfigError(f"r_ex must be non-negative, got {self.r_ex}")
        if self.t_end < 0:
            raise ConfigError(f"t_end must be non-negative, got {self.t_end}")


_FIELD_TYPES = {f.name: f.type for f in fields(SimConfig)}


def coerce_value(key: str, text: str):
    """Convert a config value string to the field's type (int or float)."""
    if key not in _FIELD_TYPES:
        raise ConfigError(f"unknown config key {key!r}")
    kind = _FIELD_TYPES[key]
    try:
        if kind == "int":
            return int(text)
        return float(text)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {text!r}") from exc


def parse_config(text: str, overrides: dict | None = None) -> SimConfig:
    """Parse flat key=value config text into a SimConfig.

    Keys must match SimConfig field names exactly; unknown keys are an
    error.  Blank lines and '#' comments are ignored.  ``overrides`` wins
    over file values (CLI flags).
    """
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        values[key] = coerce_value(key, value.strip())
    if overrides:
        for key, val in overrides.items():
            if key not in _FIELD_TYPES:
                raise ConfigError(f"unknown config key {key!r}")
            values[key] = val
    return SimConfig(**values)


def load_config(path: str | Path, overrides: dict | None = None) -> SimConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config(text, overrides)
