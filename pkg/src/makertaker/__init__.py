"""Agent-based artificial stock market for studying maker-taker fees.

A continuous double auction is populated by learning normal agents, a
position-based market maker whose quoted spread shrinks as its rebate
grows, and buy-only algorithm agents whose fills measure market impact.
"""

from .agents import AlgoFill, MarketMaker, NormalAgent, algo_buy_price, maker_quote_prices
from .book import OrderBook, SubmitStatus
from .core import (
    BUY,
    MAKER,
    SELL,
    ConfigError,
    FeeSchedule,
    Order,
    SimConfig,
    Trade,
    as_rate,
    fee_schedule_from_rebate,
    load_config,
    no_fee_schedule,
    parse_config,
    round_to_tick,
)
from .metrics import (
    MetricsBundle,
    bundle_from_run,
    market_impact,
    market_inefficiency,
    stylized_stats,
    total_cost_ratio,
    volatility,
)
from .simulation import FeeTallies, RunResult, apply_trade_fees, run

__all__ = [
    "AlgoFill",
    "BUY",
    "ConfigError",
    "FeeSchedule",
    "FeeTallies",
    "MAKER",
    "MarketMaker",
    "MetricsBundle",
    "NormalAgent",
    "Order",
    "OrderBook",
    "RunResult",
    "SELL",
    "SimConfig",
    "SubmitStatus",
    "Trade",
    "algo_buy_price",
    "apply_trade_fees",
    "as_rate",
    "bundle_from_run",
    "fee_schedule_from_rebate",
    "load_config",
    "maker_quote_prices",
    "market_impact",
    "market_inefficiency",
    "no_fee_schedule",
    "parse_config",
    "round_to_tick",
    "run",
    "stylized_stats",
    "total_cost_ratio",
    "volatility",
]
