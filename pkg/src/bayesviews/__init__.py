"""Sentiment-driven market views for Black-Litterman portfolios.

Modules
-------
marketdata
    CSV ingestion, gap filling and split adjustment.
views
    View sets, compatibility checks and conversion to canonical form.
allocation
    Covariance estimation, equilibrium returns and the Black-Litterman update.
features
    Model inputs built from lagged prices, volumes and sentiment.
learners
    Online DENFIS and LSTM view learners and the direct-weight baseline.
backtest
    Daily rebalancing simulation, metrics and reports.
"""

from .allocation import (
    DEFAULT_DELTA,
    DEFAULT_TAU,
    BLPosterior,
    Equilibrium,
    RiskModel,
    bl_posterior,
    bl_weights,
    equilibrium_returns,
    estimate_covariance,
    invert_views,
    optimal_one_hot,
    project_simplex,
)
from .backtest import BacktestConfig, BacktestReport, Strategy, StrategyKind, run
from .marketdata import AssetUniverse, MarketFrame, load_csv, load_directory
from .views import CanonicalViews, ViewSet, canonicalize, check_compatibility

__version__ = "0.1.0"

__all__ = [
    "AssetUniverse", "BLPosterior", "BacktestConfig", "BacktestReport", "CanonicalViews",
    "DEFAULT_DELTA", "DEFAULT_TAU", "Equilibrium", "MarketFrame", "RiskModel", "Strategy",
    "StrategyKind", "ViewSet", "bl_posterior", "bl_weights", "canonicalize",
    "check_compatibility", "equilibrium_returns", "estimate_covariance", "invert_views",
    "load_csv", "load_directory", "optimal_one_hot", "project_simplex", "run",
]
