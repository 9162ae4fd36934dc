"""Portfolio performance metrics.

Daily gross returns are value relatives ``R_t = V_t / V_{t-1}``. The Sharpe
ratio is measured against the value-weighted portfolio rather than a
risk-free rate, so the benchmark itself scores exactly 1.
"""

from __future__ import annotations

import datetime as dt

import numpy as np

from .errors import DegenerateVolatility, LengthMismatch, NonPositiveValue

DAYS_PER_YEAR = 365


def metric_rmse(realized, optimal) -> float:
    """``sqrt(mean_t ||w_t - w_hat_t||^2)``."""
    a = np.atleast_2d(np.asarray(realized, dtype=float))
    b = np.atleast_2d(np.asarray(optimal, dtype=float))
    if a.shape != b.shape:
        raise LengthMismatch(f"realized {a.shape} vs optimal {b.shape}")
    if a.shape[0] < 1:
        raise LengthMismatch("need at least one day")
    return float(np.sqrt(np.mean(np.sum((a - b) ** 2, axis=1))))


def _days_between(d0, d1) -> int:
    return int((np.datetime64(d1, "D") - np.datetime64(d0, "D")).astype(int))


def metric_ar(values, dates) -> float:
    """Compound annual growth rate over calendar days."""
    v = np.asarray(values, dtype=float)
    if v.size < 2 or len(dates) != v.size:
        raise LengthMismatch("need at least two dated values")
    if np.any(v <= 0):
        raise NonPositiveValue("portfolio values must be positive")
    days = _days_between(dates[0], dates[-1])
    if days <= 0:
        raise LengthMismatch("dates must span at least one day")
    return float((v[-1] / v[0]) ** (DAYS_PER_YEAR / days) - 1.0)


def gross_returns(values) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    return v[1:] / v[:-1]


def metric_sr(portfolio_returns, vw_returns) -> float:
    """``E(R_p / R_vw) / (sd(R_p) / sd(R_vw))`` on gross daily returns."""
    rp = np.asarray(portfolio_returns, dtype=float)
    rv = np.asarray(vw_returns, dtype=float)
    if rp.shape != rv.shape or rp.size < 1:
        raise LengthMismatch(f"portfolio {rp.shape} vs benchmark {rv.shape}")
    if np.any(rv == 0):
        raise ValueError("benchmark gross return of zero")
    sp, sv = rp.std(), rv.std()
    if sp == 0:
        raise DegenerateVolatility("portfolio returns have zero volatility")
    if sv == 0:
        raise DegenerateVolatility("benchmark returns have zero volatility")
    return float(np.mean(rp / rv) / (sp / sv))


def downside_deviation(returns, threshold: float = 1.0) -> float:
    r = np.asarray(returns, dtype=float)
    return float(np.sqrt(np.mean(np.minimum(r - threshold, 0.0) ** 2)))


def metric_sortino(portfolio_returns, vw_returns) -> float:
    """The benchmark-relative ratio above with downside deviation as risk."""
    rp = np.asarray(portfolio_returns, dtype=float)
    rv = np.asarray(vw_returns, dtype=float)
    if rp.shape != rv.shape or rp.size < 1:
        raise LengthMismatch(f"portfolio {rp.shape} vs benchmark {rv.shape}")
    dp, dv = downside_deviation(rp), downside_deviation(rv)
    if dp == 0 or dv == 0:
        raise DegenerateVolatility("no downside returns")
    return float(np.mean(rp / rv) / (dp / dv))


def metric_mdd(values) -> float:
    """Largest ``(V_t - V_tau) / V_t`` over ``t < tau``, in one pass."""
    v = np.asarray(values, dtype=float)
    if v.size < 1:
        raise LengthMismatch("need at least one value")
    if np.any(v <= 0):
        raise NonPositiveValue("portfolio values must be positive")
    peak = np.maximum.accumulate(v)
    return float(np.max((peak - v) / peak))
