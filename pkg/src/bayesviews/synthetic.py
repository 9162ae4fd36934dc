"""Synthetic market panels for tests and demos."""

from __future__ import annotations

import numpy as np

from .marketdata import AssetUniverse, MarketFrame

DEFAULT_TICKERS = ("AAA", "BBB", "CCC", "DDD", "EEE")


def make_frame(n_days: int = 500, tickers=DEFAULT_TICKERS, seed: int = 0, start: str = "2015-01-01",
               vol: float = 0.015, drift: float = 0.0003, corr: float = 0.3,
               weekend_gaps: bool = False) -> MarketFrame:
    """Correlated geometric random walks with volumes, caps and sentiment.

    Prices follow a one-factor lognormal walk with pairwise correlation
    ``corr``. Market caps are price times a fixed share count. Sentiment
    counts are Poisson with a weekly cycle; intensities are drawn only when
    the matching count is positive. With ``weekend_gaps`` the price, volume
    and cap cells of Saturdays and Sundays are NaN, as in raw exchange data.
    """
    rng = np.random.default_rng(seed)
    n = len(tickers)
    dates = np.arange(np.datetime64(start, "D"), np.datetime64(start, "D") + n_days)
    market = rng.normal(size=(n_days, 1))
    idio = rng.normal(size=(n_days, n))
    shocks = np.sqrt(corr) * market + np.sqrt(1 - corr) * idio
    vols = vol * rng.uniform(0.7, 1.4, size=n)
    log_ret = drift - 0.5 * vols**2 + vols * shocks
    log_ret[0] = 0.0
    price = rng.uniform(20, 200, size=n) * np.exp(np.cumsum(log_ret, axis=0))
    shares = rng.uniform(1e8, 5e9, size=n)
    mcap = price * shares
    volume = shares * 0.01 * np.exp(rng.normal(0, 0.3, size=(n_days, n)))

    weekday = (dates.astype("datetime64[D]").view("int64") - 4) % 7  # 0 = Monday
    activity = np.where(weekday[:, None] >= 5, 0.3, 1.0) * rng.uniform(2, 60, size=n)
    pos = rng.poisson(activity)
    neg = rng.poisson(0.5 * activity)
    pos_int = np.where(pos > 0, rng.uniform(1.0, 3.0, size=(n_days, n)), 0.0)
    neg_int = np.where(neg > 0, -rng.uniform(1.0, 3.0, size=(n_days, n)), 0.0)
    sentiment = np.stack([pos, neg, pos_int, neg_int], axis=-1).astype(float)

    if weekend_gaps:
        closed = weekday >= 5
        closed[0] = False
        for a in (price, volume, mcap):
            a[closed] = np.nan
    return MarketFrame(AssetUniverse(tuple(tickers)), dates, price, volume, mcap, sentiment)
