"""Model inputs built from a market frame.

For every asset the input holds five price features (today, the three
previous days and a 30-day moving average ending today), the same five for
volume, and the four sentiment numbers of the day. A final slot carries the
portfolio value. Blocks are flattened asset-major in that order, giving
``14 n + 1`` numbers, and then z-scored against a trailing window.
"""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientHistory

N_LAGS = 4
MA_WINDOW = 30
LAG_WIDTH = N_LAGS + 1
SENTIMENT_WIDTH = 4
MIN_INDEX = MA_WINDOW - 1


def input_size(n_assets: int) -> int:
    return n_assets * (2 * LAG_WIDTH + SENTIMENT_WIDTH) + 1


def lag_features(series, t: int) -> np.ndarray:
    """``(x_t, x_{t-1}, x_{t-2}, x_{t-3}, mean(x_{t-29..t}))``."""
    x = np.asarray(series, dtype=float)
    if t < MIN_INDEX or t >= x.shape[0]:
        raise InsufficientHistory(f"lag features at index {t} need {MA_WINDOW} observations ending there")
    return np.array([x[t], x[t - 1], x[t - 2], x[t - 3], x[t - MA_WINDOW + 1 : t + 1].mean()])


def sentiment_features(frame, t: int) -> np.ndarray:
    """``n x 4`` block ``(pos_count, neg_count, pos_intensity, neg_intensity)`` for day ``t``."""
    s = np.array(frame.sentiment[t], dtype=float)
    return np.where(np.isnan(s), 0.0, s)


class NormalizerState:
    """Trailing z-score statistics per feature.

    The window holds the raw vectors of the last ``window`` distinct days
    observed, so the statistics at day ``t`` only involve days ``<= t``.
    Standard deviations are floored at ``floor``.
    """

    def __init__(self, window: int = 90, floor: float = 1e-8):
        self.window = window
        self.floor = floor
        self.reset()

    def reset(self):
        self.history = deque(maxlen=self.window)
        self.last_t = None
        self.mean = None
        self.sd = None

    def observe(self, t: int, raw: np.ndarray):
        if self.last_t is not None and t <= self.last_t:
            if t == self.last_t:
                return
            raise ValueError(f"normalizer fed day {t} after day {self.last_t}")
        self.history.append(np.asarray(raw, dtype=float).copy())
        self.last_t = t
        H = np.array(self.history)
        self.mean = H.mean(axis=0)
        self.sd = np.maximum(H.std(axis=0), self.floor)

    def transform(self, raw):
        return (np.asarray(raw, dtype=float) - self.mean) / self.sd

    def inverse(self, z):
        return np.asarray(z, dtype=float) * self.sd + self.mean

    def state_dict(self):
        return {
            "window": self.window,
            "floor": self.floor,
            "history": [h.tolist() for h in self.history],
            "last_t": self.last_t,
        }

    @classmethod
    def from_state(cls, d):
        obj = cls(d["window"], d["floor"])
        for h in d["history"]:
            obj.history.append(np.array(h, dtype=float))
        obj.last_t = d["last_t"]
        if obj.history:
            H = np.array(obj.history)
            obj.mean = H.mean(axis=0)
            obj.sd = np.maximum(H.std(axis=0), obj.floor)
        return obj


@dataclass(frozen=True, eq=False)
class FeatureVector:
    price_lags: np.ndarray
    volume_lags: np.ndarray
    sentiment: np.ndarray
    capital: float
    raw: np.ndarray
    flattened: np.ndarray


def raw_input(frame, t: int, capital: float = 0.0, use_sentiment: bool = True, use_capital: bool = False):
    n = frame.n
    price = np.array([lag_features(frame.price[: t + 1, j], t) for j in range(n)])
    volume = np.array([lag_features(frame.volume[: t + 1, j], t) for j in range(n)])
    sent = sentiment_features(frame, t) if use_sentiment else np.zeros((n, SENTIMENT_WIDTH))
    cap = float(capital) if use_capital else 0.0
    flat = np.concatenate([price.ravel(), volume.ravel(), sent.ravel(), [cap]])
    return price, volume, sent, cap, flat


def assemble_input(frame, t: int, capital: float, normalizer: NormalizerState,
                   use_sentiment: bool = True, use_capital: bool = False) -> FeatureVector:
    """Build and normalise the input for day ``t``.

    The normalizer absorbs day ``t`` first (a repeated call for the same day
    does not absorb it twice), then the vector is z-scored.
    """
    price, volume, sent, cap, flat = raw_input(frame, t, capital, use_sentiment, use_capital)
    normalizer.observe(t, flat)
    z = normalizer.transform(flat)
    return FeatureVector(price, volume, sent, cap, flat, z)


def feature_columns(tickers) -> list[str]:
    cols = []
    for block, names in (
        ("price", ["t", "t1", "t2", "t3", "ma30"]),
        ("volume", ["t", "t1", "t2", "t3", "ma30"]),
        ("sent", ["pos_count", "neg_count", "pos_int", "neg_int"]),
    ):
        cols += [f"{tk}_{block}_{nm}" for tk in tickers for nm in names]
    return cols + ["capital"]


def write_feature_dump(path, dates, tickers, rows):
    """Debug dump: one ``date`` column plus the flattened feature columns."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["date"] + feature_columns(tickers))
        for d, row in zip(dates, rows):
            w.writerow([str(d)] + [repr(float(v)) for v in row])
