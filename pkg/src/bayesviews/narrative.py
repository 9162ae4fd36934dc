"""Plain-language account of one day's views and reallocation."""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field

import numpy as np

WITHDRAW_EPS = 1e-4


@dataclass
class AssetSentiment:
    ticker: str
    pos_count: int
    neg_count: int
    pos_polarity: float
    neg_polarity: float

    @property
    def silent(self) -> bool:
        return self.pos_count == 0 and self.neg_count == 0


@dataclass
class AssetView:
    ticker: str
    confidence: float  # fraction of total view precision
    outperformance: float  # view return minus the market's equilibrium return


@dataclass
class NarrativeRecord:
    date: dt.date
    tickers: tuple[str, ...]
    sentiment: list[AssetSentiment]
    views: list[AssetView]
    current_weights: np.ndarray
    next_weights: np.ndarray
    withdraw: dict[str, float] = field(default_factory=dict)
    invest: list[str] = field(default_factory=list)

    def as_dict(self):
        return {
            "date": self.date.isoformat(),
            "tickers": list(self.tickers),
            "sentiment": [vars(s) for s in self.sentiment],
            "views": [vars(v) for v in self.views],
            "current_weights": [float(x) for x in self.current_weights],
            "next_weights": [float(x) for x in self.next_weights],
            "withdraw": dict(self.withdraw),
            "invest": list(self.invest),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            dt.date.fromisoformat(d["date"]),
            tuple(d["tickers"]),
            [AssetSentiment(**s) for s in d["sentiment"]],
            [AssetView(**v) for v in d["views"]],
            np.array(d["current_weights"]),
            np.array(d["next_weights"]),
            dict(d["withdraw"]),
            list(d["invest"]),
        )

    def render(self) -> str:
        return render(self)


def reallocation(current, nxt, tickers):
    """Fraction of each holding to sell, and the assets receiving capital.

    Asset ``i`` held at ``current[i] > 0`` sells ``max(0, 1 - next[i]/current[i])``
    of its position.
    """
    current = np.asarray(current, dtype=float)
    nxt = np.asarray(nxt, dtype=float)
    withdraw = {}
    for tk, c, n in zip(tickers, current, nxt):
        if c > 0:
            frac = max(0.0, 1.0 - n / c)
            if frac > WITHDRAW_EPS:
                withdraw[tk] = min(frac, 1.0)
    invest = [tk for tk, c, n in zip(tickers, current, nxt) if n - c > WITHDRAW_EPS * max(c, 1e-12)]
    return withdraw, invest


def view_summary(views, ctx, tickers):
    """Confidence as normalised inverse variance; outperformance against ``Pi . w_cap``."""
    if views is None or ctx is None:
        return []
    prec = views.precision
    total = prec.sum()
    if total <= 0:
        return []
    market = float(ctx.eq.pi @ ctx.eq.w_cap)
    return [
        AssetView(tk, float(p / total), float(q - market))
        for tk, p, q in zip(tickers, prec, views.Q)
        if p > 0
    ]


def make_record(date, tickers, sentiment_row, views, ctx, current, nxt) -> NarrativeRecord:
    s = np.nan_to_num(np.asarray(sentiment_row, dtype=float))
    sent = [AssetSentiment(tk, int(r[0]), int(r[1]), float(r[2]), float(r[3])) for tk, r in zip(tickers, s)]
    withdraw, invest = reallocation(current, nxt, tickers)
    return NarrativeRecord(date, tuple(tickers), sent, view_summary(views, ctx, tickers),
                           np.asarray(current, dtype=float), np.asarray(nxt, dtype=float), withdraw, invest)


def _ordinal(k: int) -> str:
    if 10 <= k % 100 <= 20:
        suffix = "th"
    else:
        suffix = {1: "st", 2: "nd", 3: "rd"}.get(k % 10, "th")
    return f"{k}{suffix}"


def long_date(d: dt.date) -> str:
    return f"{d.strftime('%B')} {_ordinal(d.day)} {d.year}"


def pct(x: float) -> str:
    """Percent with two decimals, or three significant digits when smaller."""
    v = 100.0 * x
    if v != 0 and abs(v) < 0.005:
        return f"{v:.3g}%"
    return f"{v:.2f}%"


def _opinions(count, polarity, word):
    noun = "opinion" if count == 1 else "opinions"
    return f"{count} {word} {noun} of polarity {polarity:+.2f}"


def sentiment_phrase(s: AssetSentiment) -> str:
    if s.silent:
        return f"no opinion on {s.ticker} stock"
    parts = []
    if s.pos_count:
        parts.append(_opinions(s.pos_count, s.pos_polarity, "positive"))
    if s.neg_count:
        parts.append(_opinions(s.neg_count, s.neg_polarity, "negative"))
    return ", ".join(parts) + f" on {s.ticker} stock"


def _join(items):
    items = list(items)
    if len(items) <= 1:
        return "".join(items)
    return "; ".join(items[:-1]) + "; and " + items[-1]


def _join_commas(items):
    items = list(items)
    if len(items) <= 1:
        return "".join(items)
    return ", ".join(items[:-1]) + ", and " + items[-1]


def render(rec: NarrativeRecord) -> str:
    out = [f"On {long_date(rec.date)}, we observe " + _join(sentiment_phrase(s) for s in rec.sentiment) + "."]
    if rec.views:
        out.append(
            "Given the historical prices and trading volumes of the stocks, we have "
            + "; ".join(
                f"{pct(v.confidence)} confidence that {v.ticker} will outperform the market by {pct(v.outperformance)}"
                for v in rec.views
            )
            + "."
        )
    held = [(tk, w) for tk, w in zip(rec.tickers, rec.current_weights) if w > WITHDRAW_EPS]
    tomorrow = long_date(rec.date + dt.timedelta(days=1))
    sentence = "Since our current portfolio invests " + _join_commas(f"{100 * w:.2f}% on {tk}" for tk, w in held)
    if rec.withdraw:
        moves = [
            f"all the investment on {tk}" if frac >= 1 - 1e-9 else f"{100 * frac:.2f}% of the investment on {tk}"
            for tk, frac in rec.withdraw.items()
        ]
        sentence += f", by {tomorrow}, we should withdraw " + _join_commas(moves)
        if rec.invest:
            sentence += ", and re-invest them onto " + _join_commas(rec.invest)
        sentence += "."
    else:
        sentence += f", we keep the current allocation through {tomorrow}."
    out.append(sentence)
    return " ".join(out)
