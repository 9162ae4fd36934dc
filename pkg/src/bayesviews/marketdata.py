"""Loading, gap filling and split adjustment of daily market panels.

Every series lives in one :class:`MarketFrame`: a ``T x n`` panel indexed by
calendar date and by the ordered ticker list of an :class:`AssetUniverse`.
Input files are long-format CSVs (``date,ticker,value``), see
:func:`load_csv` for the exact schemas.
"""

from __future__ import annotations

import csv
import datetime as dt
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DuplicateDateTicker,
    EventOutOfRange,
    MarketDataError,
    MissingColumn,
    NoHistoricalValue,
    NonPositivePrice,
    UnknownTicker,
)

VALUE_COLUMNS = ("date", "ticker", "value")
SENTIMENT_COLUMNS = ("date", "ticker", "pos_count", "neg_count", "pos_intensity", "neg_intensity")
SPLIT_COLUMNS = ("date", "ticker", "ratio")

FILE_NAMES = {
    "price": "prices.csv",
    "volume": "volumes.csv",
    "mcap": "mcap.csv",
    "sentiment": "sentiment.csv",
    "splits": "splits.csv",
}


@dataclass(frozen=True)
class AssetUniverse:
    tickers: tuple[str, ...]

    def __post_init__(self):
        tickers = tuple(str(t) for t in self.tickers)
        object.__setattr__(self, "tickers", tickers)
        if len(tickers) < 1:
            raise ValueError("universe needs at least one ticker")
        if len(set(tickers)) != len(tickers):
            raise ValueError(f"duplicate tickers in universe: {tickers}")

    @property
    def n(self) -> int:
        return len(self.tickers)

    def index(self, ticker: str) -> int:
        try:
            return self.tickers.index(ticker)
        except ValueError:
            raise UnknownTicker(f"ticker {ticker!r} not in universe {self.tickers}") from None


@dataclass(frozen=True)
class SentimentRecord:
    pos_count: int = 0
    neg_count: int = 0
    pos_intensity: float = 0.0
    neg_intensity: float = 0.0

    def __post_init__(self):
        if self.pos_count < 0 or self.neg_count < 0:
            raise ValueError("message counts must be nonnegative")
        if self.pos_intensity < 0:
            raise ValueError("positive intensity must be >= 0")
        if self.neg_intensity > 0:
            raise ValueError("negative intensity must be <= 0")

    @classmethod
    def from_array(cls, row) -> "SentimentRecord":
        return cls(int(row[0]), int(row[1]), float(row[2]), float(row[3]))

    def as_array(self) -> np.ndarray:
        return np.array([self.pos_count, self.neg_count, self.pos_intensity, self.neg_intensity], dtype=float)

    @property
    def empty(self) -> bool:
        return self.pos_count == 0 and self.neg_count == 0


@dataclass(frozen=True)
class SplitEvent:
    ticker: str
    date: dt.date
    ratio: float

    def __post_init__(self):
        if not (self.ratio > 0 and math.isfinite(self.ratio)):
            raise ValueError(f"split ratio must be positive, got {self.ratio}")


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MarketFrame:
    """Date-aligned panel of prices, volumes, market caps and sentiment.

    ``sentiment`` has shape ``(T, n, 4)`` with the last axis holding
    ``(pos_count, neg_count, pos_intensity, neg_intensity)``. Arrays are
    read-only; operations return new frames.
    """

    universe: AssetUniverse
    dates: np.ndarray
    price: np.ndarray
    volume: np.ndarray
    mcap: np.ndarray
    sentiment: np.ndarray = field(repr=False)

    def __post_init__(self):
        dates = np.asarray(self.dates, dtype="datetime64[D]").copy()
        dates.setflags(write=False)
        object.__setattr__(self, "dates", dates)
        for name in ("price", "volume", "mcap", "sentiment"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))
        T, n = len(dates), self.universe.n
        for name in ("price", "volume", "mcap"):
            if getattr(self, name).shape != (T, n):
                raise MarketDataError(f"{name} has shape {getattr(self, name).shape}, expected {(T, n)}")
        if self.sentiment.shape != (T, n, 4):
            raise MarketDataError(f"sentiment has shape {self.sentiment.shape}, expected {(T, n, 4)}")
        if T > 1 and not np.all(np.diff(dates).astype(int) > 0):
            raise MarketDataError("dates must be strictly increasing")

    @property
    def T(self) -> int:
        return len(self.dates)

    @property
    def n(self) -> int:
        return self.universe.n

    @property
    def tickers(self) -> tuple[str, ...]:
        return self.universe.tickers

    @property
    def is_contiguous(self) -> bool:
        return self.T < 2 or bool(np.all(np.diff(self.dates).astype(int) == 1))

    def date(self, t: int) -> dt.date:
        return self.dates[t].astype(dt.date)

    def index_of(self, date) -> int:
        """Row index of ``date``; raises ``KeyError`` when absent."""
        d = np.datetime64(date, "D")
        i = int(np.searchsorted(self.dates, d))
        if i >= self.T or self.dates[i] != d:
            raise KeyError(f"date {date} not in frame")
        return i

    def sentiment_record(self, t: int, asset: int) -> SentimentRecord:
        return SentimentRecord.from_array(self.sentiment[t, asset])

    def rows(self, start: int, stop: int) -> "MarketFrame":
        """Frame restricted to rows ``start:stop``."""
        return MarketFrame(
            self.universe,
            self.dates[start:stop],
            self.price[start:stop],
            self.volume[start:stop],
            self.mcap[start:stop],
            self.sentiment[start:stop],
        )

    def history(self, t: int) -> "MarketFrame":
        """Everything known at the close of day ``t`` (rows ``0..t``)."""
        return self.rows(0, t + 1)

    def trim(self, start=None, end=None) -> "MarketFrame":
        lo = 0 if start is None else int(np.searchsorted(self.dates, np.datetime64(start, "D"), side="left"))
        hi = self.T if end is None else int(np.searchsorted(self.dates, np.datetime64(end, "D"), side="right"))
        return self.rows(lo, hi)

    def replace(self, **changes) -> "MarketFrame":
        fields = dict(
            universe=self.universe, dates=self.dates, price=self.price,
            volume=self.volume, mcap=self.mcap, sentiment=self.sentiment,
        )
        fields.update(changes)
        return MarketFrame(**fields)

    def equals(self, other: "MarketFrame") -> bool:
        return (
            self.universe == other.universe
            and np.array_equal(self.dates, other.dates)
            and all(
                np.array_equal(getattr(self, k), getattr(other, k), equal_nan=True)
                for k in ("price", "volume", "mcap", "sentiment")
            )
        )


# ---------------------------------------------------------------------------
# CSV input / output
# ---------------------------------------------------------------------------


def _parse_date(text, path, line):
    try:
        return dt.date.fromisoformat(text.strip())
    except (ValueError, AttributeError):
        raise MarketDataError(f"bad ISO-8601 date {text!r}", path, line) from None


def _parse_float(text, column, path, line):
    try:
        x = float(text)
    except (TypeError, ValueError):
        raise MarketDataError(f"column {column!r}: cannot parse {text!r} as a number", path, line) from None
    if not math.isfinite(x):
        raise MarketDataError(f"column {column!r}: non-finite value {text!r}", path, line)
    return x


def _parse_count(text, column, path, line):
    x = _parse_float(text, column, path, line)
    if x < 0 or x != int(x):
        raise MarketDataError(f"column {column!r}: expected a nonnegative integer, got {text!r}", path, line)
    return int(x)


def _read_rows(path, columns):
    """Yield ``(line_number, row_dict)`` for each data row of a CSV file."""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in columns:
            if col not in header:
                raise MissingColumn(f"missing column {col!r} (header: {header})", path, 1)
        for row in reader:
            if all(not (v or "").strip() for v in row.values()):
                continue
            for col in columns:
                if row.get(col) is None or not str(row[col]).strip():
                    raise MarketDataError(f"empty field {col!r}", path, reader.line_num)
            yield reader.line_num, row


def read_value_file(path, kind="value"):
    """Parse a ``date,ticker,value`` file into ``{(date, ticker): value}``."""
    out = {}
    for line, row in _read_rows(path, VALUE_COLUMNS):
        date = _parse_date(row["date"], path, line)
        ticker = row["ticker"].strip()
        value = _parse_float(row["value"], "value", path, line)
        if kind == "price" and value <= 0:
            raise NonPositivePrice(f"price {value} for {ticker} on {date} is not positive", path, line)
        if kind in ("volume", "mcap") and value < 0:
            raise MarketDataError(f"negative {kind} {value} for {ticker} on {date}", path, line)
        key = (date, ticker)
        if key in out:
            raise DuplicateDateTicker(f"duplicate row for {ticker} on {date}", path, line)
        out[key] = (value, line)
    return out


def read_sentiment_file(path):
    out = {}
    for line, row in _read_rows(path, SENTIMENT_COLUMNS):
        date = _parse_date(row["date"], path, line)
        ticker = row["ticker"].strip()
        rec = (
            _parse_count(row["pos_count"], "pos_count", path, line),
            _parse_count(row["neg_count"], "neg_count", path, line),
            _parse_float(row["pos_intensity"], "pos_intensity", path, line),
            _parse_float(row["neg_intensity"], "neg_intensity", path, line),
        )
        if rec[2] < 0:
            raise MarketDataError(f"pos_intensity {rec[2]} must be >= 0", path, line)
        if rec[3] > 0:
            raise MarketDataError(f"neg_intensity {rec[3]} must be <= 0", path, line)
        key = (date, ticker)
        if key in out:
            raise DuplicateDateTicker(f"duplicate row for {ticker} on {date}", path, line)
        out[key] = (rec, line)
    return out


def load_splits(path) -> list[SplitEvent]:
    events = []
    for line, row in _read_rows(path, SPLIT_COLUMNS):
        ratio = _parse_float(row["ratio"], "ratio", path, line)
        if ratio <= 0:
            raise MarketDataError(f"split ratio {ratio} must be positive", path, line)
        events.append(SplitEvent(row["ticker"].strip(), _parse_date(row["date"], path, line), ratio))
    return events


def load_csv(price_path, volume_path, mcap_path, sentiment_path, universe: AssetUniverse | Sequence[str] | None = None) -> MarketFrame:
    """Read the four long-format CSV files into one frame.

    The row set is every date with at least one price observation, plus any
    date in the other files falling inside the price date range. Cells with no
    observation are NaN (sentiment: NaN too) until :func:`fill_missing`.

    Tickers in the price file but not in ``universe`` are ignored; universe
    tickers with no price rows are dropped. A ticker appearing in the volume,
    mcap or sentiment file without a price series raises ``UnknownTicker``.
    """
    prices = read_value_file(price_path, "price")
    price_tickers = {tk for _, tk in prices}
    if universe is None:
        wanted = sorted(price_tickers)
    else:
        requested = universe.tickers if isinstance(universe, AssetUniverse) else tuple(universe)
        wanted = [tk for tk in requested if tk in price_tickers]
    if not wanted:
        raise UnknownTicker(f"none of the requested tickers have prices", price_path)
    uni = AssetUniverse(tuple(wanted))
    col = {tk: j for j, tk in enumerate(uni.tickers)}

    others = {
        "volume": (volume_path, read_value_file(volume_path, "volume")),
        "mcap": (mcap_path, read_value_file(mcap_path, "mcap")),
        "sentiment": (sentiment_path, read_sentiment_file(sentiment_path)),
    }
    for name, (path, table) in others.items():
        for (date, tk), (_, line) in table.items():
            if tk not in price_tickers:
                raise UnknownTicker(f"ticker {tk!r} has no price series", path, line)

    price_dates = {d for d, tk in prices if tk in col}
    lo, hi = min(price_dates), max(price_dates)
    all_dates = set(price_dates)
    for _, table in others.values():
        all_dates.update(d for d, tk in table if tk in col and lo <= d <= hi)
    dates = sorted(all_dates)
    row = {d: i for i, d in enumerate(dates)}
    T, n = len(dates), uni.n

    def fill(table, shape):
        a = np.full(shape, np.nan)
        for (d, tk), (v, _) in table.items():
            if tk in col and d in row:
                a[row[d], col[tk]] = v
        return a

    price = fill(prices, (T, n))
    volume = fill(others["volume"][1], (T, n))
    mcap = fill(others["mcap"][1], (T, n))
    sentiment = fill(others["sentiment"][1], (T, n, 4))
    return MarketFrame(uni, np.array(dates, dtype="datetime64[D]"), price, volume, mcap, sentiment)


def _fmt(x, decimals):
    if decimals is None:
        return repr(float(x))
    return f"{x:.{decimals}f}"


def _atomic_write_rows(path, header, rows):
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    os.replace(tmp, path)


def write_csv(frame: MarketFrame, directory, decimals: int | None = None, splits: Iterable[SplitEvent] = ()) -> Path:
    """Write ``frame`` as the standard file set under ``directory``.

    With ``decimals=None`` floats are written with ``repr`` so that
    :func:`load_csv` reproduces them bit for bit. NaN cells are omitted.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    iso = [str(d) for d in frame.dates]
    for kind in ("price", "volume", "mcap"):
        a = getattr(frame, kind)
        rows = (
            (iso[t], tk, _fmt(a[t, j], decimals))
            for t in range(frame.T)
            for j, tk in enumerate(frame.tickers)
            if not np.isnan(a[t, j])
        )
        _atomic_write_rows(directory / FILE_NAMES[kind], VALUE_COLUMNS, rows)
    s = frame.sentiment
    rows = (
        (iso[t], tk, int(s[t, j, 0]), int(s[t, j, 1]), _fmt(s[t, j, 2], decimals), _fmt(s[t, j, 3], decimals))
        for t in range(frame.T)
        for j, tk in enumerate(frame.tickers)
        if not np.isnan(s[t, j, 0])
    )
    _atomic_write_rows(directory / FILE_NAMES["sentiment"], SENTIMENT_COLUMNS, rows)
    splits = list(splits)
    if splits:
        _atomic_write_rows(
            directory / FILE_NAMES["splits"], SPLIT_COLUMNS,
            ((e.date.isoformat(), e.ticker, repr(float(e.ratio))) for e in splits),
        )
    return directory


# ---------------------------------------------------------------------------
# Cleaning
# ---------------------------------------------------------------------------


def _ffill(a):
    """Carry the last observation forward along axis 0."""
    out = np.array(a, dtype=float)
    for t in range(1, out.shape[0]):
        gap = np.isnan(out[t])
        out[t][gap] = out[t - 1][gap]
    return out


def fill_missing(frame: MarketFrame) -> MarketFrame:
    """Reindex to every calendar day and fill the gaps causally.

    Price, volume and market cap take the most recent earlier observation;
    nothing is ever pulled backwards from the future. Days with no sentiment
    rows become all-zero records.
    """
    if frame.T == 0:
        return frame
    for name in ("price", "volume", "mcap"):
        first = getattr(frame, name)[0]
        missing = np.isnan(first)
        if missing.any():
            bad = [frame.tickers[j] for j in np.flatnonzero(missing)]
            raise NoHistoricalValue(f"no {name} observation at or before {frame.dates[0]} for {bad}")
    start, stop = frame.dates[0], frame.dates[-1]
    days = np.arange(start, stop + np.timedelta64(1, "D"), dtype="datetime64[D]")
    pos = (frame.dates - start).astype(int)
    T, n = len(days), frame.n

    def spread(a, shape):
        out = np.full(shape, np.nan)
        out[pos] = a
        return out

    price = _ffill(spread(frame.price, (T, n)))
    volume = _ffill(spread(frame.volume, (T, n)))
    mcap = _ffill(spread(frame.mcap, (T, n)))
    sentiment = spread(frame.sentiment, (T, n, 4))
    sentiment = np.where(np.isnan(sentiment), 0.0, sentiment)
    return MarketFrame(frame.universe, days, price, volume, mcap, sentiment)


def adjust_splits(frame: MarketFrame, events: Iterable[SplitEvent]) -> MarketFrame:
    """Rescale pre-split history to the post-split share count.

    For an ``r``-for-1 split effective on ``date``, prices strictly before
    ``date`` are divided by ``r`` and volumes multiplied by ``r``; market
    capitalisation is untouched.
    """
    events = list(events)
    if not events:
        return frame
    price = np.array(frame.price)
    volume = np.array(frame.volume)
    for ev in events:
        j = frame.universe.index(ev.ticker)
        d = np.datetime64(ev.date, "D")
        if frame.T == 0 or d < frame.dates[0] or d > frame.dates[-1]:
            raise EventOutOfRange(
                f"split {ev.ticker} {ev.date} outside frame range "
                f"{frame.dates[0] if frame.T else None}..{frame.dates[-1] if frame.T else None}"
            )
        cut = int(np.searchsorted(frame.dates, d, side="left"))
        price[:cut, j] /= ev.ratio
        volume[:cut, j] *= ev.ratio
    return frame.replace(price=price, volume=volume)


def load_directory(data_dir, universe=None, start=None, end=None, fill=True) -> MarketFrame:
    """Load ``prices/volumes/mcap/sentiment[/splits].csv`` from ``data_dir``.

    The returned frame is gap-filled and split-adjusted, then trimmed to
    ``[start, end]``. Filling happens before trimming so a ``start`` falling
    on a weekend still inherits the preceding close.
    """
    data_dir = Path(data_dir)
    frame = load_csv(
        data_dir / FILE_NAMES["price"],
        data_dir / FILE_NAMES["volume"],
        data_dir / FILE_NAMES["mcap"],
        data_dir / FILE_NAMES["sentiment"],
        universe,
    )
    if fill:
        frame = fill_missing(frame)
    split_path = data_dir / FILE_NAMES["splits"]
    if split_path.exists():
        events = [e for e in load_splits(split_path) if e.ticker in frame.tickers]
        frame = adjust_splits(frame, events)
    if start is not None or end is not None:
        frame = frame.trim(start, end)
    return frame


def find_price_jumps(frame: MarketFrame, threshold: float = 3.0):
    """Consecutive observed prices whose ratio exceeds ``threshold`` either way.

    Returns ``(date, ticker, ratio)`` tuples with ``ratio = prev / current``,
    so a 7-for-1 split shows up as roughly 7.
    """
    hits = []
    for j, tk in enumerate(frame.tickers):
        col = frame.price[:, j]
        obs = np.flatnonzero(~np.isnan(col))
        for a, b in zip(obs[:-1], obs[1:]):
            ratio = col[a] / col[b]
            if ratio >= threshold or ratio <= 1.0 / threshold:
                hits.append((frame.date(b), tk, float(ratio)))
    return hits


def missing_day_counts(frame: MarketFrame) -> dict[str, int]:
    """Calendar days inside the frame span with no price observation, per ticker."""
    if frame.T == 0:
        return {tk: 0 for tk in frame.tickers}
    span = int((frame.dates[-1] - frame.dates[0]).astype(int)) + 1
    observed = (~np.isnan(frame.price)).sum(axis=0)
    return {tk: int(span - observed[j]) for j, tk in enumerate(frame.tickers)}
