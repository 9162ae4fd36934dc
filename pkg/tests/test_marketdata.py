import datetime as dt

import numpy as np
import pytest

from bayesviews import marketdata as md
from bayesviews import synthetic
from bayesviews.errors import (
    DuplicateDateTicker,
    EventOutOfRange,
    MissingColumn,
    NoHistoricalValue,
    NonPositivePrice,
    UnknownTicker,
)


def write_files(tmp_path, prices, volumes=None, mcaps=None, sentiment=None):
    """Write the four CSV files from row lists (no header)."""
    volumes = volumes if volumes is not None else [(d, tk, "1000") for d, tk, _ in prices]
    mcaps = mcaps if mcaps is not None else [(d, tk, "5000") for d, tk, _ in prices]
    sentiment = sentiment if sentiment is not None else []

    def dump(name, header, rows):
        lines = [header] + [",".join(map(str, r)) for r in rows]
        (tmp_path / name).write_text("\n".join(lines) + "\n")

    dump("prices.csv", "date,ticker,value", prices)
    dump("volumes.csv", "date,ticker,value", volumes)
    dump("mcap.csv", "date,ticker,value", mcaps)
    dump("sentiment.csv", "date,ticker,pos_count,neg_count,pos_intensity,neg_intensity", sentiment)
    return [tmp_path / f for f in ("prices.csv", "volumes.csv", "mcap.csv", "sentiment.csv")]


def three_days():
    return [
        ("2017-01-02", "AAA", "10.0"), ("2017-01-02", "BBB", "20.0"),
        ("2017-01-03", "AAA", "11.0"), ("2017-01-03", "BBB", "19.0"),
        ("2017-01-04", "AAA", "12.0"), ("2017-01-04", "BBB", "21.0"),
    ]


class TestLoad:
    def test_two_tickers_three_days(self, tmp_path):
        paths = write_files(tmp_path, three_days(), sentiment=[("2017-01-03", "AAA", 4, 1, 1.5, -0.5)])
        f = md.load_csv(*paths, md.AssetUniverse(("AAA", "BBB")))
        assert (f.T, f.n) == (3, 2)
        assert f.tickers == ("AAA", "BBB")
        np.testing.assert_array_equal(f.price[:, 0], [10, 11, 12])
        np.testing.assert_array_equal(f.sentiment[1, 0], [4, 1, 1.5, -0.5])
        # no sentiment rows on the other cells yet
        assert np.isnan(f.sentiment[0, 0, 0])

    def test_rows_sorted_by_date(self, tmp_path):
        rows = three_days()[::-1]
        f = md.load_csv(*write_files(tmp_path, rows))
        assert list(f.dates.astype(str)) == ["2017-01-02", "2017-01-03", "2017-01-04"]

    def test_nonpositive_price_names_line(self, tmp_path):
        rows = three_days()
        rows[3] = ("2017-01-03", "BBB", "0")
        paths = write_files(tmp_path, rows)
        with pytest.raises(NonPositivePrice) as exc:
            md.load_csv(*paths)
        # header is line 1, so data row index 3 sits on line 5
        assert exc.value.line == 5
        assert "prices.csv:5" in str(exc.value)

    def test_duplicate_row(self, tmp_path):
        rows = three_days() + [("2017-01-02", "AAA", "10.5")]
        with pytest.raises(DuplicateDateTicker):
            md.load_csv(*write_files(tmp_path, rows))

    def test_missing_column(self, tmp_path):
        paths = write_files(tmp_path, three_days())
        paths[3].write_text("date,ticker,pos_count,neg_count,pos_intensity\n")
        with pytest.raises(MissingColumn) as exc:
            md.load_csv(*paths)
        assert "neg_intensity" in str(exc.value)
        assert "sentiment.csv" in str(exc.value)

    def test_aux_ticker_without_prices(self, tmp_path):
        vols = [(d, tk, "1") for d, tk, _ in three_days()] + [("2017-01-02", "ZZZ", "1")]
        with pytest.raises(UnknownTicker):
            md.load_csv(*write_files(tmp_path, three_days(), volumes=vols))

    def test_universe_intersection(self, tmp_path):
        f = md.load_csv(*write_files(tmp_path, three_days()), ["BBB", "CCC"])
        assert f.tickers == ("BBB",)

    def test_universe_invariants(self):
        with pytest.raises(ValueError):
            md.AssetUniverse(("A", "A"))
        with pytest.raises(ValueError):
            md.AssetUniverse(())
        assert md.AssetUniverse(("A", "B")).index("B") == 1
        with pytest.raises(UnknownTicker):
            md.AssetUniverse(("A",)).index("Z")

    def test_sentiment_record_signs(self):
        assert md.SentimentRecord().empty
        with pytest.raises(ValueError):
            md.SentimentRecord(1, 0, -0.1, 0.0)
        with pytest.raises(ValueError):
            md.SentimentRecord(0, 1, 0.0, 0.3)


class TestFill:
    def test_weekend_carries_friday(self, tmp_path):
        # 2017-01-06 is a Friday
        rows = [("2017-01-06", "AAA", "100"), ("2017-01-09", "AAA", "102")]
        sent = [("2017-01-07", "AAA", 3, 0, 1.0, 0.0)]
        f = md.fill_missing(md.load_csv(*write_files(tmp_path, rows, sentiment=sent)))
        assert f.T == 4 and f.is_contiguous
        np.testing.assert_array_equal(f.price[:, 0], [100, 100, 100, 102])
        np.testing.assert_array_equal(f.sentiment[:, 0, 0], [0, 3, 0, 0])

    def test_dense_frame_unchanged(self, frame):
        assert md.fill_missing(frame).equals(frame)

    def test_idempotent(self):
        f = synthetic.make_frame(40, seed=2, weekend_gaps=True)
        once = md.fill_missing(f)
        assert md.fill_missing(once).equals(once)
        assert not np.isnan(once.price).any()

    def test_first_row_missing(self, tmp_path):
        rows = [("2017-01-02", "AAA", "1"), ("2017-01-03", "AAA", "1"), ("2017-01-03", "BBB", "2")]
        f = md.load_csv(*write_files(tmp_path, rows))
        with pytest.raises(NoHistoricalValue):
            md.fill_missing(f)

    def test_no_lookahead(self):
        f = synthetic.make_frame(30, seed=5, weekend_gaps=True)
        filled = md.fill_missing(f)
        # a gap is never filled with a later observation
        for j in range(f.n):
            obs = np.flatnonzero(~np.isnan(f.price[:, j]))
            for t in range(f.T):
                last = obs[obs <= t][-1]
                assert filled.price[t, j] == f.price[last, j]


class TestSplits:
    def make(self):
        dates = np.arange(np.datetime64("2014-06-05"), np.datetime64("2014-06-12"))
        price = np.array([[700.0], [700.0], [700.0], [700.0], [100.0], [101.0], [102.0]])
        vol = np.full((7, 1), 50.0)
        mcap = np.full((7, 1), 7e5)
        sent = np.zeros((7, 1, 4))
        return md.MarketFrame(md.AssetUniverse(("AAPL",)), dates, price, vol, mcap, sent)

    def test_seven_for_one(self):
        f = self.make()
        ev = md.SplitEvent("AAPL", dt.date(2014, 6, 9), 7.0)
        adj = md.adjust_splits(f, [ev])
        assert adj.price[3, 0] == pytest.approx(100.0)
        assert adj.price[4, 0] / adj.price[3, 0] == pytest.approx(1.0)
        np.testing.assert_array_equal(adj.volume[:4, 0], 350.0)
        np.testing.assert_array_equal(adj.mcap, f.mcap)

    def test_two_for_one_volume(self):
        f = self.make()
        adj = md.adjust_splits(f, [md.SplitEvent("AAPL", dt.date(2014, 6, 9), 2.0)])
        assert adj.volume[0, 0] == 100.0

    def test_returns_unchanged_off_split_date(self):
        f = synthetic.make_frame(20, seed=1)
        ev = md.SplitEvent("CCC", f.date(10), 4.0)
        adj = md.adjust_splits(f, [ev])
        j = f.tickers.index("CCC")
        r0 = f.price[1:, j] / f.price[:-1, j]
        r1 = adj.price[1:, j] / adj.price[:-1, j]
        mask = np.arange(1, f.T) != 10
        np.testing.assert_allclose(r1[mask], r0[mask], rtol=1e-14)
        assert r1[9] == pytest.approx(4.0 * r0[9])

    def test_identity_cases(self, frame):
        assert md.adjust_splits(frame, []).equals(frame)
        ev = md.SplitEvent(frame.tickers[0], frame.date(5), 1.0)
        assert md.adjust_splits(frame, [ev]).equals(frame)

    def test_out_of_range(self, frame):
        with pytest.raises(EventOutOfRange):
            md.adjust_splits(frame, [md.SplitEvent(frame.tickers[0], dt.date(1990, 1, 1), 2.0)])
        with pytest.raises(ValueError):
            md.SplitEvent("X", dt.date(2000, 1, 1), 0.0)


class TestRoundTrip:
    def test_bit_exact(self, tmp_path):
        f = synthetic.make_frame(25, seed=4)
        md.write_csv(f, tmp_path)
        g = md.load_directory(tmp_path)
        assert g.equals(f)

    def test_declared_decimals(self, tmp_path):
        f = synthetic.make_frame(10, seed=4)
        md.write_csv(f, tmp_path, decimals=4)
        g = md.load_directory(tmp_path)
        np.testing.assert_array_equal(g.price, np.round(f.price, 4))
        again = tmp_path / "again"
        md.write_csv(g, again, decimals=4)
        assert md.load_directory(again).equals(g)

    def test_directory_applies_splits_and_trim(self, tmp_path):
        f = synthetic.make_frame(30, seed=4)
        ev = md.SplitEvent("AAA", f.date(12), 2.0)
        md.write_csv(f, tmp_path, splits=[ev])
        g = md.load_directory(tmp_path, start=f.date(5), end=f.date(20))
        assert g.T == 16 and g.date(0) == f.date(5)
        np.testing.assert_allclose(g.price[:7, 0], f.price[5:12, 0] / 2.0)


def test_price_jump_detector(frame):
    price = np.array(frame.price)
    price[100:, 2] /= 7.0
    hits = md.find_price_jumps(frame.replace(price=price))
    assert [(d, tk) for d, tk, _ in hits] == [(frame.date(100), frame.tickers[2])]
    assert hits[0][2] == pytest.approx(7.0, rel=0.1)


def test_missing_day_counts():
    f = synthetic.make_frame(14, seed=0, weekend_gaps=True)
    counts = md.missing_day_counts(f)
    assert set(counts.values()) == {4}
