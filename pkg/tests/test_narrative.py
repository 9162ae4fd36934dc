import datetime as dt

import numpy as np
import pytest

from bayesviews.narrative import (
    AssetSentiment,
    AssetView,
    NarrativeRecord,
    long_date,
    make_record,
    reallocation,
)

TICKERS = ("AAPL", "GS", "PFE", "NEM", "SBUX")

REFERENCE_STORY = (
    "On June 1st 2017, we observe 164 positive opinions of polarity +1.90, 58 negative opinions of "
    "polarity -1.77 on AAPL stock; 54 positive opinions of polarity +1.77, 37 negative opinions of "
    "polarity -1.53 on GS stock; 5 positive opinions of polarity +2.46, 1 negative opinion of polarity "
    "-1.33 on PFE stock; no opinion on NEM stock; and 9 positive opinions of polarity +1.76, 5 negative "
    "opinions of polarity -2.00 on SBUX stock. "
    "Given the historical prices and trading volumes of the stocks, we have 6.29% confidence that AAPL "
    "will outperform the market by -70.11%; 23.50% confidence that GS will outperform the market by "
    "263.28%; 0.11% confidence that PFE will outperform the market by -0.50%; 1.21% confidence that "
    "SBUX will outperform the market by 4.57%. "
    "Since our current portfolio invests 21.56% on AAPL, 25.97% on GS, 29.43% on PFE, and 23.04% on "
    "SBUX, by June 2nd 2017, we should withdraw all the investment on AAPL, 2.76% of the investment on "
    "GS, 81.58% of the investment on PFE, and 30.77% of the investment on SBUX, and re-invest them onto NEM."
)

SENTIMENT = np.array([
    [164, 58, 1.90, -1.77],
    [54, 37, 1.77, -1.53],
    [5, 1, 2.46, -1.33],
    [0, 0, 0.0, 0.0],
    [9, 5, 1.76, -2.00],
])


def reference_weights():
    cur = np.array([0.2156, 0.2597, 0.2943, 0.0, 0.2304])
    keep = np.array([0.0, 1 - 0.0276, 1 - 0.8158, 0.0, 1 - 0.3077])
    nxt = cur * keep
    nxt[3] = 1.0 - nxt.sum()
    return cur, nxt


def reference_record():
    cur, nxt = reference_weights()
    rec = make_record(dt.date(2017, 6, 1), TICKERS, SENTIMENT, None, None, cur, nxt)
    # the confidence mapping behind the quoted figures is unknown; supply them directly
    rec.views = [
        AssetView("AAPL", 0.0629, -0.7011),
        AssetView("GS", 0.2350, 2.6328),
        AssetView("PFE", 0.0011, -0.0050),
        AssetView("SBUX", 0.0121, 0.0457),
    ]
    return rec


def test_reference_story_verbatim():
    assert reference_record().render() == REFERENCE_STORY


def test_aapl_and_nem_fragments():
    text = reference_record().render()
    assert "164 positive opinions of polarity +1.90, 58 negative opinions of polarity -1.77 on AAPL stock" in text
    assert "no opinion on NEM stock" in text
    assert "withdraw all the investment on AAPL" in text


def test_reallocation_matches_weight_deltas():
    cur, nxt = reference_weights()
    withdraw, invest = reallocation(cur, nxt, TICKERS)
    for j, tk in enumerate(TICKERS):
        if cur[j] > 0:
            frac = max(0.0, 1 - nxt[j] / cur[j])
            assert withdraw.get(tk, 0.0) == pytest.approx(frac, abs=1e-4)
    assert invest == ["NEM"]


def test_confidence_is_normalised_precision():
    class Ctx:
        class eq:
            pi = np.array([0.001, 0.002, 0.0])
            w_cap = np.array([0.5, 0.25, 0.25])

    from bayesviews.views import CanonicalViews

    views = CanonicalViews([0.01, -0.02, 0.0], [1e-4, 3e-4, np.inf])
    rec = make_record(dt.date(2016, 3, 3), ("A", "B", "C"), np.zeros((3, 4)), views, Ctx, [1, 0, 0], [1, 0, 0])
    assert [v.ticker for v in rec.views] == ["A", "B"]
    assert rec.views[0].confidence == pytest.approx(0.75)
    assert rec.views[1].confidence == pytest.approx(0.25)
    market = 0.001 * 0.5 + 0.002 * 0.25
    assert rec.views[1].outperformance == pytest.approx(-0.02 - market)
    assert "keep the current allocation" in rec.render()


def test_dict_round_trip():
    rec = reference_record()
    back = NarrativeRecord.from_dict(rec.as_dict())
    assert back.render() == rec.render()


@pytest.mark.parametrize("day,text", [(1, "1st"), (2, "2nd"), (3, "3rd"), (4, "4th"), (11, "11th"),
                                      (12, "12th"), (13, "13th"), (21, "21st"), (22, "22nd"), (31, "31st")])
def test_ordinals(day, text):
    assert long_date(dt.date(2017, 1, day)) == f"January {text} 2017"


def test_single_sided_opinions():
    from bayesviews.narrative import sentiment_phrase

    assert sentiment_phrase(AssetSentiment("X", 1, 0, 0.5, 0.0)) == "1 positive opinion of polarity +0.50 on X stock"
    assert sentiment_phrase(AssetSentiment("X", 0, 2, 0.0, -1.0)) == "2 negative opinions of polarity -1.00 on X stock"
