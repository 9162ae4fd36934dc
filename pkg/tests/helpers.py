"""Shared generators and the acceptance ledger used by the test modules."""

import numpy as np

# criterion number -> (status, title, detail); filled by test_acceptance.py
ACCEPTANCE = {}


def random_spd(rng, n, scale=1e-4):
    """Well-conditioned covariance with daily-return-like magnitude."""
    A = rng.normal(size=(n, n))
    return scale * (A @ A.T / n + 0.5 * np.eye(n))


def random_simplex(rng, n):
    return rng.dirichlet(np.ones(n))


def random_psd(rng, k, scale=1e-4):
    """Non-diagonal positive definite matrix."""
    A = rng.normal(size=(k, k))
    return scale * (A @ A.T + 0.1 * np.eye(k))


def poisoned(frame, cut, seed=99):
    """Copy of ``frame`` with every row after ``cut`` replaced by noise."""
    rng = np.random.default_rng(seed)
    rows = slice(cut + 1, None)
    price = np.array(frame.price)
    price[rows] *= np.exp(rng.normal(0, 0.5, size=price[rows].shape))
    volume = np.array(frame.volume)
    volume[rows] *= rng.uniform(0.1, 10, size=volume[rows].shape)
    mcap = np.array(frame.mcap)
    mcap[rows] *= rng.uniform(0.1, 10, size=mcap[rows].shape)
    sent = np.array(frame.sentiment)
    sent[rows, :, :2] = rng.poisson(100, size=sent[rows, :, :2].shape)
    return frame.replace(price=price, volume=volume, mcap=mcap, sentiment=sent)


def causal_strategies(timespan=31):
    """Every tradable strategy, including both learners for the sentiment views."""
    from bayesviews.backtest import Strategy
    from bayesviews.learners.online import LearnerConfig

    out = [Strategy(k, timespan) for k in ("vw", "markowitz", "bl_random")]
    for model in ("denfis", "lstm"):
        out.append(Strategy("bl_sentiment", timespan, LearnerConfig(model=model)))
    out += [Strategy("nt", timespan), Strategy("nt_sentiment", timespan)]
    return out
