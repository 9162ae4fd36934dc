"""Compare every strategy on a synthetic five-asset market.

Run with ``python3 demos/03_backtest.py`` (a few seconds).
"""

# %%
import time

from bayesviews import backtest as bt
from bayesviews import synthetic
from bayesviews.learners.online import LearnerConfig

frame = synthetic.make_frame(400, seed=11)
print(f"{frame.T} days, tickers {frame.tickers}")

# %%
strategies = [
    bt.Strategy("vw"),
    bt.Strategy("markowitz"),
    bt.Strategy("bl_random", seed=3),
    bt.Strategy("bl_sentiment", learner=LearnerConfig(model="denfis")),
    bt.Strategy("bl_sentiment", learner=LearnerConfig(model="lstm")),
    bt.Strategy("nt"),
    bt.Strategy("nt_sentiment"),
    bt.Strategy("oracle"),
]
reports = []
for s in strategies:
    t0 = time.perf_counter()
    rep = bt.run(s, frame)
    reports.append((s.name, rep))
    print(f"{s.name:22s} done in {time.perf_counter() - t0:5.1f} s")

# %% [markdown]
# The oracle uses tomorrow's prices and only marks the ceiling. Synthetic
# sentiment here is noise, so the learners have nothing real to find.

# %%
print()
print(f"{'strategy':22s} {'RMSE':>7s} {'SR':>6s} {'MDD%':>7s} {'AR%':>8s} {'final':>10s}")
for name, rep in reports:
    m = rep.metrics
    sr = "n/a" if m["sr"] is None else f"{m['sr']:.2f}"
    print(f"{name:22s} {m['rmse']:7.4f} {sr:>6s} {100 * m['mdd']:7.2f} {100 * m['ar']:8.2f} {m['final_value']:10.0f}")
