"""Narrate one trading day of a sentiment-driven run.

Run with ``python3 demos/04_explain.py``.
"""

# %%
import json

from bayesviews import backtest as bt
from bayesviews import synthetic

frame = synthetic.make_frame(200, seed=5)
rep = bt.run(bt.Strategy("bl_sentiment", timespan=60), frame)

# %% [markdown]
# Every simulated day leaves a record: the mood counts, the views with their
# share of the total view precision, and how capital moves to the next day.

# %%
rec = rep.narrative_log[100]
print(rec.render())

# %%
print(json.dumps(rec.as_dict(), indent=1)[:800], "...")
