"""From CSV files to a clean daily panel, then through the command line.

Run with ``python3 demos/05_data.py``.
"""

# %%
import tempfile
from pathlib import Path

import numpy as np

from bayesviews import cli
from bayesviews import marketdata as md
from bayesviews import synthetic

work = Path(tempfile.mkdtemp(prefix="bayesviews-demo-"))

# %% [markdown]
# Raw exchange data skips weekends, and one ticker has an unadjusted 7-for-1
# split. Write the standard file set without a splits entry first.

# %%
raw = synthetic.make_frame(300, seed=2, weekend_gaps=True)
day = 80 + int(np.flatnonzero(~np.isnan(raw.price[80:, 0]))[0])  # first trading day from row 80
price = np.array(raw.price)
price[day:, 0] /= 7.0
raw = raw.replace(price=price)
md.write_csv(raw, work)
print(sorted(p.name for p in work.iterdir()))

# %%
cli.main(["validate-data", "--data-dir", str(work)])

# %% [markdown]
# Record the split, and the loader rescales history before filling gaps.

# %%
md.write_csv(raw, work, splits=[md.SplitEvent(raw.tickers[0], raw.date(day), 7.0)])
cli.main(["validate-data", "--data-dir", str(work)])
frame = md.load_directory(work)
r = frame.price[1:, 0] / frame.price[:-1, 0]
print(f"overnight moves after adjustment: {r.min():.3f} .. {r.max():.3f}")

# %%
cli.main(["backtest", "--data-dir", str(work), "--strategy", "vw,markowitz", "--timespan", "31",
          "--out", str(work / "out")])
print((work / "out" / "metrics_table.csv").read_text())
