"""Command-line front end.

::

    bayesviews backtest --data-dir data/ --strategy vw,markowitz --timespan 90,180 --out out/
    bayesviews explain --out out/ --strategy bl_sentiment --explain-date 2017-06-01
    bayesviews validate-data --data-dir data/

Settings can also come from a flat JSON file given with ``--config``; flags
override it. Exit codes: 0 ok, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import datetime as dt
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

from . import marketdata as md
from .backtest import BacktestConfig, Strategy, StrategyKind, run, write_metrics_table, write_report
from .errors import BayesViewsError, DateNotInRun
from .learners.online import LearnerConfig
from .narrative import NarrativeRecord

ENV_DATA_DIR = "BAYESVIEWS_DATA_DIR"
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

log = logging.getLogger("bayesviews")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    data_dir: str | None = None
    strategies: list = field(default_factory=lambda: ["vw"])
    timespans: list = field(default_factory=lambda: [90])
    delta: float = 0.25
    tau: float = 0.05
    model: str = "denfis"
    sentiment: bool = True
    d: float = 0.21
    start: str | None = None
    end: str | None = None
    seed: int = 0
    out: str = "out"
    jobs: int = 1

    def validate(self):
        if not self.data_dir:
            raise UsageError(f"no data directory: pass --data-dir or set {ENV_DATA_DIR}")
        known = {k.value for k in StrategyKind}
        for s in self.strategies:
            if s not in known:
                raise UsageError(f"unknown strategy {s!r}; choose from {', '.join(sorted(known))}")
        if not self.strategies:
            raise UsageError("no strategy given")
        for ts in self.timespans:
            if ts < 31:
                raise UsageError(f"timespan must be at least 31 days, got {ts}")
        if self.model not in ("denfis", "lstm"):
            raise UsageError(f"unknown model {self.model!r}")
        if not (self.delta > 0 and self.tau > 0):
            raise UsageError("delta and tau must be positive")
        for d in (self.start, self.end):
            if d is not None:
                try:
                    dt.date.fromisoformat(d)
                except ValueError:
                    raise UsageError(f"bad date {d!r}; expected YYYY-MM-DD") from None
        return self

    def cells(self):
        """``(file_stem, Strategy)`` for every requested strategy x timespan."""
        learner = LearnerConfig(model=self.model, d=self.d, seed=self.seed, use_sentiment=self.sentiment)
        for ts in self.timespans:
            for s in self.strategies:
                stem = s if len(self.timespans) == 1 else f"{s}_{ts}"
                yield stem, Strategy(StrategyKind(s), timespan=ts, learner=learner, seed=self.seed)


def _split_list(value, cast=str):
    if isinstance(value, (list, tuple)):
        items = value
    else:
        items = [v for v in str(value).split(",") if v.strip()]
    try:
        return [cast(str(v).strip()) for v in items]
    except ValueError:
        raise UsageError(f"cannot parse list {value!r}") from None


def _on_off(value):
    if isinstance(value, bool):
        return value
    v = str(value).lower()
    if v in ("on", "true", "1", "yes"):
        return True
    if v in ("off", "false", "0", "no"):
        return False
    raise UsageError(f"expected on/off, got {value!r}")


# config-file / flag key -> (RunConfig field, converter)
_KEYS = {
    "data_dir": ("data_dir", str),
    "strategy": ("strategies", _split_list),
    "strategies": ("strategies", _split_list),
    "timespan": ("timespans", lambda v: _split_list(v, int)),
    "timespans": ("timespans", lambda v: _split_list(v, int)),
    "delta": ("delta", float),
    "tau": ("tau", float),
    "model": ("model", str),
    "sentiment": ("sentiment", _on_off),
    "d": ("d", float),
    "start": ("start", str),
    "end": ("end", str),
    "seed": ("seed", int),
    "out": ("out", str),
    "jobs": ("jobs", int),
}


def build_config(args) -> RunConfig:
    """Defaults, then environment, then ``--config`` file, then flags."""
    values = {}
    if os.environ.get(ENV_DATA_DIR):
        values["data_dir"] = os.environ[ENV_DATA_DIR]
    if getattr(args, "config", None):
        try:
            raw = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(raw, dict):
            raise UsageError("config file must hold a flat JSON object")
        for k, v in raw.items():
            if k not in _KEYS:
                raise UsageError(f"unknown config key {k!r}")
            name, conv = _KEYS[k]
            values[name] = conv(v)
    for k, (name, conv) in _KEYS.items():
        v = getattr(args, k, None)
        if v is not None:
            values[name] = conv(v)
    allowed = {f.name for f in fields(RunConfig)}
    return RunConfig(**{k: v for k, v in values.items() if k in allowed})


def _run_cell(args):
    stem, strategy, frame, bt = args
    return stem, run(strategy, frame, bt)


def cmd_backtest(cfg: RunConfig, explain_date=None, out=None) -> int:
    out = out or sys.stdout
    frame = md.load_directory(cfg.data_dir, start=cfg.start, end=cfg.end)
    bt = BacktestConfig(delta=cfg.delta, tau=cfg.tau)
    cells = [(stem, s, frame, bt) for stem, s in cfg.cells()]
    if cfg.jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(cfg.jobs) as pool:
            results = list(pool.map(_run_cell, cells))
    else:
        results = [_run_cell(c) for c in cells]
    out_dir = Path(cfg.out)
    for stem, rep in results:
        rep.config["run"] = {k: getattr(cfg, k) for k in ("strategies", "timespans", "model", "sentiment", "seed")}
        write_report(rep, out_dir, stem)
        m = rep.metrics
        print(f"{stem}: final value {m['final_value']:.2f}, AR {100 * m['ar']:.2f}%, MDD {100 * m['mdd']:.2f}%", file=out)
    table = write_metrics_table(results, out_dir / "metrics_table.csv")
    print(f"wrote {len(results)} report(s) and {table}", file=out)
    if explain_date is not None:
        for stem, rep in results:
            print(f"[{stem}]", file=out)
            print(find_record([r.as_dict() for r in rep.narrative_log], explain_date).render(), file=out)
    return EXIT_OK


def find_record(narrative, date) -> NarrativeRecord:
    if isinstance(date, str):
        date = dt.date.fromisoformat(date)
    for entry in narrative:
        if entry["date"] == date.isoformat():
            return NarrativeRecord.from_dict(entry)
    if narrative:
        span = f"{narrative[0]['date']}..{narrative[-1]['date']}"
    else:
        span = "an empty run"
    raise DateNotInRun(f"{date.isoformat()} is not a trading day of the run ({span})")


def report_path(cfg: RunConfig, report=None) -> Path:
    if report:
        return Path(report)
    s, ts = cfg.strategies[0], cfg.timespans[0]
    plain = Path(cfg.out) / f"{s}.report.json"
    suffixed = Path(cfg.out) / f"{s}_{ts}.report.json"
    # single-timespan runs drop the suffix, grids keep it
    if len(cfg.timespans) > 1 or (not plain.exists() and suffixed.exists()):
        return suffixed
    return plain


def cmd_explain(path, date, as_json=False, out=None) -> int:
    out = out or sys.stdout
    doc = json.loads(Path(path).read_text())
    rec = find_record(doc.get("narrative", []), date)
    print(rec.render(), file=out)
    if as_json:
        print(json.dumps(rec.as_dict(), indent=1), file=out)
    return EXIT_OK


def cmd_validate_data(data_dir, out=None) -> int:
    out = out or sys.stdout
    data_dir = Path(data_dir)
    if not data_dir.is_dir():
        raise UsageError(f"{data_dir} is not a directory")
    for key in ("price", "volume", "mcap", "sentiment"):
        p = data_dir / md.FILE_NAMES[key]
        if not p.exists():
            raise md.MarketDataError(f"missing {md.FILE_NAMES[key]}", path=str(p))
    raw = md.load_csv(*(data_dir / md.FILE_NAMES[k] for k in ("price", "volume", "mcap", "sentiment")))
    split_path = data_dir / md.FILE_NAMES["splits"]
    splits = md.load_splits(split_path) if split_path.exists() else []
    known = {(e.ticker, e.date) for e in splits}
    missing = md.missing_day_counts(raw)
    print("OK", file=out)
    if raw.T:
        print(f"coverage: {raw.date(0)} .. {raw.date(raw.T - 1)} ({raw.T} dates, {raw.n} tickers)", file=out)
    print("ticker,first,last,observed,missing_days", file=out)
    for j, tk in enumerate(raw.tickers):
        obs = [i for i in range(raw.T) if raw.price[i, j] == raw.price[i, j]]
        first = raw.date(obs[0]) if obs else ""
        last = raw.date(obs[-1]) if obs else ""
        print(f"{tk},{first},{last},{len(obs)},{missing[tk]}", file=out)
    n_warn = 0
    for date, tk, ratio in md.find_price_jumps(raw):
        if (tk, date) in known:
            continue
        n_warn += 1
        print(f"warning: {date} {tk}: price moved by a factor of {ratio:.2f} overnight "
              f"with no splits.csv entry (possible unadjusted split)", file=out)
    print(f"{n_warn} warning(s)", file=out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bayesviews", description=__doc__.split("\n")[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="flat JSON file with default settings")
        sp.add_argument("--data-dir", dest="data_dir")
        sp.add_argument("--strategy", help="comma list: " + ",".join(k.value for k in StrategyKind))
        sp.add_argument("--timespan", help="covariance window(s) in days, comma list")
        sp.add_argument("--delta", type=float)
        sp.add_argument("--tau", type=float)
        sp.add_argument("--model", choices=("denfis", "lstm"))
        sp.add_argument("--sentiment", choices=("on", "off"))
        sp.add_argument("--d", type=float, help="DENFIS cluster threshold")
        sp.add_argument("--start")
        sp.add_argument("--end")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out")
        sp.add_argument("--explain-date", dest="explain_date")

    b = sub.add_parser("backtest", help="run strategies and write reports")
    common(b)
    b.add_argument("--jobs", type=int, help="parallel worker processes")
    e = sub.add_parser("explain", help="print the narrative for one day of a finished run")
    common(e)
    e.add_argument("--report", help="report JSON (default: <out>/<strategy>.report.json)")
    e.add_argument("--json", action="store_true", help="also print the record as JSON")
    v = sub.add_parser("validate-data", help="check a data directory")
    v.add_argument("--data-dir", dest="data_dir")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "validate-data":
            data_dir = args.data_dir or os.environ.get(ENV_DATA_DIR)
            if not data_dir:
                raise UsageError(f"no data directory: pass --data-dir or set {ENV_DATA_DIR}")
            return cmd_validate_data(data_dir)
        cfg = build_config(args)
        if args.command == "explain":
            if not args.explain_date:
                raise UsageError("explain needs --explain-date")
            known = {k.value for k in StrategyKind}
            bad = [s for s in cfg.strategies if s not in known]
            if bad and not args.report:
                raise UsageError(f"unknown strategy {bad[0]!r}")
            return cmd_explain(report_path(cfg, args.report), args.explain_date, args.json)
        cfg.validate()
        if args.explain_date:
            dt.date.fromisoformat(args.explain_date)
        return cmd_backtest(cfg, args.explain_date)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"bayesviews: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BayesViewsError, OSError, ValueError, json.JSONDecodeError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"bayesviews: error: {msg}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
