"""Command-line front end.

Subcommands: ingest, brt, ambiguity, forecast, bench, backtest, report.
Configuration comes from an optional flat key=value file (--config) with
CLI flags taking precedence; all outputs are UTF-8 CSVs under --out and
runs are byte-for-byte reproducible for a fixed config and seed.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, fields
from datetime import date as Date
from pathlib import Path

import numpy as np

from dynevt import _kernels
from dynevt.ambiguity import ambiguity_series
from dynevt.backtest import dm_matrix, forecast_errors, validation_table
from dynevt.benchmarks import BENCHMARK_MODELS, rolling_var
from dynevt.brt import BrtTarget, realized_brt
from dynevt.errors import BrtSearchError, DataError, DynevtError
from dynevt.forecaster import pipeline_window_starts, run_pipeline
from dynevt.io import load_daily_csv, load_intraday_csv, write_rows
from dynevt.timeseries import (DatedSeries, ReturnSeries, WindowSpec,
                               compute_returns)

log = logging.getLogger(__name__)

_UNCERTAIN = "uncertain_evt"
DEFAULT_MODELS = (_UNCERTAIN,) + BENCHMARK_MODELS


@dataclass
class RunConfig:
    daily: str = ""
    intraday: str = ""
    intraday_value: str = "price"
    return_kind: str = "log"
    p: float = 0.95
    target: str = "forward"
    horizon: int = 50
    models: str = ",".join(DEFAULT_MODELS)
    seed: int = 0
    out: str = "out"
    train_len: int = 600
    evt_len: int = 100
    hist_len: int = 50
    forecast_len: int = 25
    lag: int = 21
    window: int = 600
    n_paths: int = 10000
    dist: str = "normal"
    threshold_percentile: float = 95.0

    def window_spec(self) -> WindowSpec:
        return WindowSpec(self.train_len, self.evt_len, self.hist_len,
                          self.forecast_len, self.lag)

    def brt_target(self) -> BrtTarget:
        if self.target == "nextday":
            return BrtTarget.next_day()
        if self.target == "forward":
            return BrtTarget.forward(self.horizon)
        raise DataError(f"unknown target {self.target!r} (forward|nextday)")

    def model_list(self) -> list[str]:
        models = [m.strip() for m in self.models.split(",") if m.strip()]
        if not models:
            raise DataError("empty model list")
        for m in models:
            if m not in DEFAULT_MODELS:
                raise DataError(f"unknown model {m!r}; choose from "
                                f"{', '.join(DEFAULT_MODELS)}")
        return models

    def validate(self) -> None:
        if not 0.0 < self.p < 1.0:
            raise DataError(f"confidence p must be in (0, 1), got {self.p}")
        self.window_spec()
        self.brt_target()


def _parse_config_file(path: str) -> dict:
    values = {}
    known = {f.name for f in fields(RunConfig)}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DataError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in known:
                raise DataError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = value
    return values


def build_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    file_values = _parse_config_file(args.config) if args.config else {}
    for f in fields(RunConfig):
        if f.name in file_values:
            setattr(cfg, f.name, _coerce(f.type, file_values[f.name]))
        flag = getattr(args, f.name, None)
        if flag is not None:
            setattr(cfg, f.name, flag)
    cfg.validate()
    return cfg


def _coerce(type_name: str, raw: str):
    if type_name == "int":
        return int(raw)
    if type_name == "float":
        return float(raw)
    return raw


def _fmt(x) -> str:
    return repr(float(x))


def _load_returns(cfg: RunConfig) -> ReturnSeries:
    if not cfg.daily:
        raise DataError("no daily price file configured (--daily or daily=...)")
    prices = load_daily_csv(cfg.daily)
    return compute_returns(prices, cfg.return_kind)


def _load_panel(cfg: RunConfig):
    if not cfg.intraday:
        raise DataError("no intraday file configured (--intraday or "
                        "intraday=...); ambiguity estimation requires "
                        "intraday returns")
    return load_intraday_csv(cfg.intraday, cfg.intraday_value,
                             cfg.return_kind)


def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _var_csv_path(out: Path, model: str) -> Path:
    return out / f"var_{model}.csv"


def _write_var_series(path: Path, series: DatedSeries) -> None:
    write_rows(path, ["date", "var_loss", "var_return"],
               ((d.isoformat(), _fmt(v), _fmt(-v))
                for d, v in zip(series.dates, series.values)))


def _load_var_csv(path: Path) -> DatedSeries:
    import csv

    dates, vals = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "date" not in reader.fieldnames \
                or "var_loss" not in reader.fieldnames:
            raise DataError(f"{path}: expected columns date,var_loss[,...]")
        for row in reader:
            dates.append(Date.fromisoformat(row["date"]))
            vals.append(float(row["var_loss"]))
    return DatedSeries(tuple(dates), np.array(vals))


def cmd_ingest(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    returns = _load_returns(cfg)
    write_rows(out / "returns.csv", ["date", "return"],
               ((d.isoformat(), _fmt(v))
                for d, v in zip(returns.dates, returns.values)))
    print(f"daily: {len(returns)} returns "
          f"[{returns.dates[0]} .. {returns.dates[-1]}] -> {out / 'returns.csv'}")
    if cfg.intraday:
        panel = _load_panel(cfg)
        write_rows(out / "intraday_days.csv", ["date", "n_returns"],
                   ((d.isoformat(), len(r)) for d, r in panel.days))
        print(f"intraday: {len(panel)} days -> {out / 'intraday_days.csv'}")
    return 0


def cmd_brt(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    returns = _load_returns(cfg)
    spec = cfg.window_spec()
    target = cfg.brt_target()
    starts = pipeline_window_starts(len(returns), spec)
    if not starts:
        if len(returns) >= spec.train_len:
            starts = [0]
        else:
            raise DataError(f"need at least {spec.train_len} returns, "
                            f"have {len(returns)}")
    points: dict[int, object] = {}
    gaps = 0
    for T in starts:
        for t in range(T + spec.evt_len, T + spec.train_len - spec.hist_len):
            if t in points:
                continue
            try:
                points[t] = realized_brt(returns, t, spec.evt_len, target,
                                         cfg.p)
            except BrtSearchError as exc:
                log.warning("BRT gap at %s: %s", returns.dates[t], exc)
                points[t] = None
                gaps += 1
    rows = [(returns.dates[t].isoformat(), _fmt(pt.brt),
             _fmt(pt.objective_gap))
            for t, pt in sorted(points.items()) if pt is not None]
    write_rows(out / "brt.csv", ["date", "brt", "objective_gap"], rows)
    vals = np.array([float(r[1]) for r in rows])
    print(f"brt: {len(rows)} rows ({gaps} gaps) -> {out / 'brt.csv'}")
    if len(vals):
        print(f"  median {np.median(vals):.6f}  min {vals.min():.6f}  "
              f"max {vals.max():.6f}")
    return 0


def cmd_ambiguity(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    panel = _load_panel(cfg)
    series = ambiguity_series(panel)
    write_rows(out / "ambiguity.csv", ["month", "mho2", "days_used"],
               ((f"{y:04d}-{m:02d}", _fmt(v.mho2), v.days_used)
                for (y, m), v in ((val.month, val) for val in series.values)))
    print(f"ambiguity: {len(series)} months -> {out / 'ambiguity.csv'}")
    return 0


def cmd_forecast(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    returns = _load_returns(cfg)
    panel = _load_panel(cfg)
    forecasts = run_pipeline(returns, panel, cfg.window_spec(),
                             cfg.brt_target(), cfg.p)
    if not forecasts:
        raise DataError("pipeline produced no forecasts (all windows failed)")
    write_rows(out / "forecast_uncertain_evt.csv",
               ["date", "brt_hat", "xi", "sigma", "n_u", "var_loss",
                "var_return", "flags"],
               ((fc.date.isoformat(), _fmt(fc.brt_hat), _fmt(fc.gpd.params.xi),
                 _fmt(fc.gpd.params.sigma), fc.gpd.n_u, _fmt(fc.var_loss),
                 _fmt(fc.var_return), "|".join(fc.flags))
                for fc in forecasts))
    _write_var_series(_var_csv_path(out, _UNCERTAIN),
                      DatedSeries(tuple(fc.date for fc in forecasts),
                                  np.array([fc.var_loss for fc in forecasts])))
    flagged = sum(1 for fc in forecasts if fc.flags)
    print(f"forecast: {len(forecasts)} rows ({flagged} flagged) -> "
          f"{out / 'forecast_uncertain_evt.csv'} "
          f"[kernel backend: {_kernels.BACKEND}]")
    return 0


def cmd_bench(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    returns = _load_returns(cfg)
    for model in cfg.model_list():
        if model == _UNCERTAIN:
            continue    # produced by the forecast command
        series = rolling_var(returns, model, cfg.window, cfg.p,
                             cfg.forecast_len, cfg.seed, cfg.dist,
                             cfg.n_paths, cfg.threshold_percentile)
        _write_var_series(_var_csv_path(out, model), series)
        print(f"bench: {model}: {len(series)} rows -> "
              f"{_var_csv_path(out, model)}")
    return 0


def _collect_models(cfg: RunConfig, out: Path) -> dict[str, DatedSeries]:
    requested = cfg.model_list()
    missing = [m for m in requested
               if not _var_csv_path(out, m).exists()]
    if missing:
        raise DataError(
            f"missing VaR output for: {', '.join(missing)} "
            f"(run the forecast/bench commands first)")
    return {m: _load_var_csv(_var_csv_path(out, m)) for m in requested}


def cmd_backtest(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    returns = _load_returns(cfg)
    models = _collect_models(cfg, out)
    table = validation_table(models, returns, cfg.p)
    write_rows(out / "validation.csv",
               ["model", "T", "violations", "violation_rate", "lr_uc", "p_uc",
                "reject_uc", "lr_cc", "p_cc", "reject_cc"],
               ((r["model"], r["T"], r["violations"], _fmt(r["violation_rate"]),
                 _fmt(r["lr_uc"]), _fmt(r["p_uc"]), int(r["reject_uc"]),
                 _fmt(r["lr_cc"]), _fmt(r["p_cc"]), int(r["reject_cc"]))
                for r in table))
    errors = {name: forecast_errors(series, returns, BrtTarget.next_day())
              for name, series in models.items()}
    names, stats, pvals = dm_matrix(errors)
    write_rows(out / "dm_statistic.csv", ["model"] + names,
               ((names[i],) + tuple(_fmt(stats[i, j]) for j in range(len(names)))
                for i in range(len(names))))
    write_rows(out / "dm_pvalue.csv", ["model"] + names,
               ((names[i],) + tuple(_fmt(pvals[i, j]) for j in range(len(names)))
                for i in range(len(names))))
    for r in table:
        print(f"backtest: {r['model']:>14s}  x/T={r['violations']}/{r['T']}"
              f"  LRuc={r['lr_uc']:.3f} (p={r['p_uc']:.3f})"
              f"  LRcc={r['lr_cc']:.3f} (p={r['p_cc']:.3f})")
    print(f"backtest: tables -> {out / 'validation.csv'}, "
          f"{out / 'dm_statistic.csv'}, {out / 'dm_pvalue.csv'}")
    return 0


def cmd_report(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    returns = _load_returns(cfg)
    models = _collect_models(cfg, out)
    table = validation_table(models, returns, cfg.p)
    errors = {name: forecast_errors(series, returns, BrtTarget.next_day())
              for name, series in models.items()}
    names, stats, _ = dm_matrix(errors)
    lines = [f"VaR backtest report (p={cfg.p}, seed={cfg.seed}, "
             f"backend={_kernels.BACKEND})", ""]
    lines.append(f"{'model':>14s} {'x/T':>10s} {'rate':>8s} {'LRuc':>8s} "
                 f"{'p':>7s} {'LRcc':>8s} {'p':>7s} verdict")
    for r in table:
        verdict = "rejected" if (r["reject_uc"] or r["reject_cc"]) else "ok"
        lines.append(f"{r['model']:>14s} {r['violations']:>4d}/{r['T']:<5d} "
                     f"{r['violation_rate']:>8.4f} {r['lr_uc']:>8.3f} "
                     f"{r['p_uc']:>7.4f} {r['lr_cc']:>8.3f} {r['p_cc']:>7.4f} "
                     f"{verdict}")
    lines.append("")
    lines.append("Diebold-Mariano statistics (row model vs column model; "
                 "negative favors the row):")
    header = " ".join(f"{n[:10]:>11s}" for n in names)
    lines.append(f"{'':>14s} {header}")
    for i, n in enumerate(names):
        cells = " ".join(f"{stats[i, j]:>11.3f}" for j in range(len(names)))
        lines.append(f"{n:>14s} {cells}")
    text = "\n".join(lines) + "\n"
    (out / "report.txt").write_text(text, encoding="utf-8")
    print(text, end="")
    print(f"report -> {out / 'report.txt'}")
    return 0


_COMMANDS = {
    "ingest": cmd_ingest,
    "brt": cmd_brt,
    "ambiguity": cmd_ambiguity,
    "forecast": cmd_forecast,
    "bench": cmd_bench,
    "backtest": cmd_backtest,
    "report": cmd_report,
}


def _add_common_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="flat key=value config file")
    sub.add_argument("--daily", help="daily CSV (date,close)")
    sub.add_argument("--intraday", help="intraday CSV (date,time,price|return)")
    sub.add_argument("--intraday-value", dest="intraday_value",
                     choices=["price", "return"])
    sub.add_argument("--return-kind", dest="return_kind",
                     choices=["log", "simple"])
    sub.add_argument("--p", type=float, help="VaR confidence level")
    sub.add_argument("--target", choices=["forward", "nextday"])
    sub.add_argument("--horizon", type=int, help="forward target horizon")
    sub.add_argument("--models", help="comma-separated model list")
    sub.add_argument("--seed", type=int)
    sub.add_argument("--out", help="output directory")
    sub.add_argument("--window", type=int, help="benchmark rolling window")
    sub.add_argument("--n-paths", dest="n_paths", type=int)
    sub.add_argument("--dist", choices=["normal", "t"])
    sub.add_argument("--train-len", dest="train_len", type=int)
    sub.add_argument("--evt-len", dest="evt_len", type=int)
    sub.add_argument("--hist-len", dest="hist_len", type=int)
    sub.add_argument("--forecast-len", dest="forecast_len", type=int)
    sub.add_argument("--lag", type=int)
    sub.add_argument("--threshold-percentile", dest="threshold_percentile",
                     type=float)


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = argparse.ArgumentParser(
        prog="dynevt",
        description="EVT VaR with a dynamic break-even tail threshold")
    subs = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        _add_common_flags(subs.add_parser(name))
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
        return _COMMANDS[args.command](cfg)
    except DynevtError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc),
                          "stage": args.command}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
