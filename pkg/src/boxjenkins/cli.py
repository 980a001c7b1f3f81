"""Command-line front end.

Each subcommand reads a CSV series (``date,value``, monthly ``YYYY-MM``
dates), runs one stage of the modelling loop and writes JSON/CSV files into
the output directory::

    boxjenkins identify --input hiv.csv --holdout 24 --out run/
    boxjenkins fit      --input hiv.csv --holdout 24 --out run/
    boxjenkins evaluate --input hiv.csv --holdout 24 --out run/
    boxjenkins forecast --input hiv.csv --horizon 12 --out run/
    boxjenkins pipeline --config run.cfg
    boxjenkins simulate --order 0,1,1,1,0,0,12 --ma -0.55 --sar 0.4 --n 132 --out sim/

Settings may also come from a ``key = value`` file given with ``--config``;
flags on the command line override it. Errors print a single
``error: <Kind>: <message>`` line on stderr and exit non-zero.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import reporting
from .core import TimeSeries, format_month, from_csv, parse_month, split
from .correlogram import DEFAULT_NONSEASONAL, DEFAULT_SEASONAL, candidate_grid, correlogram
from .errors import BoxJenkinsError, ConfigError, StateError, ZeroVarianceError
from .pipeline import diagnose, evaluate_holdout, forecast_original_scale, select
from .sarima import FitOptions, SarimaOrder, fit, from_params, simulate
from .stattests import adf_test
from .transform import apply, boxcox, estimate_lambda

log = logging.getLogger("boxjenkins")

STATE_FILE = "model_state.json"


@dataclass
class RunConfig:
    input: str | None = None
    date_column: str = "date"
    value_column: str = "value"
    period: int = 12
    lmbda: str = "auto"
    d: int = 1
    D: int = 0
    grid: str = "default"
    holdout: int = 24
    horizon: int = 12
    conf: float = 0.95
    alpha: float = 0.05
    lags: int = 20
    max_lag: int | None = None
    refit: bool = True
    out: str = "."
    seed: int = 0
    jobs: int = 1
    # simulate
    order: str = "0,1,1,1,0,0,12"
    ar: str = ""
    ma: str = ""
    sar: str = ""
    sma: str = ""
    sigma2: float = 1.0
    n: int = 132
    burn_in: int | None = None
    start: str = "2009-01"
    offset: float = 0.0

    def validate(self) -> "RunConfig":
        if not 0.0 < self.conf < 1.0:
            raise ConfigError(f"conf must lie in (0, 1), got {self.conf}")
        if self.horizon < 1:
            raise ConfigError(f"horizon must be >= 1, got {self.horizon}")
        if self.holdout < 0:
            raise ConfigError(f"holdout must be >= 0, got {self.holdout}")
        if self.period < 1:
            raise ConfigError(f"period must be >= 1, got {self.period}")
        if self.d < 0 or self.D < 0:
            raise ConfigError("differencing orders must be non-negative")
        return self

    @property
    def outdir(self) -> Path:
        path = Path(self.out)
        path.mkdir(parents=True, exist_ok=True)
        return path


_ALIASES = {"lambda": "lmbda"}
_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key: str, raw):
    if raw is None:
        return None
    kind = _TYPES[key]
    text = str(raw).strip()
    try:
        if "bool" in kind:
            if isinstance(raw, bool):
                return raw
            if text.lower() in ("1", "true", "yes", "on"):
                return True
            if text.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if "int" in kind:
            return None if text.lower() == "none" else int(text)
        if "float" in kind:
            return float(text)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None
    return text


def read_config_file(path: str | Path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    for no, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{no}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = _ALIASES.get(key, key.replace("-", "_"))
        if key not in _TYPES:
            raise ConfigError(f"{path}:{no}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    return out


def build_config(args: argparse.Namespace) -> RunConfig:
    values = {}
    if getattr(args, "config", None):
        values.update(read_config_file(args.config))
    for key in _TYPES:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = _coerce(key, v)
    return RunConfig(**values).validate()


def parse_grid(spec: str, d: int, D: int, period: int) -> list[SarimaOrder]:
    """``default`` (the ten-model grid) or ``"p,q;p,q|P,Q;P,Q"``."""
    if spec.strip().lower() == "default":
        return candidate_grid(DEFAULT_NONSEASONAL, DEFAULT_SEASONAL, d, D, period)
    try:
        left, right = spec.split("|") if "|" in spec else (spec, "0,0")
        pairs = [tuple(int(v) for v in item.split(",")) for item in left.split(";") if item.strip()]
        seas = [tuple(int(v) for v in item.split(",")) for item in right.split(";") if item.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse grid {spec!r}; expected 'p,q;p,q|P,Q;P,Q'") from None
    return candidate_grid(pairs, seas, d, D, period)


def parse_lambda(text: str) -> str | float | None:
    t = str(text).strip().lower()
    if t in ("auto", "none"):
        return t
    try:
        return float(t)
    except ValueError:
        raise ConfigError(f"--lambda must be auto, none or a number, got {text!r}") from None


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"bad coefficient list {text!r}") from None


def parse_order(text: str) -> SarimaOrder:
    try:
        vals = [int(v) for v in text.split(",")]
    except ValueError:
        raise ConfigError(f"bad order {text!r}") from None
    if len(vals) == 3:
        return SarimaOrder(*vals)
    if len(vals) == 7:
        return SarimaOrder(*vals)
    raise ConfigError("order must be 'p,d,q' or 'p,d,q,P,D,Q,s'")


# --- stage helpers -----------------------------------------------------------------


@dataclass
class Prepared:
    series: TimeSeries
    train: TimeSeries
    holdout: TimeSeries | None
    lmbda: float | None
    modeled_train: TimeSeries


def load_series(cfg: RunConfig) -> TimeSeries:
    if not cfg.input:
        raise ConfigError("no input file given (--input)")
    try:
        with open(cfg.input, encoding="utf-8", newline="") as fh:
            return from_csv(fh, cfg.date_column, cfg.value_column, cfg.period)
    except OSError as exc:
        raise ConfigError(f"cannot read {cfg.input}: {exc.strerror}") from None


def prepare(cfg: RunConfig) -> Prepared:
    series = load_series(cfg)
    if cfg.holdout >= len(series):
        raise ConfigError(f"holdout {cfg.holdout} leaves no training data (n={len(series)})")
    parts = split(series, len(series) - cfg.holdout)
    mode = parse_lambda(cfg.lmbda)
    if mode == "auto":
        lmbda = round(estimate_lambda(parts.train), 3)
    elif mode == "none":
        lmbda = None
    else:
        lmbda = float(mode)
    modeled = parts.train if lmbda is None else boxcox(parts.train, lmbda)
    return Prepared(series, parts.train, parts.holdout, lmbda, modeled)


def cmd_identify(cfg: RunConfig) -> dict:
    prep = prepare(cfg)
    diffed, record = apply(prep.train, prep.lmbda, cfg.d, cfg.D, cfg.period)
    if np.ptp(diffed.values) == 0:
        raise ZeroVarianceError("differenced series is constant")
    max_lag = cfg.max_lag or min(3 * cfg.period, len(diffed) - 1)
    cg = correlogram(diffed, max_lag)
    adf = adf_test(diffed)
    out = cfg.outdir
    header = ("lag", "value", "lower_band", "upper_band")
    reporting.write_csv(out / "acf.csv", header, cg.rows("acf"))
    reporting.write_csv(out / "pacf.csv", header, cg.rows("pacf"))
    report = {
        "lambda": prep.lmbda,
        "d": cfg.d,
        "D": cfg.D,
        "period": cfg.period,
        "n_train": len(prep.train),
        "n_differenced": len(diffed),
        "adf": adf.to_dict(),
        "adf_p_text": adf.p_text,
        "adf_conclusion": adf.conclusion(cfg.alpha),
        "acf_exceedances": cg.exceedances("acf"),
        "pacf_exceedances": cg.exceedances("pacf"),
    }
    reporting.write_json(out / "stationarity.json", report)
    return report


def _state_dict(cfg, prep, f) -> dict:
    return {
        "order": f.order.to_dict(),
        "params": [float(v) for v in f.params],
        "sigma2": f.sigma2,
        "lambda": prep.lmbda,
        "n_train": len(prep.train),
        "start": format_month(prep.series.start),
        "input": str(cfg.input),
    }


def cmd_fit(cfg: RunConfig) -> dict:
    prep = prepare(cfg)
    candidates = parse_grid(cfg.grid, cfg.d, cfg.D, cfg.period)
    report = select(prep.modeled_train, candidates, cfg.alpha, FitOptions(), jobs=cfg.jobs)
    chosen = report.chosen_fit
    diag = diagnose(chosen, cfg.lags, cfg.alpha)
    out = cfg.outdir
    reporting.write_json(out / "selection.json", report)
    model = chosen.to_dict()
    model["lambda"] = prep.lmbda
    model["flagged_no_significant_model"] = report.flagged
    reporting.write_json(out / "model.json", model)
    reporting.write_json(out / "diagnostics.json", diag)
    header = ("lag", "value", "lower_band", "upper_band")
    reporting.write_csv(out / "residual_acf.csv", header, diag.correlogram.rows("acf"))
    reporting.write_csv(out / "residual_pacf.csv", header, diag.correlogram.rows("pacf"))
    reporting.write_csv(
        out / "residuals.csv",
        ("date", "fitted", "residual"),
        [(d, fv, r) for (d, r), (fv, _) in zip(diag.residual_vs_time, diag.residual_vs_fitted)],
    )
    reporting.write_json(out / STATE_FILE, _state_dict(cfg, prep, chosen), digits=None)
    return {"selection": report, "model": model}


def load_state(cfg: RunConfig) -> dict:
    import json

    path = Path(cfg.out) / STATE_FILE
    if not path.exists():
        raise StateError(f"{path} not found; run the fit stage first")
    return json.loads(path.read_text(encoding="utf-8"))


def _frozen_fit(state: dict, modeled: TimeSeries):
    order = SarimaOrder(**state["order"])
    return from_params(modeled, order, state["params"], state["sigma2"])


def cmd_evaluate(cfg: RunConfig) -> dict:
    if cfg.holdout <= 0:
        raise ConfigError("evaluate needs a holdout of at least one observation")
    prep = prepare(cfg)
    state = load_state(cfg)
    lmbda = state["lambda"]
    modeled = prep.train if lmbda is None else boxcox(prep.train, lmbda)
    f = _frozen_fit(state, modeled)
    _, record = apply(prep.train, lmbda, f.order.d, f.order.D, f.order.s)
    rep = evaluate_holdout(f, record, prep.train, prep.holdout, cfg.alpha)
    out = cfg.outdir
    reporting.write_json(out / "holdout.json", rep)
    reporting.write_csv(
        out / "holdout_errors.csv",
        ("date", "actual", "forecast", "error"),
        zip(rep.dates, rep.actual, rep.forecast, rep.errors),
    )
    if rep.correlogram is not None:
        header = ("lag", "value", "lower_band", "upper_band")
        reporting.write_csv(out / "holdout_error_acf.csv", header, rep.correlogram.rows("acf"))
        reporting.write_csv(out / "holdout_error_pacf.csv", header, rep.correlogram.rows("pacf"))
    return rep.to_dict()


def cmd_forecast(cfg: RunConfig) -> dict:
    series = load_series(cfg)
    state = load_state(cfg)
    lmbda = state["lambda"]
    order = SarimaOrder(**state["order"])
    modeled = series if lmbda is None else boxcox(series, lmbda)
    if cfg.refit:
        f = fit(modeled, order, FitOptions(start_params=tuple(state["params"])))
    else:
        f = _frozen_fit(state, modeled)
    _, record = apply(series, lmbda, order.d, order.D, order.s)
    fc = forecast_original_scale(f, record, cfg.horizon, cfg.conf)
    out = cfg.outdir
    reporting.write_csv(out / "forecast.csv", ("month", "point", "lower", "upper"), fc.rows())
    summary = fc.to_dict()
    summary["model"] = str(order)
    summary["refit"] = cfg.refit
    summary["coefficients"] = f.coefficients()
    reporting.write_json(out / "forecast.json", summary)
    return summary


def cmd_simulate(cfg: RunConfig) -> dict:
    order = parse_order(cfg.order)
    ar, ma, sar, sma = (_floats(v) for v in (cfg.ar, cfg.ma, cfg.sar, cfg.sma))
    for name, vals, want in (("ar", ar, order.p), ("ma", ma, order.q), ("sar", sar, order.P), ("sma", sma, order.Q)):
        if len(vals) != want:
            raise ConfigError(f"--{name} needs {want} value(s) for {order}, got {len(vals)}")
    params = np.array(ar + ma + sar + sma)
    ts = simulate(order, params, cfg.sigma2, cfg.n, cfg.seed, cfg.burn_in, parse_month(cfg.start))
    if cfg.offset:
        ts = ts.with_values(ts.values + cfg.offset)
    path = cfg.outdir / "simulated.csv"
    path.write_text(ts.to_csv(), encoding="utf-8")
    return {"path": str(path), "n": len(ts)}


def cmd_pipeline(cfg: RunConfig) -> dict:
    summary = {"identify": cmd_identify(cfg)}
    fitted = cmd_fit(cfg)
    summary["chosen_model"] = fitted["model"]["model"]
    if cfg.holdout > 0:
        summary["holdout"] = {k: v for k, v in cmd_evaluate(cfg).items() if k != "steps"}
    summary["forecast"] = cmd_forecast(cfg)
    reporting.write_json(cfg.outdir / "pipeline.json", summary)
    return summary


COMMANDS = {
    "identify": cmd_identify,
    "fit": cmd_fit,
    "evaluate": cmd_evaluate,
    "forecast": cmd_forecast,
    "simulate": cmd_simulate,
    "pipeline": cmd_pipeline,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="boxjenkins", description="Seasonal ARIMA modelling toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value settings file")
    common.add_argument("--input", help="CSV with date,value columns")
    common.add_argument("--date-column", dest="date_column")
    common.add_argument("--value-column", dest="value_column")
    common.add_argument("--period", type=int)
    common.add_argument("--lambda", dest="lmbda", help="auto, none, or a fixed Box-Cox parameter")
    common.add_argument("-d", type=int, dest="d", help="ordinary differencing order")
    common.add_argument("-D", type=int, dest="D", help="seasonal differencing order")
    common.add_argument("--grid", help="'default' or 'p,q;p,q|P,Q;P,Q'")
    common.add_argument("--holdout", type=int, help="trailing observations held out")
    common.add_argument("--horizon", type=int)
    common.add_argument("--conf", type=float)
    common.add_argument("--alpha", type=float)
    common.add_argument("--lags", type=int, help="Ljung-Box lags for diagnostics")
    common.add_argument("--max-lag", type=int, dest="max_lag")
    common.add_argument("--refit", dest="refit", action="store_const", const=True)
    common.add_argument("--no-refit", dest="refit", action="store_const", const=False)
    common.add_argument("--seed", type=int)
    common.add_argument("--jobs", type=int)
    common.add_argument("--out", help="output directory")
    common.add_argument("-v", "--verbose", action="store_true")

    for name in ("identify", "fit", "evaluate", "forecast", "pipeline"):
        sub.add_parser(name, parents=[common], help=COMMANDS[name].__name__.replace("cmd_", ""))

    sim = sub.add_parser("simulate", parents=[common], help="draw a seeded SARIMA series")
    sim.add_argument("--order", help="p,d,q or p,d,q,P,D,Q,s")
    for name in ("ar", "ma", "sar", "sma"):
        sim.add_argument(f"--{name}", help="comma-separated coefficients")
    sim.add_argument("--sigma2", type=float)
    sim.add_argument("--n", type=int)
    sim.add_argument("--burn-in", type=int, dest="burn_in")
    sim.add_argument("--start", help="YYYY-MM of the first value")
    sim.add_argument("--offset", type=float, help="constant added to every value")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.ERROR,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        cfg = build_config(args)
        COMMANDS[args.command](cfg)
    except BoxJenkinsError as exc:
        print(f"error: {exc.kind}: {' '.join(str(exc).split())}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: IOError: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
