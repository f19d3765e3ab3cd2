"""``duo-standby`` command line front end.

    duo-standby <command> --config run.toml [--out PATH] [--format csv|json]

Commands: lst, moments, survival, quantile, simulate, compare.  The config is
a small TOML file::

    [model]
    work1 = "exp(1.0)"
    work2 = "exp(1.0)"
    repair1 = "exp(1.0)"
    repair2 = "exp(1.0)"
    first_server = 1

    [command]
    name = "compare"
    n = 100000
    seed = 12345

Model keys may also be given as flags (``--work1 "exp(1)"`` ...), and every
command parameter has a flag that overrides the file.

Exit status: 0 success or PASS, 1 compare FAIL, 2 usage/config error,
3 model or numeric error (a JSON error record is written to stderr).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field, fields, replace
from typing import Any, Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import inversion, simulator, transform
from .distributions import parse_distribution
from .errors import ConfigError, InversionUnstableError, StandbyError
from .transform import SystemModel

COMMANDS = ("lst", "moments", "survival", "quantile", "simulate", "compare")
MODEL_KEYS = ("work1", "work2", "repair1", "repair2", "first_server")
PARAM_KEYS = ("s", "K", "orders", "moment_method", "t_max", "points", "p", "n", "seed",
              "max_cycles", "sigma", "workers")
DEFAULT_S_GRID = (0.1, 0.2, 0.5, 1.0, 2.0, 5.0)
DEFAULT_POINTS = 64
SURVIVAL_FLOOR = 2e-3

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_MODEL = 0, 1, 2, 3


@dataclass(frozen=True)
class RunConfig:
    model: SystemModel
    command: str
    s: tuple[float, ...] = DEFAULT_S_GRID
    K: int = 10
    orders: tuple[int, ...] = (1, 2)
    moment_method: str = "richardson"
    t_max: Optional[float] = None
    points: int = DEFAULT_POINTS
    p: tuple[float, ...] = (0.1, 0.5, 0.9)
    n: int = 100_000
    seed: int = 12345
    max_cycles: int = simulator.DEFAULT_MAX_CYCLES
    sigma: float = 4.0
    workers: int = 1
    format: str = "csv"


# -- config parsing ---------------------------------------------------------


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _is_real(v):
    return (isinstance(v, (int, float)) and not isinstance(v, bool)) and math.isfinite(v)


def _as_list(key, v):
    return list(v) if isinstance(v, (list, tuple)) else [v]


def _validate_param(key, value):
    """Coerce and range-check one command parameter; raise ConfigError naming it."""
    def bad(msg):
        return ConfigError(f"{key}: {msg}, got {value!r}")

    if key in ("s", "p"):
        vals = _as_list(key, value)
        if not vals or not all(_is_real(v) for v in vals):
            raise bad("expected a number or a non-empty list of numbers")
        vals = tuple(float(v) for v in vals)
        if key == "s" and any(v < 0 for v in vals):
            raise bad("transform arguments must be >= 0")
        if key == "p" and any(not 0 < v < 1 for v in vals):
            raise bad("probabilities must lie in (0, 1)")
        return vals
    if key == "orders":
        vals = _as_list(key, value)
        if not vals or not all(_is_int(v) and 1 <= v <= 4 for v in vals):
            raise bad("moment orders must be integers in 1..4")
        return tuple(vals)
    if key == "moment_method":
        if value not in ("richardson", "series"):
            raise bad("expected 'richardson' or 'series'")
        return value
    if key in ("t_max", "sigma"):
        if not _is_real(value) or value <= 0:
            raise bad("expected a positive number")
        return float(value)
    limits = {"K": 1, "points": 2, "n": 2, "seed": 0, "max_cycles": 1, "workers": 1}
    if key in limits:
        if not _is_int(value) or value < limits[key]:
            raise bad(f"expected an integer >= {limits[key]}")
        return value
    raise ConfigError(f"unknown command parameter {key!r}")


def _parse_model(values: dict, where: str) -> SystemModel:
    missing = [k for k in MODEL_KEYS[:4] if k not in values]
    if missing:
        raise ConfigError(f"{where}: missing required key(s) {', '.join(missing)}")
    dists = {}
    for key in MODEL_KEYS[:4]:
        text = values[key]
        if not isinstance(text, str):
            raise ConfigError(f"{key}: expected a distribution literal string, got {text!r}")
        try:
            dists[key] = parse_distribution(text)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{key}: {exc}") from None
    first = values.get("first_server", 1)
    if first not in (1, 2) or isinstance(first, bool):
        raise ConfigError(f"first_server: expected 1 or 2, got {first!r}")
    return SystemModel(first_server=first, **dists)


def load_config_file(path: str) -> dict:
    """Read a TOML config into a plain dict; syntax errors carry line/column."""
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def parse_config(source: Optional[dict] = None, *, command: Optional[str] = None,
                 overrides: Optional[dict] = None, source_name: str = "config") -> RunConfig:
    """Build a validated RunConfig from a parsed config mapping plus flag overrides.

    Unknown keys are errors.  ``overrides`` may contain model keys and command
    parameters (flag values win over the file).
    """
    raw = dict(source or {})
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}

    model_values: dict[str, Any] = {}
    params: dict[str, Any] = {}
    file_command = None
    fmt = raw.pop("format", None)

    if "model" in raw:
        table = raw.pop("model")
        if not isinstance(table, dict):
            raise ConfigError(f"{source_name}: 'model' must be a table")
        for key, value in table.items():
            if key not in MODEL_KEYS:
                raise ConfigError(f"{source_name}: unknown key {key!r} in [model]")
            model_values[key] = value
    if "command" in raw:
        cmd = raw.pop("command")
        if isinstance(cmd, str):
            file_command = cmd
        elif isinstance(cmd, dict):
            for key, value in cmd.items():
                if key == "name":
                    file_command = value
                elif key in PARAM_KEYS:
                    params[key] = value
                else:
                    raise ConfigError(f"{source_name}: unknown key {key!r} in [command]")
        else:
            raise ConfigError(f"{source_name}: 'command' must be a string or a table")
    for key, value in raw.items():
        if key in MODEL_KEYS:
            if key in model_values:
                raise ConfigError(f"{source_name}: {key!r} given both at top level and in [model]")
            model_values[key] = value
        else:
            raise ConfigError(f"{source_name}: unknown key {key!r}")

    for key, value in overrides.items():
        if key in MODEL_KEYS:
            model_values[key] = value
        elif key in PARAM_KEYS:
            params[key] = value
        elif key == "format":
            fmt = value
        else:
            raise ConfigError(f"unknown option {key!r}")

    if command is not None and file_command is not None and command != file_command:
        raise ConfigError(f"command {command!r} conflicts with {file_command!r} in {source_name}")
    name = command or file_command
    if name is None:
        raise ConfigError("no command given (positional argument or 'command' in the config)")
    if name not in COMMANDS:
        raise ConfigError(f"command: unknown command {name!r} (expected one of {', '.join(COMMANDS)})")

    fmt = fmt or "csv"
    if fmt not in ("csv", "json"):
        raise ConfigError(f"format: expected 'csv' or 'json', got {fmt!r}")

    model = _parse_model(model_values, source_name)
    checked = {key: _validate_param(key, value) for key, value in params.items()}
    return RunConfig(model=model, command=name, format=fmt, **checked)


# -- reports ----------------------------------------------------------------


def _fmt_cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


@dataclass
class Report:
    command: str
    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_fmt_cell(v) for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "command": self.command,
            "columns": list(self.columns),
            "rows": [list(r) for r in self.rows],
            "meta": self.meta,
        }
        return json.dumps(doc, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Report":
        doc = json.loads(text)
        return cls(doc["command"], tuple(doc["columns"]), [tuple(r) for r in doc["rows"]], doc["meta"])

    def render(self, fmt: str) -> str:
        return self.to_json() if fmt == "json" else self.to_csv()


def _model_meta(model: SystemModel) -> dict:
    return {
        "work1": str(model.work1),
        "work2": str(model.work2),
        "repair1": str(model.repair1),
        "repair2": str(model.repair2),
        "first_server": model.first_server,
    }


def _default_t_max(cfg: RunConfig) -> float:
    return cfg.t_max if cfg.t_max is not None else 5.0 * transform.moment(cfg.model, 1)


def _z(diff, se):
    if se > 0:
        return diff / se
    return 0.0 if diff == 0 else math.copysign(math.inf, diff)


def _run_lst(cfg):
    rows = []
    for s in cfg.s:
        closed = transform.system_lst_closed(cfg.model, s).value
        fp = transform.system_lst_fixed_point(cfg.model, s).system_lst
        ss = transform.system_lst_scenario_sum(cfg.model, s, cfg.K).value
        dev = max(abs(closed - fp), abs(closed - ss), abs(fp - ss))
        rows.append((s, closed, fp, ss, cfg.K, dev))
    cols = ("s", "lst_closed", "lst_fixed_point", "lst_scenario_sum", "scenario_K", "max_abs_dev")
    return Report("lst", cols, rows), EXIT_OK


def _run_moments(cfg):
    rows = [(n, transform.moment(cfg.model, n, method=cfg.moment_method)) for n in cfg.orders]
    return Report("moments", ("n", "moment"), rows, {"method": cfg.moment_method}), EXIT_OK


def _run_survival(cfg):
    curve = inversion.survival_curve(cfg.model, _default_t_max(cfg), cfg.points)
    rows = [(p.t, p.survival, p.abs_error_estimate) for p in curve.points]
    return Report("survival", ("t", "survival", "abs_error"), rows, {"method": curve.method}), EXIT_OK


def _run_quantile(cfg):
    rows = [(p, inversion.quantile(cfg.model, p)) for p in cfg.p]
    return Report("quantile", ("p", "t"), rows), EXIT_OK


def _run_simulate(cfg):
    summ = simulator.estimate_mean(cfg.model, cfg.n, cfg.seed, cfg.max_cycles, workers=cfg.workers)
    cols = ("n", "seed", "max_cycles", "mean", "variance", "std_error", "ci95_lo", "ci95_hi",
            "censored_count", "label")
    row = (summ.n, summ.seed, summ.max_cycles, summ.mean, summ.variance, summ.std_error,
           summ.ci95[0], summ.ci95[1], summ.censored_count, summ.label)
    return Report("simulate", cols, [row]), EXIT_OK


def _run_compare(cfg):
    model = cfg.model
    sample = simulator.simulate_lifetimes(model, cfg.n, cfg.seed, cfg.max_cycles, workers=cfg.workers)
    rows = []

    def verdict_sigma(diff, se):
        return "PASS" if abs(diff) <= cfg.sigma * se else "FAIL"

    mttf = transform.moment(model, 1)
    summ = sample.summary()
    diff = summ.mean - mttf
    rows.append(("mean", None, mttf, summ.mean, summ.std_error, _z(diff, summ.std_error),
                 verdict_sigma(diff, summ.std_error)))

    for s in cfg.s:
        if s <= 0:
            continue
        analytic = transform.system_lst_closed(model, s).value
        est = sample.lst(s)
        diff = est.estimate - analytic
        rows.append(("lst", s, analytic, est.estimate, est.std_error, _z(diff, est.std_error),
                     verdict_sigma(diff, est.std_error)))

    t_max = cfg.t_max if cfg.t_max is not None else 5.0 * mttf
    ts = [i * t_max / cfg.points for i in range(1, cfg.points + 1)]
    for t, est in zip(ts, sample.survival(ts)):
        try:
            analytic = inversion.survival(model, t).survival
        except InversionUnstableError:
            rows.append(("survival", t, None, est.fraction, est.std_error, None, "SKIP"))
            continue
        diff = est.fraction - analytic
        if est.horizon_exceeded:
            verdict = "SKIP"
        else:
            verdict = "PASS" if abs(diff) <= max(cfg.sigma * est.std_error, SURVIVAL_FLOOR) else "FAIL"
        rows.append(("survival", t, analytic, est.fraction, est.std_error, _z(diff, est.std_error),
                     verdict))

    failed = any(r[-1] == "FAIL" for r in rows)
    overall = "FAIL" if failed else "PASS"
    rows.append(("overall", None, None, None, None, None, overall))
    cols = ("quantity", "point", "analytic", "mc_estimate", "mc_stderr", "z", "verdict")
    meta = {"n": cfg.n, "seed": cfg.seed, "sigma": cfg.sigma, "verdict": overall,
            "censored_count": summ.censored_count}
    return Report("compare", cols, rows, meta), (EXIT_FAIL if failed else EXIT_OK)


_RUNNERS = {
    "lst": _run_lst,
    "moments": _run_moments,
    "survival": _run_survival,
    "quantile": _run_quantile,
    "simulate": _run_simulate,
    "compare": _run_compare,
}


def run(cfg: RunConfig) -> tuple[int, Report]:
    """Execute one command; StandbyError propagates to the caller."""
    report, status = _RUNNERS[cfg.command](cfg)
    report.meta = {"model": _model_meta(cfg.model), **report.meta}
    return status, report


# -- entry point ------------------------------------------------------------


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="duo-standby",
        description="Lifetime of a two-server alternating standby system with repair.",
    )
    ap.add_argument("command", nargs="?", choices=COMMANDS)
    ap.add_argument("--config", help="TOML run configuration")
    ap.add_argument("--out", help="write the report here instead of stdout")
    ap.add_argument("--format", choices=("csv", "json"))
    model = ap.add_argument_group("model (overrides [model])")
    for key in MODEL_KEYS[:4]:
        model.add_argument(f"--{key}", metavar="DIST", help='e.g. "exp(1.0)", "weibull(2,1)"')
    model.add_argument("--first-server", dest="first_server", type=int, choices=(1, 2))
    cmd = ap.add_argument_group("command parameters (override [command])")
    cmd.add_argument("--s", type=_float_list, help="transform arguments, comma separated")
    cmd.add_argument("--K", type=int, help="cycles in the scenario partial sum")
    cmd.add_argument("--orders", type=_int_list, help="moment orders, comma separated")
    cmd.add_argument("--moment-method", dest="moment_method", choices=("richardson", "series"))
    cmd.add_argument("--t-max", dest="t_max", type=float)
    cmd.add_argument("--points", type=int)
    cmd.add_argument("--p", type=_float_list, help="survival levels for quantiles")
    cmd.add_argument("--n", type=int, help="replications")
    cmd.add_argument("--seed", type=int)
    cmd.add_argument("--max-cycles", dest="max_cycles", type=int)
    cmd.add_argument("--sigma", type=float, help="z-score threshold for compare")
    cmd.add_argument("--workers", type=int, help="simulation threads (output is unaffected)")
    return ap


def _error_record(exc: BaseException, command: Optional[str]) -> str:
    code = getattr(exc, "code", "error")
    return json.dumps({"error": code, "type": type(exc).__name__, "message": str(exc),
                       "command": command})


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    overrides = {k: getattr(args, k) for k in MODEL_KEYS + PARAM_KEYS + ("format",)}
    try:
        source = load_config_file(args.config) if args.config else {}
        cfg = parse_config(source, command=args.command, overrides=overrides,
                           source_name=args.config or "flags")
    except ConfigError as exc:
        parser.print_usage(sys.stderr)
        print(f"duo-standby: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        status, report = run(cfg)
    except StandbyError as exc:
        print(_error_record(exc, cfg.command), file=sys.stderr)
        return EXIT_MODEL
    text = report.render(cfg.format)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
