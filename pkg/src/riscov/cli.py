"""Experiment runner: scenario sweeps to CSV tables.

Subcommands:
  coverage     coverage-vs-threshold curves for the selected methods
  blockage     end-to-end blockage vs outdoor distance (independent/correlated)
  correlation  joint LoS statistics of the geometric blockage model
  compare      sensor-wall model vs penetration and relay baselines
  sweep        generic single-variable sweep at a fixed threshold
  validate     check a config file and report every violation

Every run writes one CSV with a header row plus a leading provenance
comment carrying the seed and the config hash.  Given the same seed, output
bytes are identical for any --workers value.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import hashlib
import math
import sys

import numpy as np

from . import coverage as cov
from . import rectangles
from .baselines import (BaselineConfig, coverage_penetration, coverage_relay)
from .blockage import end_to_end_blockage, uniform_blockage
from .channel import assemble_gains, draw_fading_powers
from .errors import (CapExceededError, ConfigError, InvariantError,
                     NumericInstabilityError)
from .scenario import (_SECTIONS, Scenario, load_scenario, scenario_to_text,
                       validate)
from .scene import build_geometry

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3
EXIT_NUMERIC = 4
EXIT_CAP = 5

SWEEP_VARIABLES = ("threshold_db", "lambda_st_in", "lambda_st_out",
                   "lambda_dy_in", "n_sensors", "distance_R")

_BASELINE_KEYS = {"penetration_loss_db": float, "relay_outdoor_height": float,
                  "relay_gain_db": float}


@dataclasses.dataclass(frozen=True)
class SweepSpec:
    variable: str
    values: tuple
    overrides: tuple = ()  # (key, raw_value) pairs applied to the base scenario


def _flat_key_map():
    """name -> (section, parser); all config keys have unique names."""
    out = {}
    for section, keys in _SECTIONS.items():
        for key, parser in keys.items():
            out[key] = (section, parser)
    return out


_KEYS = _flat_key_map()


def apply_setting(sc: Scenario, name: str, raw: str) -> Scenario:
    """Return a scenario copy with one config key overridden.

    Values use config-file units (lambda_st_out in bl/km^2).
    """
    name = name.split(".")[-1]
    if name not in _KEYS:
        raise ConfigError(f"unknown config key {name!r}")
    section, parser = _KEYS[name]
    try:
        value = parser(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {raw!r}") from exc
    if section == "outdoor_blockage":
        return dataclasses.replace(
            sc, outdoor_blockage=dataclasses.replace(sc.outdoor_blockage,
                                                     **{name: value}))
    if section == "indoor_blockage":
        return dataclasses.replace(
            sc, indoor_blockage=dataclasses.replace(sc.indoor_blockage,
                                                    **{name: value}))
    return dataclasses.replace(sc, **{name: value})


def load_baseline_config(path) -> BaselineConfig:
    """Read the optional [baselines] section of a config file."""
    if path is None:
        return BaselineConfig()
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(str(exc)) from exc
    if not parser.has_section("baselines"):
        return BaselineConfig()
    fields = {}
    for key, raw in parser.items("baselines"):
        if key not in _BASELINE_KEYS:
            raise ConfigError(f"unknown key '{key}' in section [baselines]")
        fields[key] = _BASELINE_KEYS[key](raw)
    return dataclasses.replace(BaselineConfig(), **fields)


def _config_hash(args) -> str:
    if args.config is not None:
        with open(args.config, "rb") as fh:
            return hashlib.sha256(fh.read()).hexdigest()
    return hashlib.sha256(scenario_to_text(Scenario()).encode()).hexdigest()


def _load(args) -> Scenario:
    sc = load_scenario(args.config) if args.config is not None else Scenario()
    for item in args.set or ():
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, raw = item.split("=", 1)
        sc = apply_setting(sc, key.strip(), raw.strip())
    bad = validate(sc)
    if bad:
        raise InvariantError("; ".join(bad))
    return sc


def _seed(args, sc: Scenario) -> int:
    return args.seed if args.seed is not None else sc.rng_seed


def _provenance(args, seed: int, **extra) -> str:
    """One comment line that, with the header, reconstructs the run.

    Deliberately excludes --workers: worker count never changes results.
    """
    parts = [f"riscov {args.command}", f"seed={seed}",
             f"config_sha256={_config_hash(args)}"]
    if getattr(args, "trials", None) is not None:
        parts.append(f"trials={args.trials}")
    for key, value in extra.items():
        parts.append(f"{key}={value}")
    if getattr(args, "set", None):
        joined = ";".join(args.set)
        parts.append(f"set={joined}")
    return " ".join(parts)


def write_csv(path, provenance: str, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# {provenance}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _threshold_grid(args) -> np.ndarray:
    return np.linspace(args.t_min, args.t_max, args.t_points)


def build_curve(sc, grid, methods, trials, seed, workers=1, mode="independent",
                uniform_p=None) -> cov.CoverageCurve:
    """Coverage for every requested method over one dB threshold grid."""
    geometry = build_geometry(sc)
    h2, g2 = draw_fading_powers(sc, seed)
    gains = assemble_gains(sc, geometry, h2, g2)
    if uniform_p is not None:
        blk = uniform_blockage(geometry.n_paths, uniform_p)
    else:
        blk = end_to_end_blockage(geometry, sc)
    t_lin = 10.0 ** (grid / 10.0)
    mom = cov.moments(gains, blk)
    curve = cov.CoverageCurve(thresholds_db=np.asarray(grid, dtype=float))
    for method in methods:
        if method == "mc":
            sampler = None
            source = "analytic-independent"
            if mode == "correlated":
                sampler = rectangles.survival_sampler(sc, geometry)
                source = "geometric-correlated"
            values, err = cov.coverage_monte_carlo(
                gains, blk, grid, trials, seed, blockage_source=source,
                sampler=sampler, workers=workers)
            curve.add(method, values, stderr=err, trials=trials)
            continue
        if method == "approx1":
            values = [cov.coverage_gaussian(mom, t) for t in t_lin]
        elif method == "approx2":
            values = [cov.coverage_approx2(gains, blk, t) for t in t_lin]
        elif method == "chernoff":
            values = [cov.coverage_chernoff(mom, t) for t in t_lin]
        elif method == "enum":
            values = [cov.coverage_approx2(gains, blk, t, backend="enum")
                      for t in t_lin]
        else:
            raise ValueError(f"unknown method {method!r}")
        curve.add(method, values)
    return curve


def _curve_rows(curve: cov.CoverageCurve):
    """Flatten a curve into (threshold_db, method, coverage, stderr, trials)."""
    rows = []
    for method, values in curve.coverage.items():
        err = curve.stderr.get(method)
        trials = curve.trials.get(method, 0)
        for i, t in enumerate(curve.thresholds_db):
            stderr = err[i] if err is not None else 0.0
            rows.append((f"{t:.6g}", method, values[i], stderr, trials))
    return rows


def _ris_curves(sc, grid, methods, trials, seed, workers, mode, uniform_p=None):
    return _curve_rows(build_curve(sc, grid, methods, trials, seed,
                                   workers=workers, mode=mode,
                                   uniform_p=uniform_p))


def cmd_coverage(args) -> int:
    sc = _load(args)
    seed = _seed(args, sc)
    grid = _threshold_grid(args)
    if args.uniform_p is not None and args.mode == "correlated":
        raise ConfigError("--uniform-p only applies to independent-mode "
                          "blockage; the correlated sampler draws from the "
                          "scenario's geometry")
    if args.method == "all":
        methods = ["mc", "approx1", "approx2", "chernoff"]
        if sc.n_sensors <= cov.ENUMERATION_CAP:
            methods.append("enum")
    else:
        methods = [args.method]
    rows = _ris_curves(sc, grid, methods, args.trials, seed, args.workers,
                       args.mode, uniform_p=args.uniform_p)
    provenance = _provenance(args, seed, mode=args.mode, method=args.method,
                             tgrid=f"{args.t_min}:{args.t_max}:{args.t_points}",
                             uniform_p=args.uniform_p)
    write_csv(args.out, provenance,
              ["threshold_db", "method", "coverage", "stderr", "trials"], rows)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_blockage(args) -> int:
    sc = _load(args)
    seed = _seed(args, sc)
    grid = np.linspace(args.d_min, args.d_max, args.d_points)
    modes = ["independent", "correlated"] if args.mode == "both" else [args.mode]
    rows = []
    for mode in modes:
        table = rectangles.end_to_end_blockage_curve(
            sc, grid, args.trials, mode, seed=seed, workers=args.workers)
        rows += [(f"{r['distance']:.6g}", r["mode"], r["mean_blockage"],
                  r["stderr"], r["joint_all_blocked"], r["trials"])
                 for r in table]
    provenance = _provenance(args, seed, mode=args.mode,
                             dgrid=f"{args.d_min}:{args.d_max}:{args.d_points}")
    write_csv(args.out, provenance,
              ["distance_m", "mode", "mean_blockage", "stderr",
               "joint_all_blocked", "trials"], rows)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_correlation(args) -> int:
    sc = _load(args)
    seed = _seed(args, sc)
    geometry = build_geometry(sc)
    if args.segment == "outdoor":
        process = rectangles.outdoor_process(sc, geometry)
    else:
        process = rectangles.indoor_process(sc, geometry)
    stats = rectangles.estimate_joint_stats(process, geometry, args.segment,
                                            args.trials, seed,
                                            workers=args.workers)
    n = geometry.n_paths
    rows = []
    for i in range(n):
        rows.append(("marginal_los", i, "", stats.marginal_los[i],
                     stats.marginal_stderr[i]))
    for i in range(n):
        for j in range(i, n):
            rows.append(("joint_los", i, j, stats.pairwise_joint_los[i, j],
                         stats.joint_stderr[i, j]))
    for i in range(n):
        for j in range(i + 1, n):
            value = (stats.correlation_rho[i, j]
                     if stats.rho_defined[i, j] else "")
            rows.append(("rho", i, j, value, ""))
    for i in range(n):
        for j in range(i + 1, n):
            rows.append(("separation_angle_rad", i, j,
                         stats.separation_angle[i, j], ""))
    for k in range(n + 1):
        rows.append(("blocked_count_pmf", k, "", stats.blocked_count_pmf[k],
                     stats.blocked_count_stderr[k]))
    provenance = _provenance(args, seed, segment=args.segment)
    write_csv(args.out, provenance,
              ["statistic", "i", "j", "value", "stderr"], rows)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_compare(args) -> int:
    sc = _load(args)
    seed = _seed(args, sc)
    base = load_baseline_config(args.config)
    grid = _threshold_grid(args)
    rows = _ris_curves(sc, grid, ["mc"], args.trials, seed, args.workers,
                       "independent")
    rows = [(t, f"ris_n{sc.n_sensors}", v, e, tr) for t, _, v, e, tr in rows]
    pen, pen_err = coverage_penetration(sc, grid, args.trials, seed, base,
                                        workers=args.workers)
    rows += [(f"{t:.6g}", "penetration", pen[i], pen_err[i], args.trials)
             for i, t in enumerate(grid)]
    rel, rel_err = coverage_relay(sc, base, grid, args.trials, seed,
                                  workers=args.workers)
    rows += [(f"{t:.6g}", "relay", rel[i], rel_err[i], args.trials)
             for i, t in enumerate(grid)]
    provenance = _provenance(args, seed,
                             tgrid=f"{args.t_min}:{args.t_max}:{args.t_points}")
    write_csv(args.out, provenance,
              ["threshold_db", "model", "coverage", "stderr", "trials"], rows)
    print(f"wrote {args.out}")
    return EXIT_OK


def _sweep_values(args) -> tuple:
    if args.values is not None:
        vals = tuple(float(v) for v in args.values.split(",") if v.strip())
    elif args.start is not None and args.stop is not None and args.step:
        count = int(math.floor((args.stop - args.start) / args.step + 1e-9)) + 1
        vals = tuple(args.start + i * args.step for i in range(count))
    else:
        raise ConfigError("sweep needs --values or --start/--stop/--step")
    if not vals:
        raise InvariantError("sweep values must be non-empty")
    return vals


def cmd_sweep(args) -> int:
    base = _load(args)
    seed = _seed(args, base)
    if args.variable not in SWEEP_VARIABLES:
        raise ConfigError(f"unknown sweep variable {args.variable!r}")
    values = _sweep_values(args)
    spec = SweepSpec(variable=args.variable, values=values,
                     overrides=tuple(args.set or ()))
    if spec.variable == "n_sensors":
        for v in spec.values:
            if not float(v).is_integer() or not _is_square(int(v)):
                raise InvariantError(f"n_sensors sweep value {v} is not a "
                                     "perfect square")
    rows = []
    for value in spec.values:
        if spec.variable == "threshold_db":
            sc = base
            grid = np.array([value])
        else:
            key = {"lambda_st_in": "lambda_st_in", "lambda_st_out": "lambda_st_out",
                   "lambda_dy_in": "lambda_dy_in", "n_sensors": "n_sensors",
                   "distance_R": "bs_distance_R"}[spec.variable]
            raw = str(int(value)) if spec.variable == "n_sensors" else str(value)
            sc = apply_setting(base, key, raw)
            grid = np.array([args.threshold_db])
        curve = _ris_curves(sc, grid, [args.method], args.trials, seed,
                            args.workers, "independent",
                            uniform_p=args.uniform_p)
        for t, method, v, e, tr in curve:
            rows.append((spec.variable, f"{value:.6g}", t, method, v, e, tr))
    provenance = _provenance(args, seed, variable=args.variable,
                             method=args.method,
                             values=",".join(f"{v:.6g}" for v in spec.values),
                             threshold_db=args.threshold_db,
                             uniform_p=args.uniform_p)
    write_csv(args.out, provenance,
              ["variable", "value", "threshold_db", "method", "coverage",
               "stderr", "trials"], rows)
    print(f"wrote {args.out}")
    return EXIT_OK


def _is_square(n: int) -> bool:
    r = math.isqrt(n) if n >= 0 else -1
    return n >= 1 and r * r == n


def cmd_validate(args) -> int:
    if args.config is None:
        raise ConfigError("validate requires --config")
    sc = load_scenario(args.config)
    load_baseline_config(args.config)
    bad = validate(sc)
    if bad:
        for line in bad:
            print(f"violation: {line}")
        return EXIT_INVARIANT
    print("config ok")
    return EXIT_OK


def _add_common(parser, trials_default=10000):
    parser.add_argument("--config", default=None, help="scenario INI file")
    parser.add_argument("--out", default=None, help="output CSV path")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the scenario RNG seed")
    parser.add_argument("--trials", type=int, default=trials_default)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a config key (config-file units)")


def _add_threshold_grid(parser):
    parser.add_argument("--t-min", type=float, default=0.0)
    parser.add_argument("--t-max", type=float, default=30.0)
    parser.add_argument("--t-points", type=int, default=61)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="riscov",
        description="SNR coverage experiments for a sensor-wall assisted "
                    "outdoor-to-indoor mmWave link")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coverage", help="coverage vs threshold curves")
    _add_common(p)
    _add_threshold_grid(p)
    p.add_argument("--method", default="all",
                   choices=["mc", "approx1", "approx2", "chernoff", "enum", "all"])
    p.add_argument("--mode", default="independent",
                   choices=["independent", "correlated"],
                   help="blockage source for the MC method")
    p.add_argument("--uniform-p", type=float, default=None,
                   help="impose one blockage probability on every path")
    p.set_defaults(func=cmd_coverage)

    p = sub.add_parser("blockage", help="end-to-end blockage vs distance")
    _add_common(p)
    p.add_argument("--d-min", type=float, default=10.0)
    p.add_argument("--d-max", type=float, default=100.0)
    p.add_argument("--d-points", type=int, default=10)
    p.add_argument("--mode", default="both",
                   choices=["independent", "correlated", "both"])
    p.set_defaults(func=cmd_blockage)

    p = sub.add_parser("correlation", help="joint LoS statistics")
    _add_common(p)
    p.add_argument("--segment", default="outdoor", choices=["outdoor", "indoor"])
    p.set_defaults(func=cmd_correlation)

    p = sub.add_parser("compare", help="three-model coverage comparison")
    _add_common(p)
    _add_threshold_grid(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="single-variable sweep")
    _add_common(p)
    p.add_argument("--variable", required=True, choices=list(SWEEP_VARIABLES))
    p.add_argument("--values", default=None, help="comma-separated list")
    p.add_argument("--start", type=float, default=None)
    p.add_argument("--stop", type=float, default=None)
    p.add_argument("--step", type=float, default=None)
    p.add_argument("--threshold-db", type=float, default=20.0)
    p.add_argument("--method", default="mc",
                   choices=["mc", "approx1", "approx2", "chernoff", "enum"])
    p.add_argument("--uniform-p", type=float, default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", help="check a config file")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "out", None) is None and args.command != "validate":
        args.out = f"{args.command}.csv"
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CapExceededError as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except NumericInstabilityError as exc:
        print(f"numeric instability: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except InvariantError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
