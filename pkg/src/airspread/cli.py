"""Command-line front end.

Exit codes: 0 success, 2 configuration or usage error, 3 numerical failure,
4 failed self-check.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import time
import warnings
from dataclasses import replace
from pathlib import Path

from . import __version__
from .config import load_ranges, load_scenario
from .experiments import (
    FIG5_D0, ONSET_D0, ONSET_VARIANT, onset_row, parse_grid, sweep_r0,
)
from .geometry import greens_checks
from .integrator import IntegrationError, IntegratorConfig, integrate
from .parameters import (
    TABLE1, TWO_HOST_CASES, VARIANTS, ConfigError, state_labels, two_host,
)
from .reproduction import R0Inputs, ngm_spectral_r0, r0_tcl, r0_two_term, r0_well_mixed
from .sensitivity import (
    SensitivityError, default_ranges, default_template, run_sensitivity,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_CHECK = 0, 2, 3, 4
NEAR_BOUNDARY = 0.9


def fmt(x) -> str:
    if x is None:
        return ""
    return format(float(x), ".17g")


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def _positive_int(text: str) -> int:
    try:
        val = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if val < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {val}")
    return val


def _positive_float(text: str) -> float:
    try:
        val = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not val > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {val}")
    return val


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals or any(not v > 0 for v in vals):
        raise argparse.ArgumentTypeError(f"need one or more positive values, got {text!r}")
    return vals


def _grid(text: str):
    try:
        return parse_grid(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _sha256(path) -> str | None:
    if path is None:
        return None
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(out: Path, command: str, config, seed, outputs: list[Path], t0: float) -> Path:
    path = out / "manifest.json"
    doc = {
        "command": command,
        "config_path": str(config) if config is not None else None,
        "config_sha256": _sha256(config),
        "seed": seed,
        "version": __version__,
        "wall_time_s": time.perf_counter() - t0,
        "outputs": [p.name for p in outputs],
    }
    path.write_text(json.dumps(doc, indent=2) + "\n")
    return path


def cmd_simulate(args) -> int:
    t0 = time.perf_counter()
    cfg, icfg = load_scenario(args.config)
    if args.variant:
        cfg = replace(cfg, variant=args.variant)
    traj = integrate(cfg, icfg)
    ts, ys = traj.sample(args.samples)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "trajectory.csv"
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(["t", *state_labels(cfg.m)])
        for t, y in zip(ts, ys):
            w.writerow([fmt(t), *map(fmt, y)])
    write_manifest(out, "simulate", args.config, None, [path], t0)
    print(f"wrote {path} ({len(ts)} rows, {len(traj.times) - 1} steps)")
    return EXIT_OK


def cmd_r0(args) -> int:
    cfg, _ = load_scenario(args.config)
    if cfg.m != 1:
        print(f"error: the within-host reproduction number is a per-host quantity; "
              f"the scenario has {cfg.m} hosts (give exactly one)", file=sys.stderr)
        return EXIT_CONFIG
    x0 = cfg.domain.hosts[0]
    if math.hypot(*x0) >= NEAR_BOUNDARY:
        warnings.warn(
            f"host at |x| = {math.hypot(*x0):.3g} is close to the wall: the regular part R is large "
            "and the two-term expansion degrades", stacklevel=1,
        )
    inp = R0Inputs.from_scenario(cfg, N0=args.n0)
    mode = args.mode or "all"
    rec = {
        "D0": cfg.D0,
        "mu": inp.mu,
        "R": inp.R,
        "N0": inp.N0,
        "position": list(x0),
        "host": {k: getattr(inp.host, k) for k in ("beta1", "beta2", "xi", "k", "delta", "p", "c")},
    }
    if mode in ("expansion", "all"):
        R0, R1, R2 = r0_two_term(inp)
        rec.update(R0=R0, R1=R1, R2=R2, R0_well_mixed=r0_well_mixed(inp), R0_tcl=r0_tcl(inp))
    if mode in ("ngm", "all"):
        rec["ngm_value"] = ngm_spectral_r0(inp)
    text = json.dumps(rec, indent=2)
    print(text)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "r0.json").write_text(text + "\n")
    return EXIT_OK


def _host_and_position(config):
    if config is None:
        return TABLE1, (0.0, 0.0), -1.0 / math.log(0.05)
    cfg, _ = load_scenario(config)
    if cfg.m != 1:
        raise ConfigError([("hosts", f"sweep-r0 needs a single-host scenario, got {cfg.m} hosts")])
    return cfg.hosts[0], cfg.domain.hosts[0], cfg.mu


def cmd_sweep_r0(args) -> int:
    t0 = time.perf_counter()
    host, pos, mu = _host_and_position(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for D0 in args.d0_list:
        g = sweep_r0(args.grid_b1, args.grid_b2, D0, host, pos, mu)
        path = out / f"r0_D0_{D0:g}.csv"
        with open(path, "w", newline="") as fh:
            w = _writer(fh)
            w.writerow(["beta1", "beta2", "R1", "R0"])
            for row in zip(g.beta1, g.beta2, g.R1, g.R0):
                w.writerow(map(fmt, row))
        written.append(path)
        print(f"D0={D0:g}: max R1={g.R1.max():.6g} max R0={g.R0.max():.6g} -> {path.name}")
    write_manifest(out, "sweep-r0", args.config, None, written, t0)
    return EXIT_OK


def cmd_onset(args) -> int:
    t0 = time.perf_counter()
    if args.case == "custom":
        if args.config is None:
            raise ConfigError([("--config", "--case custom needs a two-host scenario file")])
        base, icfg = load_scenario(args.config)
        if base.m != 2:
            raise ConfigError([("hosts", f"onset needs exactly two hosts, got {base.m}")])
        if args.variant:
            base = replace(base, variant=args.variant)
        scenarios = [replace(base, D0=D0) for D0 in args.d0_list]
    else:
        icfg = IntegratorConfig()
        variant = args.variant or ONSET_VARIANT
        scenarios = [two_host(args.case, D0, variant=variant, t_end=args.t_end) for D0 in args.d0_list]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "onset.csv"
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(["D0", "case", "onset_1", "onset_2", "delay"])
        for cfg in scenarios:
            row = onset_row(cfg, args.case, args.threshold, icfg)
            w.writerow([fmt(row.D0), row.case, fmt(row.onset_1), fmt(row.onset_2), fmt(row.delay)])
            delay = "censored" if row.delay is None else f"{row.delay:.6g}"
            print(f"case {row.case} D0={row.D0:g}: delay {delay}")
    write_manifest(out, "onset", args.config, None, [path], t0)
    return EXIT_OK


def cmd_sensitivity(args) -> int:
    t0 = time.perf_counter()
    ranges = load_ranges(args.ranges) if args.ranges else default_ranges(args.model)
    res = run_sensitivity(ranges, n=args.n, seed=args.seed, template=default_template(args.model),
                          workers=args.workers)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"prcc_{args.model}.csv"
    res.write_csv(path)
    print(f"{'parameter':<10} {'R0':>8} {'peak v':>8}")
    for i, name in enumerate(res.names):
        print(f"{name:<10} {res.prcc['r0'][i]:>+8.3f} {res.prcc['peak_v'][i]:>+8.3f}")
    print(f"n_effective={res.n_effective} dropped={len(res.dropped)} seed={res.seed}")
    write_manifest(out, "sensitivity", args.ranges, args.seed, [path], t0)
    return EXIT_OK


def cmd_greens_check(args) -> int:
    results = greens_checks(args.points, args.seed)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.name:<14} worst={r.worst:.3e} tol={r.tol:.0e}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="airspread", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="integrate a scenario and write a time series")
    s.add_argument("--config", required=True)
    s.add_argument("--out", default="out")
    s.add_argument("--samples", type=_positive_int, default=500)
    s.add_argument("--variant", choices=VARIANTS)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("r0", help="within-host reproduction number of a single-host scenario")
    s.add_argument("--config", required=True)
    g = s.add_mutually_exclusive_group()
    g.add_argument("--expansion", dest="mode", action="store_const", const="expansion")
    g.add_argument("--ngm", dest="mode", action="store_const", const="ngm")
    g.add_argument("--all", dest="mode", action="store_const", const="all")
    s.add_argument("--n0", type=_positive_float, default=1.0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_r0)

    s = sub.add_parser("sweep-r0", help="R1 and R0 over a beta1 x beta2 grid")
    s.add_argument("--config", help="single-host scenario supplying rates and position")
    s.add_argument("--grid-b1", type=_grid, default=parse_grid("1e-8:1e-6:200"))
    s.add_argument("--grid-b2", type=_grid, default=parse_grid("1e-8:1e-6:200"))
    s.add_argument("--d0-list", type=_float_list, default=list(FIG5_D0))
    s.add_argument("--out", default="out")
    s.add_argument("--workers", type=_positive_int, default=os.cpu_count() or 1)
    s.set_defaults(func=cmd_sweep_r0)

    s = sub.add_parser("onset", help="infection onset delay between two hosts")
    s.add_argument("--config")
    s.add_argument("--case", choices=(*TWO_HOST_CASES, "custom"), default="I")
    s.add_argument("--threshold", type=_positive_float, default=1e-6)
    s.add_argument("--d0-list", type=_float_list, default=list(ONSET_D0))
    s.add_argument("--variant", choices=VARIANTS)
    s.add_argument("--t-end", type=_positive_float, default=30.0)
    s.add_argument("--out", default="out")
    s.add_argument("--workers", type=_positive_int, default=os.cpu_count() or 1)
    s.set_defaults(func=cmd_onset)

    s = sub.add_parser("sensitivity", help="LHS + PRCC sensitivity of R0 and peak viral load")
    s.add_argument("--ranges")
    s.add_argument("--n", type=_positive_int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--model", choices=("multiscale", "tcl"), default="multiscale")
    s.add_argument("--out", default="out")
    s.add_argument("--workers", type=_positive_int, default=os.cpu_count() or 1)
    s.set_defaults(func=cmd_sensitivity)

    s = sub.add_parser("greens-check", help="self-check of the disk Green's function")
    s.add_argument("--points", type=_positive_int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_greens_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        for field, msg in e.errors:
            print(f"config error: {field}: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationError, SensitivityError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
