"""TOML scenario and parameter-range files.

Scenario layout::

    [domain]
    epsilon = 0.05

    [[hosts]]                  # one table per host; rates default to TABLE1
    position = [0.0, 0.0]
    beta1 = 5.6e-7

    [simulation]
    D0 = 0.2
    t_end = 20.0
    variant = "multiscale"     # multiscale | leading_order | well_mixed | tcl
    exhalation_loss = false
    rtol = 1e-8
    atol = 1e-10

    [initial]                  # optional; per-host lists of length m
    V = 0.0
    T = [1.0]
    E = [1.25e-8]

    [dimensional]              # optional; b1, b2, gamma, alpha, d, rho, phi, k_r, D_r, r_c, L, N

Ranges layout::

    [[param]]
    name = "beta1"
    low = 1e-11
    high = 1e-6
    scale = "log"

Unknown keys anywhere are errors that name the key.
"""

from __future__ import annotations

import math
import sys
import warnings
from dataclasses import fields, replace
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .geometry import DomainSpec, layout_violations
from .integrator import IntegratorConfig
from .parameters import (
    N_CELLS, RATE_NAMES, TABLE1, ConfigError, DimensionalParams, HostParams,
    VARIANTS, ScenarioConfig, nondimensionalize, validate_scenario,
)
from .sensitivity import MULTISCALE_PARAMS, ParamRange

TOP_KEYS = {"domain", "hosts", "simulation", "initial", "dimensional"}
DOMAIN_KEYS = {"epsilon"}
HOST_KEYS = {"position", *RATE_NAMES}
SIM_KEYS = {"D0", "t_end", "variant", "exhalation_loss", "rtol", "atol", "h_init", "h_max", "max_steps"}
INITIAL_KEYS = {"V", "T", "E", "I", "v"}
DIM_KEYS = {f.name for f in fields(DimensionalParams)}
RANGE_KEYS = {"name", "low", "high", "scale"}


class DimensionalOverride(UserWarning):
    pass


def _read(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError([(str(path), f"cannot read file: {e.strerror or e}")]) from e
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError([(str(path), f"not valid TOML: {e}")]) from e


def _unknown(table: dict, allowed: set, where: str) -> list[tuple[str, str]]:
    return [(f"{where}{k}", "unknown key") for k in table if k not in allowed]


def _num(val, name, errors, default=None):
    if val is None:
        return default
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        errors.append((name, f"expected a number, got {val!r}"))
        return default
    return float(val)


def parse_scenario(doc: dict, source: str = "<scenario>") -> tuple[ScenarioConfig, IntegratorConfig]:
    """Build a validated scenario from a parsed TOML document.

    All problems are gathered into a single ConfigError.
    """
    errors: list[tuple[str, str]] = _unknown(doc, TOP_KEYS, "")
    domain = doc.get("domain", {})
    hosts_doc = doc.get("hosts", [])
    sim = doc.get("simulation", {})
    init = doc.get("initial", {})
    dim = doc.get("dimensional")

    errors += _unknown(domain, DOMAIN_KEYS, "domain.")
    errors += _unknown(sim, SIM_KEYS, "simulation.")
    errors += _unknown(init, INITIAL_KEYS, "initial.")
    if not isinstance(hosts_doc, list):
        errors.append(("hosts", "must be an array of tables ([[hosts]])"))
        hosts_doc = []
    for j, h in enumerate(hosts_doc):
        errors += _unknown(h, HOST_KEYS, f"hosts[{j}].")

    epsilon = _num(domain.get("epsilon"), "domain.epsilon", errors, 0.05)

    base_host, dim_D0 = TABLE1, None
    if dim is not None:
        errors += _unknown(dim, DIM_KEYS, "dimensional.")
        missing = sorted(DIM_KEYS - set(dim))
        if missing:
            errors.append(("dimensional", f"missing keys {missing}"))
        elif not any(e[0].startswith("dimensional.") for e in errors):
            try:
                dp = DimensionalParams(**{k: float(dim[k]) for k in DIM_KEYS})
                base_host, dim_D0 = nondimensionalize(dp, epsilon)
            except ConfigError as e:
                errors += [(f"dimensional.{f}", m) for f, m in e.errors]
        overridden = sorted({k for h in hosts_doc for k in h if k in RATE_NAMES}
                            | ({"D0"} if "D0" in sim else set()))
        if overridden:
            warnings.warn(
                f"{source}: dimensionless values {overridden} override the [dimensional] block",
                DimensionalOverride, stacklevel=2,
            )

    positions, hosts = [], []
    for j, h in enumerate(hosts_doc):
        pos = h.get("position")
        if (not isinstance(pos, list) or len(pos) != 2
                or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in pos)):
            errors.append((f"hosts[{j}].position", f"expected [x, y], got {pos!r}"))
            pos = [0.0, 0.0]
        positions.append((float(pos[0]), float(pos[1])))
        rates = {k: _num(h.get(k), f"hosts[{j}].{k}", errors, getattr(base_host, k)) for k in RATE_NAMES}
        hosts.append(HostParams(**rates))
    m = len(hosts)

    errors += [("domain", msg) for msg in layout_violations(positions, epsilon)]

    D0 = _num(sim.get("D0"), "simulation.D0", errors, dim_D0)
    if D0 is None:
        errors.append(("simulation.D0", "required (or give a [dimensional] block)"))
        D0 = math.nan
    t_end = _num(sim.get("t_end"), "simulation.t_end", errors, 20.0)
    variant = sim.get("variant", "multiscale")
    if variant not in VARIANTS:
        errors.append(("simulation.variant", f"unknown variant {variant!r}, expected one of {VARIANTS}"))
    loss = sim.get("exhalation_loss", False)
    if not isinstance(loss, bool):
        errors.append(("simulation.exhalation_loss", f"expected true/false, got {loss!r}"))
        loss = False

    y0 = _initial(init, m, errors)

    icfg = IntegratorConfig()
    try:
        kw = {k: sim[k] for k in ("rtol", "atol", "h_init", "h_max", "max_steps") if k in sim}
        icfg = replace(icfg, **kw)
    except (ValueError, TypeError) as e:
        errors.append(("simulation", str(e)))

    if errors:
        raise ConfigError(errors)
    cfg = ScenarioConfig(
        domain=DomainSpec(tuple(positions), epsilon),
        hosts=tuple(hosts),
        D0=D0,
        initial=y0,
        variant=variant,
        exhalation_loss=loss,
        t_end=t_end,
    )
    return validate_scenario(cfg), icfg


def _initial(init: dict, m: int, errors) -> np.ndarray:
    # defaults: all target cells intact, host 1 seeded with one eclipse cell
    y = np.zeros(4 * m + 1)
    y[0] = 1.0 if m == 0 else 0.0
    y[1::4] = 1.0
    if m:
        y[2] = 1.0 / N_CELLS
    if "V" in init:
        y[0] = _num(init["V"], "initial.V", errors, y[0])
    for slot, key in enumerate("TEIv"):
        if key not in init:
            continue
        vals = init[key]
        if not isinstance(vals, list) or len(vals) != m:
            errors.append((f"initial.{key}", f"expected a list of {m} numbers, got {vals!r}"))
            continue
        for j, v in enumerate(vals):
            y[1 + 4 * j + slot] = _num(v, f"initial.{key}[{j}]", errors, 0.0)
    return y


def load_scenario(path) -> tuple[ScenarioConfig, IntegratorConfig]:
    return parse_scenario(_read(path), source=str(path))


def parse_ranges(doc: dict) -> list[ParamRange]:
    errors = _unknown(doc, {"param"}, "")
    params = doc.get("param", [])
    if not isinstance(params, list) or not params:
        errors.append(("param", "need at least one [[param]] table"))
        raise ConfigError(errors)
    out, seen = [], set()
    for j, p in enumerate(params):
        errors += _unknown(p, RANGE_KEYS, f"param[{j}].")
        name = p.get("name")
        if name not in MULTISCALE_PARAMS:
            errors.append((f"param[{j}].name", f"unknown parameter {name!r}"))
            continue
        if name in seen:
            errors.append((f"param[{j}].name", f"{name} listed twice"))
            continue
        seen.add(name)
        low = _num(p.get("low"), f"param[{j}].low", errors)
        high = _num(p.get("high"), f"param[{j}].high", errors)
        if low is None or high is None:
            errors.append((f"param[{j}]", "low and high are required"))
            continue
        try:
            out.append(ParamRange(name, low, high, p.get("scale", "linear")))
        except ValueError as e:
            errors.append((f"param[{j}]", str(e)))
    if errors:
        raise ConfigError(errors)
    return out


def load_ranges(path) -> list[ParamRange]:
    return parse_ranges(_read(path))
