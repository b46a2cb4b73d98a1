"""Latin hypercube sampling and partial rank correlation (PRCC) sensitivity."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial
from typing import Callable, Sequence

import numpy as np
from scipy.stats import rankdata

from .integrator import IntegrationError, IntegratorConfig, integrate, peak_viral_load
from .parameters import TABLE1, ScenarioConfig, single_host
from .reproduction import R0Inputs, r0_tcl, r0_two_term

MULTISCALE_PARAMS = ("beta1", "beta2", "xi", "k", "delta", "p", "c", "D0")
TCL_PARAMS = ("beta2", "k", "delta", "p", "c")
DEFAULT_D0 = 0.2
MAX_FAIL_FRACTION = 0.01


class SensitivityError(RuntimeError):
    pass


@dataclass(frozen=True)
class ParamRange:
    name: str
    low: float
    high: float
    scale: str = "linear"

    def __post_init__(self):
        if not self.low < self.high:
            raise ValueError(f"{self.name}: low must be < high, got [{self.low}, {self.high}]")
        if self.scale not in ("linear", "log"):
            raise ValueError(f"{self.name}: scale must be 'linear' or 'log', got {self.scale!r}")
        if self.scale == "log" and self.low <= 0:
            raise ValueError(f"{self.name}: log scale needs low > 0")

    def from_unit(self, u: np.ndarray) -> np.ndarray:
        if self.scale == "log":
            lo, hi = math.log(self.low), math.log(self.high)
            return np.exp(lo + u * (hi - lo))
        return self.low + u * (self.high - self.low)


# The ranges are wider than a x[0.5, 2] band around the tabulated values.
# With that band R0 sits near 1e4 in every sample, the viral peak saturates
# and the peak-v ranks stop responding to either transmission rate; and a
# factor of 4 in xi, p, delta or c is swamped by the spread of the betas.
BETA_RANGE = (1e-11, 1e-6)
D0_RANGE = (0.02, 2.0)
RATE_FACTOR = 3.0
PEAK_T_END = 100.0


def default_ranges(model: str = "multiscale") -> list[ParamRange]:
    """Default LHS box, every parameter log-uniform.

    β1, β2 on BETA_RANGE, D0 on D0_RANGE, the other rates on their
    tabulated value × [1/RATE_FACTOR, RATE_FACTOR].
    """
    if model not in ("multiscale", "tcl"):
        raise ValueError(f"unknown model {model!r}, expected 'multiscale' or 'tcl'")
    names = MULTISCALE_PARAMS if model == "multiscale" else TCL_PARAMS
    out = []
    for name in names:
        if name in ("beta1", "beta2"):
            out.append(ParamRange(name, *BETA_RANGE, "log"))
        elif name == "D0":
            out.append(ParamRange(name, *D0_RANGE, "log"))
        else:
            base = getattr(TABLE1, name)
            out.append(ParamRange(name, base / RATE_FACTOR, base * RATE_FACTOR, "log"))
    return out


def default_template(model: str = "multiscale") -> ScenarioConfig:
    """Single host at the origin.

    The multiscale template lets exhaled virus leave the host; without that
    loss ξ only feeds virus back into the host and cannot lower the peak.
    """
    if model == "tcl":
        return single_host(DEFAULT_D0, variant="tcl", t_end=PEAK_T_END)
    return single_host(DEFAULT_D0, exhalation_loss=True, t_end=PEAK_T_END)


def lhs_sample(ranges: Sequence[ParamRange], n: int, seed: int) -> np.ndarray:
    """n×d Latin hypercube: one point per equal-probability stratum in every column."""
    if n < 2:
        raise ValueError("need n >= 2 samples")
    if not ranges:
        raise ValueError("need at least one range")
    rng = np.random.default_rng(seed)
    d = len(ranges)
    out = np.empty((n, d))
    for j, r in enumerate(ranges):
        strata = rng.permutation(n)
        u = (strata + rng.random(n)) / n
        out[:, j] = r.from_unit(u)
    return out


def prcc(inputs: np.ndarray, output: np.ndarray) -> np.ndarray:
    """Partial rank correlation of each input column with the output.

    Columns and output are rank-transformed (average ranks for ties). For
    column j, ranked x_j and ranked y are each regressed on the remaining
    ranked columns plus an intercept; the PRCC is the Pearson correlation
    of the two residual vectors.
    """
    X = np.asarray(inputs, dtype=float)
    y = np.asarray(output, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, d = X.shape
    if y.shape != (n,):
        raise ValueError(f"output has shape {y.shape}, expected ({n},)")
    if n <= d + 2:
        raise ValueError(f"need more than d + 2 = {d + 2} samples, got {n}")
    RX = np.column_stack([rankdata(X[:, j]) for j in range(d)])
    ry = rankdata(y)
    if np.ptp(ry) == 0:
        raise ValueError("output is constant")
    for j in range(d):
        if np.ptp(RX[:, j]) == 0:
            raise ValueError(f"input column {j} is constant")

    out = np.empty(d)
    ones = np.ones((n, 1))
    for j in range(d):
        Z = np.hstack([ones, np.delete(RX, j, axis=1)])
        if np.linalg.matrix_rank(np.hstack([Z, RX[:, j:j + 1]])) < Z.shape[1] + 1:
            raise np.linalg.LinAlgError(f"column {j} is collinear with the other ranked inputs")
        bx, *_ = np.linalg.lstsq(Z, RX[:, j], rcond=None)
        by, *_ = np.linalg.lstsq(Z, ry, rcond=None)
        ex = RX[:, j] - Z @ bx
        ey = ry - Z @ by
        out[j] = float(ex @ ey / math.sqrt((ex @ ex) * (ey @ ey)))
    return out


@dataclass
class SensitivityResult:
    names: list[str]
    prcc: dict[str, np.ndarray]          # target -> PRCC per parameter
    n_effective: int
    seed: int
    dropped: list[int] = field(default_factory=list)

    def write_csv(self, path) -> None:
        cols = ["r0", "peak_v"]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["parameter", "prcc_r0", "prcc_peak_v", "n_effective", "seed"])
            for i, name in enumerate(self.names):
                vals = [
                    format(float(self.prcc[c][i]), ".17g") if c in self.prcc else ""
                    for c in cols
                ]
                w.writerow([name, *vals, self.n_effective, self.seed])


def _apply(template: ScenarioConfig, names: Sequence[str], row: np.ndarray) -> ScenarioConfig:
    host_kw = {}
    D0 = template.D0
    for name, val in zip(names, row):
        if name == "D0":
            D0 = float(val)
        else:
            host_kw[name] = float(val)
    hosts = tuple(replace(h, **host_kw) for h in template.hosts)
    return replace(template, hosts=hosts, D0=D0)


def evaluate_r0(cfg: ScenarioConfig, N0: float = 1.0) -> float:
    inp = R0Inputs.from_scenario(cfg, N0=N0)
    if cfg.variant == "tcl":
        return r0_tcl(inp)
    return r0_two_term(inp)[0]


def evaluate_peak_v(cfg: ScenarioConfig, icfg: IntegratorConfig = IntegratorConfig()) -> float:
    return peak_viral_load(integrate(cfg, icfg), 0)[1]


def _evaluate(template: ScenarioConfig, names: Sequence[str], targets: Sequence[str],
              icfg: IntegratorConfig, row: np.ndarray) -> tuple[dict[str, float], bool]:
    cfg = _apply(template, names, row)
    out = {}
    if "r0" in targets:
        out["r0"] = evaluate_r0(cfg)
    if "peak_v" in targets:
        try:
            out["peak_v"] = evaluate_peak_v(cfg, icfg)
        except IntegrationError:
            return out, False
    return out, True


def run_sensitivity(
    ranges: Sequence[ParamRange],
    n: int = 1000,
    seed: int = 0,
    targets: Sequence[str] = ("r0", "peak_v"),
    template: ScenarioConfig | None = None,
    icfg: IntegratorConfig = IntegratorConfig(),
    progress: Callable[[int], None] | None = None,
    workers: int = 1,
) -> SensitivityResult:
    """Sample parameters by LHS, evaluate the requested outputs, return PRCCs.

    Samples whose integration fails are dropped; more than 1% failures abort.
    With ``workers > 1`` samples are spread over a process pool; results are
    keyed by sample index so the output does not depend on scheduling.
    """
    if template is None:
        template = default_template("multiscale")
    names = [r.name for r in ranges]
    allowed = TCL_PARAMS if template.variant == "tcl" else MULTISCALE_PARAMS
    unknown = [nm for nm in names if nm not in allowed]
    if unknown:
        raise ValueError(f"parameters {unknown} cannot be varied for the {template.variant} model")
    for t in targets:
        if t not in ("r0", "peak_v"):
            raise ValueError(f"unknown target {t!r}")
    if workers < 1:
        raise ValueError("workers must be >= 1")

    X = lhs_sample(ranges, n, seed)
    Y = {t: np.full(n, np.nan) for t in targets}
    dropped = []
    job = partial(_evaluate, template, names, tuple(targets), icfg)
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        results = pool.map(job, X, chunksize=max(1, n // (8 * workers))) if pool else map(job, X)
        for i, (vals, ok) in enumerate(results):
            for t, v in vals.items():
                Y[t][i] = v
            if not ok:
                dropped.append(i)
                if len(dropped) > MAX_FAIL_FRACTION * n:
                    raise SensitivityError(
                        f"{len(dropped)} of {i + 1} samples failed to integrate (limit 1%); "
                        f"first failures at sample indices {dropped[:5]}"
                    )
            if progress is not None:
                progress(i)
    finally:
        if pool is not None:
            pool.shutdown(cancel_futures=True)
    keep = np.setdiff1d(np.arange(n), dropped)
    result = {t: prcc(X[keep], Y[t][keep]) for t in targets}
    return SensitivityResult(names=names, prcc=result, n_effective=int(keep.size), seed=seed,
                             dropped=dropped)
