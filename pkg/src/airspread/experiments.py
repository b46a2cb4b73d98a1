"""Parameter sweeps and host experiments shared by the CLI and scripts."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .geometry import regular_part
from .integrator import IntegratorConfig, detect_onset, integrate, peak_viral_load
from .parameters import TABLE1, HostParams, ScenarioConfig, single_host, two_host
from .reproduction import R0Inputs, r0_two_term

FIG5_D0 = (0.002, 0.02, 0.2, 2.0)
ONSET_D0 = (0.001, 0.1, 0.2, 2.0)
ONSET_VARIANT = "leading_order"


def parse_grid(text: str) -> np.ndarray:
    """``lo:hi:steps`` -> linear grid."""
    try:
        lo, hi, steps = text.split(":")
        lo, hi, steps = float(lo), float(hi), int(steps)
    except ValueError:
        raise ValueError(f"grid must look like lo:hi:steps, got {text!r}") from None
    if steps < 1:
        raise ValueError(f"grid {text!r} is empty")
    if steps > 1 and not lo < hi:
        raise ValueError(f"grid {text!r} needs lo < hi")
    return np.linspace(lo, hi, steps)


@dataclass
class R0Grid:
    D0: float
    beta1: np.ndarray   # flattened row-major: beta1 is the slow index
    beta2: np.ndarray
    R1: np.ndarray
    R0: np.ndarray


def sweep_r0(b1: np.ndarray, b2: np.ndarray, D0: float, host: HostParams = TABLE1,
             position=(0.0, 0.0), mu: float = -1.0 / math.log(0.05), N0: float = 1.0) -> R0Grid:
    """R1 and R0 on the β1 × β2 grid, row-major with β1 outermost."""
    b1, b2 = np.asarray(b1, float), np.asarray(b2, float)
    if b1.size == 0 or b2.size == 0:
        raise ValueError("empty grid")
    B1, B2 = np.meshgrid(b1, b2, indexing="ij")
    R = regular_part(position)
    R0 = np.empty(B1.size)
    R1 = np.empty(B1.size)
    for i, (x, y) in enumerate(zip(B1.ravel(), B2.ravel())):
        inp = R0Inputs(host=replace(host, beta1=float(x), beta2=float(y)), D0=D0, mu=mu, R=R, N0=N0)
        R0[i], R1[i], _ = r0_two_term(inp)
    return R0Grid(D0=D0, beta1=B1.ravel(), beta2=B2.ravel(), R1=R1, R0=R0)


def peak_time(cfg: ScenarioConfig, icfg: IntegratorConfig = IntegratorConfig(), host: int = 0) -> float:
    return peak_viral_load(integrate(cfg, icfg), host)[0]


def single_host_peak_times(D0s=FIG5_D0, icfg: IntegratorConfig = IntegratorConfig(),
                           t_end: float = 20.0) -> tuple[dict[float, float], float]:
    """Peak time of v for the multiscale host at each D0, plus the TCL peak time."""
    ms = {D0: peak_time(single_host(D0, t_end=t_end), icfg) for D0 in D0s}
    tcl = peak_time(single_host(D0s[0], variant="tcl", t_end=t_end), icfg)
    return ms, tcl


@dataclass
class OnsetRow:
    D0: float
    case: str
    onset_1: float | None
    onset_2: float | None

    @property
    def delay(self) -> float | None:
        if self.onset_1 is None or self.onset_2 is None:
            return None
        return self.onset_2 - self.onset_1


def onset_row(cfg: ScenarioConfig, case: str, threshold: float = 1e-6,
              icfg: IntegratorConfig = IntegratorConfig()) -> OnsetRow:
    traj = integrate(cfg, icfg)
    return OnsetRow(cfg.D0, case, detect_onset(traj, 0, threshold), detect_onset(traj, 1, threshold))


def onset_table(cases=("I", "II", "III"), D0s=ONSET_D0, threshold: float = 1e-6,
                variant: str = ONSET_VARIANT, icfg: IntegratorConfig = IntegratorConfig(),
                t_end: float = 30.0) -> list[OnsetRow]:
    return [
        onset_row(two_host(case, D0, variant=variant, t_end=t_end), case, threshold, icfg)
        for case in cases for D0 in D0s
    ]
