"""Parameter sets, non-dimensionalisation and scenario validation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .geometry import DISK_AREA, DomainSpec

VARIANTS = ("multiscale", "leading_order", "well_mixed", "tcl")
RATE_NAMES = ("beta1", "beta2", "xi", "k", "delta", "p", "c")

# Table 1 total target cells; infection is seeded with E(0) = 1/N(0).
N_CELLS = 8e7


class ConfigError(ValueError):
    """One or more invalid scenario fields.

    ``errors`` holds ``(field, message)`` pairs, one per violated invariant.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(f"{f}: {m}" for f, m in self.errors))


@dataclass(frozen=True)
class DimensionalParams:
    b1: float
    b2: float
    gamma: float
    alpha: float
    d: float
    rho: float
    phi: float
    k_r: float
    D_r: float
    r_c: float
    L: float
    N: float

    def __post_init__(self):
        bad = [(f.name, "must be > 0") for f in fields(self) if not getattr(self, f.name) > 0]
        if bad:
            raise ConfigError(bad)


@dataclass(frozen=True)
class HostParams:
    beta1: float
    beta2: float
    xi: float
    k: float
    delta: float
    p: float
    c: float

    def violations(self, prefix: str = "") -> list[tuple[str, str]]:
        out = []
        for name in RATE_NAMES:
            val = getattr(self, name)
            if not math.isfinite(val) or val < 0:
                out.append((prefix + name, f"must be finite and >= 0, got {val}"))
        for name in ("k", "delta", "c"):
            if getattr(self, name) == 0:
                out.append((prefix + name, "must be > 0"))
        return out

    def scaled(self, **factors: float) -> "HostParams":
        return replace(self, **{k: getattr(self, k) * f for k, f in factors.items()})


TABLE1 = HostParams(beta1=5.6e-7, beta2=5.6e-7, xi=4.19, k=0.4, delta=0.17, p=1.6e10, c=1.0)


def nondimensionalize(dp: DimensionalParams, epsilon: float) -> tuple[HostParams, float]:
    """Map dimensional rates to (HostParams, D0) for host radius ``epsilon``.

    Time is scaled by the airborne degradation rate k_r, lengths by L and
    viral densities by r_c. β1 and ξ carry the host perimeter 2πε.
    """
    if not (0.0 < epsilon < 0.5):
        raise ConfigError([("epsilon", f"must lie in (0, 0.5), got {epsilon}")])
    perim = 2.0 * math.pi * epsilon
    host = HostParams(
        beta1=perim * dp.b1 / (dp.k_r * dp.L),
        beta2=dp.b2 * dp.r_c / dp.k_r,
        xi=perim * dp.gamma * dp.L / dp.k_r,
        k=dp.alpha / dp.k_r,
        delta=dp.d / dp.k_r,
        p=dp.rho * dp.N / (dp.k_r * dp.r_c),
        c=dp.phi / dp.k_r,
    )
    mu = -1.0 / math.log(epsilon)
    D = dp.D_r / (dp.k_r * dp.L**2)
    return host, mu * D


@dataclass
class SystemState:
    """Airborne average V plus per-host (T, E, I, v).

    The flat layout is ``[V, T_1, E_1, I_1, v_1, T_2, ...]``.
    """

    V: float
    hosts: np.ndarray  # (m, 4)

    def to_vector(self) -> np.ndarray:
        return np.concatenate([[self.V], np.asarray(self.hosts, dtype=float).reshape(-1)])

    @classmethod
    def from_vector(cls, y) -> "SystemState":
        y = np.asarray(y, dtype=float)
        if (y.size - 1) % 4:
            raise ValueError(f"state length {y.size} is not 4m+1")
        return cls(V=float(y[0]), hosts=y[1:].reshape(-1, 4).copy())


def state_labels(m: int) -> list[str]:
    out = ["V"]
    for j in range(1, m + 1):
        out += [f"T_{j}", f"E_{j}", f"I_{j}", f"v_{j}"]
    return out


@dataclass(frozen=True)
class ScenarioConfig:
    domain: DomainSpec
    hosts: tuple[HostParams, ...]
    D0: float
    initial: np.ndarray = field(compare=False)
    variant: str = "multiscale"
    exhalation_loss: bool = False
    t_end: float = 20.0

    @property
    def m(self) -> int:
        return len(self.hosts)

    @property
    def mu(self) -> float:
        return self.domain.mu


def validate_scenario(cfg: ScenarioConfig) -> ScenarioConfig:
    """Check every scenario invariant; raise one ConfigError listing all failures."""
    errors: list[tuple[str, str]] = []
    errors += [("domain", msg) for msg in cfg.domain.violations()]
    if len(cfg.hosts) != cfg.domain.m:
        errors.append(("hosts", f"{len(cfg.hosts)} rate sets for {cfg.domain.m} host positions"))
    for j, h in enumerate(cfg.hosts):
        errors += h.violations(prefix=f"hosts[{j}].")
    if not (math.isfinite(cfg.D0) and cfg.D0 > 0):
        errors.append(("D0", f"must be > 0, got {cfg.D0}"))
    if not (math.isfinite(cfg.t_end) and cfg.t_end > 0):
        errors.append(("t_end", f"must be > 0, got {cfg.t_end}"))
    if cfg.variant not in VARIANTS:
        errors.append(("variant", f"unknown variant {cfg.variant!r}, expected one of {VARIANTS}"))
    y0 = np.asarray(cfg.initial, dtype=float)
    if y0.shape != (4 * len(cfg.hosts) + 1,):
        errors.append(("initial", f"expected {4 * len(cfg.hosts) + 1} values, got shape {y0.shape}"))
    elif not np.all(np.isfinite(y0)) or np.any(y0 < 0):
        errors.append(("initial", "initial state must be finite and non-negative"))
    if errors:
        raise ConfigError(errors)
    # area and mu are derived properties of DomainSpec, never stored
    return replace(cfg, initial=y0.copy(), domain=DomainSpec(cfg.domain.hosts, cfg.domain.epsilon))


def seeded_initial(m: int, infected=(0,), n_cells: float = N_CELLS, V0: float = 0.0) -> np.ndarray:
    """T=1 everywhere, E=1/N(0) in the ``infected`` hosts, no virus."""
    y = np.zeros(4 * m + 1)
    y[0] = V0
    for j in range(m):
        y[1 + 4 * j] = 1.0
    for j in infected:
        y[2 + 4 * j] = 1.0 / n_cells
    return y


def single_host(D0: float, variant: str = "multiscale", position=(0.0, 0.0),
                host: HostParams = TABLE1, t_end: float = 20.0, epsilon: float = 0.05,
                exhalation_loss: bool = False) -> ScenarioConfig:
    return validate_scenario(ScenarioConfig(
        domain=DomainSpec((tuple(position),), epsilon),
        hosts=(host,),
        D0=D0,
        initial=seeded_initial(1),
        variant=variant,
        exhalation_loss=exhalation_loss,
        t_end=t_end,
    ))


TWO_HOST_CASES = {
    "I": ((-0.15, 0.0), (0.15, 0.0)),
    "II": ((-0.5, 0.0), (0.5, 0.0)),
    "III": ((-0.85, 0.0), (0.85, 0.0)),
}


def two_host(case: str, D0: float, variant: str = "multiscale", host: HostParams = TABLE1,
             t_end: float = 30.0, exhalation_loss: bool = True, epsilon: float = 0.05) -> ScenarioConfig:
    """Two identical hosts, infection seeded in host 1."""
    return validate_scenario(ScenarioConfig(
        domain=DomainSpec(TWO_HOST_CASES[case], epsilon),
        hosts=(host, host),
        D0=D0,
        initial=seeded_initial(2, infected=(0,)),
        variant=variant,
        exhalation_loss=exhalation_loss,
        t_end=t_end,
    ))
