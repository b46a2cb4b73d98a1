"""Within-host basic reproduction number of a single host."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import DISK_AREA, regular_part
from .parameters import HostParams, ScenarioConfig


@dataclass(frozen=True)
class R0Inputs:
    host: HostParams
    D0: float
    mu: float
    R: float
    area: float = DISK_AREA
    N0: float = 1.0

    def __post_init__(self):
        if not self.D0 > 0:
            raise ValueError(f"D0 must be > 0, got {self.D0}")
        if not self.area > 0:
            raise ValueError(f"area must be > 0, got {self.area}")
        if not self.N0 > 0:
            raise ValueError(f"N0 must be > 0, got {self.N0}")

    @classmethod
    def from_scenario(cls, cfg: ScenarioConfig, N0: float = 1.0) -> "R0Inputs":
        if cfg.m != 1:
            raise ValueError(
                f"the within-host reproduction number is defined for one host; scenario has {cfg.m}"
            )
        return cls(
            host=cfg.hosts[0],
            D0=cfg.D0,
            mu=cfg.mu,
            R=regular_part(cfg.domain.hosts[0]),
            area=cfg.domain.area,
            N0=N0,
        )


def r0_tcl(inp: R0Inputs) -> float:
    h = inp.host
    return h.p * h.beta2 * inp.N0 / (h.delta * h.c)


def r0_well_mixed(inp: R0Inputs) -> float:
    h = inp.host
    return r0_tcl(inp) + h.p * h.beta1 * h.xi * inp.N0 / (h.delta * h.c * inp.area)


def r0_two_term(inp: R0Inputs) -> tuple[float, float, float]:
    """(R0, R1, R2) with R0 = R1 + (μ/D0) R2."""
    h, D0, area = inp.host, inp.D0, inp.area
    air = h.p * h.beta1 * h.xi * inp.N0
    R1 = r0_tcl(inp) + air * (2 * math.pi * D0 + area) / (2 * math.pi * h.delta * D0 * area * h.c)
    R2 = air * inp.R / (h.delta * h.c)
    return R1 + inp.mu / D0 * R2, R1, R2


def ngm_pair(inp: R0Inputs) -> tuple[np.ndarray, np.ndarray]:
    """New-infection and transfer matrices, ordered (V, E, I, v)."""
    h, N0 = inp.host, inp.N0
    F = np.zeros((4, 4))
    F[1, 0] = h.beta1 * N0
    F[1, 3] = h.beta1 * N0 * h.xi * (1 + 2 * math.pi * inp.mu * inp.R) / (2 * math.pi * inp.D0) + h.beta2 * N0
    V = np.array([
        [1.0, 0.0, 0.0, -h.xi / inp.area],
        [0.0, h.k, 0.0, 0.0],
        [0.0, -h.k, h.delta, 0.0],
        [0.0, 0.0, -h.p, h.c],
    ])
    return F, V


def ngm_spectral_r0(inp: R0Inputs) -> float:
    """Spectral radius of F V⁻¹.

    F has a single non-zero row (the eclipse row), so F V⁻¹ has rank one
    and its only non-zero eigenvalue is that row of F dotted with the
    eclipse column of V⁻¹.
    """
    F, V = ngm_pair(inp)
    col = np.linalg.solve(V, np.eye(4)[:, 1])
    return float(abs(F[1] @ col))


def ngm_spectral_r0_dense(inp: R0Inputs) -> float:
    F, V = ngm_pair(inp)
    return float(np.max(np.abs(np.linalg.eigvals(F @ np.linalg.inv(V)))))
