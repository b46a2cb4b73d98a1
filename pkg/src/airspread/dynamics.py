"""Right-hand sides of the reduced multiscale model and its limits.

State layout is ``[V, T_1, E_1, I_1, v_1, ..., T_m, E_m, I_m, v_m]``.

Every variant writes the infection force on host j as

    A_j = a_j V + Σ_i W_ji v_i,

so the variants differ only in ``a`` and ``W``:

* multiscale:    a = β1,  W = diag(β1 ξ/(2π D0) + β2) + (μ/D0) β1_j 𝒢_ji ξ_i
* leading_order: the 𝒢 term is dropped
* well_mixed:    the self-exposure term β1 ξ/(2π D0) is dropped as well
* tcl:           a = 0,   W = diag(β2); V still evolves but is not fed back
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import build_greens_matrix
from .parameters import ScenarioConfig


class StateError(ValueError):
    pass


@dataclass(frozen=True)
class Coupling:
    air: np.ndarray      # (m,) coefficient of V in A_j
    W: np.ndarray        # (m, m) coefficient of v_i in A_j
    xi: np.ndarray
    k: np.ndarray
    delta: np.ndarray
    p: np.ndarray
    c_eff: np.ndarray    # c, plus ξ when exhalation leaves the host
    area: float

    @property
    def m(self) -> int:
        return self.air.size

    def is_nonnegative(self) -> bool:
        """True when every coefficient of the infection force is >= 0.

        This is what keeps the non-negative orthant forward invariant; a
        negative Green's entry between distant hosts can break it.
        """
        return bool(np.all(self.air >= 0) and np.all(self.W >= 0))


def build_coupling(cfg: ScenarioConfig, G: np.ndarray | None = None) -> Coupling:
    hosts = cfg.hosts
    m = len(hosts)
    col = lambda name: np.array([getattr(h, name) for h in hosts], dtype=float)
    beta1, beta2, xi = col("beta1"), col("beta2"), col("xi")
    variant = cfg.variant

    W = np.diag(beta2)
    air = beta1.copy()
    if variant == "tcl":
        air = np.zeros(m)
    else:
        if variant in ("multiscale", "leading_order"):
            W = W + np.diag(beta1 * xi / (2.0 * math.pi * cfg.D0))
        if variant == "multiscale":
            if G is None:
                G = build_greens_matrix(cfg.domain)
            G = np.asarray(G, dtype=float)
            if G.shape != (m, m):
                raise StateError(f"Green's matrix shape {G.shape} does not match {m} hosts")
            W = W + (cfg.mu / cfg.D0) * beta1[:, None] * G * xi[None, :]
        elif variant not in ("leading_order", "well_mixed"):
            raise ValueError(f"unknown variant {variant!r}")

    c = col("c")
    return Coupling(
        air=air,
        W=W,
        xi=xi,
        k=col("k"),
        delta=col("delta"),
        p=col("p"),
        c_eff=c + xi if cfg.exhalation_loss else c,
        area=cfg.domain.area,
    )


def make_rhs(cfg: ScenarioConfig, G: np.ndarray | None = None, check: bool = False,
             log_target: bool = False):
    """Return ``f(t, y) -> dy/dt`` with the coupling precomputed once.

    With ``log_target`` the T_j slots of y hold ln T_j and f returns
    d(ln T_j)/dt = -A_j there. The T equation is a pure decay at rate A_j,
    which reaches ~1e6 once the viral load peaks; in log form it is a
    bounded drift and no longer limits an explicit step size.
    """
    cp = build_coupling(cfg, G)
    m = cp.m
    n = 4 * m + 1
    air, W, xi, k, delta, p, c_eff = cp.air, cp.W, cp.xi, cp.k, cp.delta, cp.p, cp.c_eff
    inv_area = 1.0 / cp.area

    if m == 1:
        # scalar path: numpy call overhead dominates for a 5-vector
        a0, w0 = float(air[0]), float(W[0, 0])
        xi0, k0, d0, p0, c0 = float(xi[0]), float(k[0]), float(delta[0]), float(p[0]), float(c_eff[0])
        exp = math.exp

        def f1(t, y):
            if check:
                _check(y, n)
            V, T, E, I, v = y
            A = a0 * V + w0 * v
            if log_target:
                inf = A * exp(T)
                dT = -A
            else:
                inf = A * T
                dT = -inf
            return np.array([
                xi0 * v * inv_area - V,
                dT,
                inf - k0 * E,
                k0 * E - d0 * I,
                p0 * I - c0 * v,
            ])

        return f1

    def f(t, y):
        if check:
            _check(y, n)
        out = np.empty(n)
        V = y[0]
        X = y[1:].reshape(m, 4)
        T, E, I, v = X[:, 0], X[:, 1], X[:, 2], X[:, 3]
        A = air * V + W @ v
        out[0] = xi @ v * inv_area - V
        D = out[1:].reshape(m, 4)
        if log_target:
            inf = A * np.exp(T)
            D[:, 0] = -A
        else:
            inf = A * T
            D[:, 0] = -inf
        D[:, 1] = inf - k * E
        D[:, 2] = k * E - delta * I
        D[:, 3] = p * I - c_eff * v
        return out

    return f


def target_mask(m: int) -> np.ndarray:
    """Boolean mask of the T_j slots in a flat state."""
    mask = np.zeros(4 * m + 1, dtype=bool)
    mask[1::4] = True
    return mask


def _check(y, n):
    if len(y) != n:
        raise StateError(f"state has length {len(y)}, expected {n}")
    if not np.all(np.isfinite(y)):
        raise StateError("state contains NaN or inf")


def rhs(state, cfg: ScenarioConfig, G: np.ndarray | None = None) -> np.ndarray:
    """d(state)/dt for the scenario's variant (builds the coupling on each call)."""
    y = np.asarray(state, dtype=float)
    return make_rhs(cfg, G, check=True)(0.0, y)


def two_host_published_rhs(state, cfg: ScenarioConfig) -> np.ndarray:
    """Two-host system written out term by term.

    Leading-order coupling with exhalation losses -ξ_j v_j in the viral
    equations. The production rate written π_j in some texts is ``p``.
    """
    if cfg.m != 2:
        raise StateError(f"two-host system needs exactly 2 hosts, got {cfg.m}")
    y = np.asarray(state, dtype=float)
    _check(y, 9)
    h1, h2 = cfg.hosts
    D0, area = cfg.D0, cfg.domain.area
    V, T1, E1, I1, v1, T2, E2, I2, v2 = y
    air1 = h1.beta1 * T1 * (V + h1.xi * v1 / (2 * math.pi * D0))
    air2 = h2.beta1 * T2 * (V + h2.xi * v2 / (2 * math.pi * D0))
    return np.array([
        (h1.xi * v1 + h2.xi * v2) / area - V,
        -air1 - h1.beta2 * T1 * v1,
        air1 + h1.beta2 * T1 * v1 - h1.k * E1,
        h1.k * E1 - h1.delta * I1,
        h1.p * I1 - h1.c * v1 - h1.xi * v1,
        -air2 - h2.beta2 * T2 * v2,
        air2 + h2.beta2 * T2 * v2 - h2.k * E2,
        h2.k * E2 - h2.delta * I2,
        h2.p * I2 - h2.c * v2 - h2.xi * v2,
    ])


def host_mass(y) -> np.ndarray:
    """T_j + E_j + I_j for every host; works on a single state or a (N, n) stack."""
    y = np.asarray(y, dtype=float)
    X = y[..., 1:].reshape(*y.shape[:-1], -1, 4)
    return X[..., :3].sum(axis=-1)
