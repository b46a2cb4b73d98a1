"""Dormand-Prince 5(4) integration with quartic dense output and onset detection."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import make_rhs, target_mask
from .parameters import ScenarioConfig

NEG_TOL = 1e-9

# Dormand-Prince tableau
C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
E = B5 - B4

# Shampine's quartic interpolant: y(t0 + θh) = y0 + h Σ_s K_s (P @ [θ, θ², θ³, θ⁴])_s
P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])


class IntegrationError(RuntimeError):
    def __init__(self, message: str, t: float | None = None):
        self.t = t
        super().__init__(message if t is None else f"{message} (t = {t:.10g})")


class StepBudgetExceeded(IntegrationError):
    pass


class StepSizeUnderflow(IntegrationError):
    pass


class NonFiniteState(IntegrationError):
    pass


class NegativeState(IntegrationError):
    pass


@dataclass(frozen=True)
class IntegratorConfig:
    rtol: float = 1e-8
    atol: float = 1e-10
    h_init: float | None = None
    h_max: float = math.inf
    max_steps: int = 200_000
    check_nonnegative: bool = True

    def __post_init__(self):
        if not (0 < self.rtol < 1):
            raise ValueError(f"rtol must lie in (0, 1), got {self.rtol}")
        if not self.atol > 0:
            raise ValueError(f"atol must be > 0, got {self.atol}")
        if self.h_init is not None and not self.h_init > 0:
            raise ValueError("h_init must be > 0")
        if not self.h_max > 0:
            raise ValueError("h_max must be > 0")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


@dataclass
class Trajectory:
    """Accepted steps plus per-interval quartic coefficients.

    ``internal`` holds the solver's coordinates; components flagged in
    ``log_mask`` were integrated as logarithms and ``states`` holds their
    exponentials. On interval i,

        z(times[i] + θ h_i) = internal[i] + Σ_k coeffs[i, :, k] θ^(k+1),  θ in [0, 1].
    """

    times: np.ndarray
    internal: np.ndarray
    coeffs: np.ndarray
    log_mask: np.ndarray | None = None
    events: list[tuple[str, float]] = field(default_factory=list)
    n_rhs: int = 0

    def __post_init__(self):
        if self.log_mask is None:
            self.log_mask = np.zeros(self.internal.shape[1], dtype=bool)
        self.states = self._to_state(self.internal)

    def _to_state(self, z: np.ndarray) -> np.ndarray:
        if not self.log_mask.any():
            return z
        out = z.copy()
        out[..., self.log_mask] = np.exp(z[..., self.log_mask])
        return out

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def _locate(self, t: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.times, t, side="right") - 1
        return np.clip(idx, 0, len(self.times) - 2)

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        if np.any(t < self.times[0] - 1e-12) or np.any(t > self.times[-1] + 1e-12):
            raise ValueError("requested time outside the integrated span")
        if len(self.times) == 1:
            out = np.repeat(self.states[:1], t.size, axis=0)
            return out[0] if scalar else out
        i = self._locate(t)
        h = self.times[i + 1] - self.times[i]
        th = (t - self.times[i]) / h
        powers = np.stack([th, th**2, th**3, th**4], axis=-1)
        with np.errstate(invalid="ignore"):
            z = self.internal[i] + np.einsum("nck,nk->nc", self.coeffs[i], powers)
        out = self._to_state(z)
        # hit step endpoints exactly
        hit = t == self.times[i + 1]
        out[hit] = self.states[i[hit] + 1]
        return out[0] if scalar else out

    def sample(self, n: int = 500) -> tuple[np.ndarray, np.ndarray]:
        ts = np.linspace(self.times[0], self.times[-1], n)
        ts[-1] = self.times[-1]
        return ts, self(ts)

    def _poly(self, i: int, comp: int) -> np.ndarray:
        """Coefficients (ascending in θ) of component ``comp`` on interval i."""
        return np.concatenate([[self.internal[i, comp]], self.coeffs[i, comp]])

    def component_max(self, comp: int) -> tuple[float, float]:
        """(time, value) of the maximum of one component over the dense output."""
        z = self.internal[:, comp]
        best_i = int(np.argmax(z))
        best_t, best_v = float(self.times[best_i]), float(z[best_i])
        # upper bound of the quartic on [0, 1]; skip intervals that cannot beat the grid max
        c = self.coeffs[:, comp, :]
        bound = z[:-1] + np.clip(c, 0.0, None).sum(axis=1)
        for i in np.flatnonzero(bound > best_v):
            c = self._poly(i, comp)
            d = np.polynomial.polynomial.polyder(c)
            for r in np.roots(d[::-1]):
                if abs(r.imag) > 1e-12 or not (0.0 < r.real < 1.0):
                    continue
                val = float(np.polynomial.polynomial.polyval(r.real, c))
                if val > best_v:
                    h = self.times[i + 1] - self.times[i]
                    best_t, best_v = float(self.times[i] + r.real * h), val
        if self.log_mask[comp]:
            best_v = math.exp(best_v)
        return best_t, best_v

    def first_crossing(self, comp: int, threshold: float, tol: float = 1e-10) -> float | None:
        """Earliest t with y_comp(t) >= threshold, refined by bisection."""
        if self.log_mask[comp]:
            threshold = math.log(threshold)
        y = self.internal[:, comp]
        if y[0] >= threshold:
            return float(self.times[0])
        for i in range(len(self.times) - 1):
            c = self._poly(i, comp)
            if y[i + 1] >= threshold:
                lo, hi = 0.0, 1.0
            else:
                # dense output may poke above the threshold between grid points
                d = np.polynomial.polynomial.polyder(c)
                crit = [r.real for r in np.roots(d[::-1])
                        if abs(r.imag) < 1e-12 and 0.0 < r.real < 1.0]
                above = [r for r in sorted(crit)
                         if np.polynomial.polynomial.polyval(r, c) >= threshold]
                if not above:
                    continue
                lo, hi = 0.0, above[0]
            h = self.times[i + 1] - self.times[i]
            t0 = self.times[i]
            while (hi - lo) * h > tol:
                mid = 0.5 * (lo + hi)
                if np.polynomial.polynomial.polyval(mid, c) >= threshold:
                    hi = mid
                else:
                    lo = mid
            return float(t0 + hi * h)
        return None


def _error_norm(err, y0, y1, rtol, atol):
    scale = atol + rtol * np.maximum(np.abs(y0), np.abs(y1))
    return math.sqrt(float(np.mean((err / scale) ** 2)))


def _initial_step(f, t0, y0, f0, rtol, atol, t_end):
    """Hairer-Wanner starting step for a 5th order method."""
    ok = np.isfinite(y0)
    y0, f0 = y0[ok], f0[ok]
    scale = atol + rtol * np.abs(y0)
    d0 = np.sqrt(np.mean((y0 / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    return min(h0, t_end - t0)


def _stages(f, t, y, h, k0):
    K = np.empty((7, y.size))
    K[0] = k0
    for s in range(1, 7):
        K[s] = f(t + C[s] * h, y + h * (A[s] @ K[:s]))
    return K


def solve(f, y0, t_end: float, icfg: IntegratorConfig = IntegratorConfig(), t0: float = 0.0,
          log_mask=None) -> Trajectory:
    """Adaptive DOPRI5 solve of y' = f(t, y) on [t0, t_end].

    Components flagged in ``log_mask`` are logarithms of non-negative
    quantities; they may be -inf (the quantity is exactly zero) and are
    exempt from the negativity check.
    """
    y = np.array(y0, dtype=float)
    n = y.size
    lin = np.ones(n, dtype=bool) if log_mask is None else ~np.asarray(log_mask, dtype=bool)
    if np.any(np.isnan(y)) or np.any(y == np.inf) or not np.all(np.isfinite(y[lin])):
        raise NonFiniteState("initial state is not finite", t0)
    rtol, atol = icfg.rtol, icfg.atol
    times, states, coeffs = [t0], [y.copy()], []
    t = t0
    k0 = f(t, y)
    n_rhs = 1
    h = icfg.h_init if icfg.h_init is not None else _initial_step(f, t, y, k0, rtol, atol, t_end)
    h = min(h, icfg.h_max)
    steps = 0
    safety, min_fac, max_fac = 0.9, 0.2, 10.0
    check_neg = icfg.check_nonnegative
    while t < t_end:
        if steps >= icfg.max_steps:
            raise StepBudgetExceeded(f"step budget {icfg.max_steps} exhausted", t)
        last = t + h >= t_end
        if last:
            h = t_end - t
        if h <= 16 * np.spacing(t if t else 1.0):
            raise StepSizeUnderflow("step size underflow", t)
        K = _stages(f, t, y, h, k0)
        n_rhs += 6
        if not np.all(np.isfinite(K)):
            h *= min_fac
            continue
        y_new = y + h * (B5 @ K)
        with np.errstate(invalid="ignore"):
            err = _error_norm(h * (E @ K), y, y_new, rtol, atol)
        if not np.isfinite(err):
            raise NonFiniteState("error estimate is not finite", t)
        if err <= 1.0:
            steps += 1
            t_new = t_end if last else t + h
            if check_neg:
                yl = y_new[lin]
                if yl.size and yl.min() < -NEG_TOL:
                    j = int(np.flatnonzero(lin)[np.argmin(yl)])
                    raise NegativeState(
                        f"component {j} fell to {y_new[j]:.3e}; tighten tolerances or check the coupling",
                        t_new,
                    )
            coeffs.append(h * (K.T @ P))
            t, y, k0 = t_new, y_new, K[6]
            times.append(t)
            states.append(y.copy())
            fac = max_fac if err == 0 else min(max_fac, safety * err ** -0.2)
            h = min(h * fac, icfg.h_max)
        else:
            h *= max(min_fac, safety * err ** -0.2)
    if not np.all(np.isfinite(k0)):
        raise NonFiniteState("right-hand side produced NaN or inf", t)
    return Trajectory(
        times=np.array(times),
        internal=np.array(states),
        coeffs=np.array(coeffs).reshape(-1, n, 4),
        log_mask=None if log_mask is None else np.asarray(log_mask, dtype=bool),
        n_rhs=n_rhs,
    )


def solve_fixed(f, y0, t_end: float, n_steps: int, order: int = 5, t0: float = 0.0) -> np.ndarray:
    """Fixed-step run propagating the 5th (default) or embedded 4th order solution."""
    b = B5 if order == 5 else B4
    y = np.array(y0, dtype=float)
    h = (t_end - t0) / n_steps
    t = t0
    for _ in range(n_steps):
        K = _stages(f, t, y, h, f(t, y))
        y = y + h * (b @ K)
        t += h
    return y


def integrate(cfg: ScenarioConfig, icfg: IntegratorConfig = IntegratorConfig(), G=None) -> Trajectory:
    """Solve the scenario on [0, t_end]; target cells are carried as ln T internally."""
    mask = target_mask(cfg.m)
    z0 = np.array(cfg.initial, dtype=float)
    with np.errstate(divide="ignore"):
        z0[mask] = np.log(z0[mask])
    return solve(make_rhs(cfg, G, log_target=True), z0, cfg.t_end, icfg, log_mask=mask)


def detect_onset(traj: Trajectory, host: int, threshold: float = 1e-6) -> float | None:
    """Earliest time host ``host`` (0-based) has viral load >= threshold, or None."""
    if threshold <= 0:
        raise ValueError("threshold must be > 0")
    m = (traj.states.shape[1] - 1) // 4
    if not (0 <= host < m):
        raise IndexError(f"host index {host} out of range for {m} hosts")
    t = traj.first_crossing(4 + 4 * host, threshold)
    if t is not None:
        traj.events.append((f"onset_{host + 1}", t))
    return t


def peak_viral_load(traj: Trajectory, host: int = 0) -> tuple[float, float]:
    """(time, value) of the maximum of v_host over the dense output."""
    return traj.component_max(4 + 4 * host)
