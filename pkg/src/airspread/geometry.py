"""Neumann Green's function of the unit disk and the host interaction matrix.

The Green's function solves

    ΔG = 1/|Ω| - δ(x - x0)  in the unit disk,   ∂ₙG = 0 on the boundary,
    ∫ G dx = 0,

with |Ω| = π. Near the source, G(x; x0) ~ -ln|x - x0| / 2π + R(x0) where
R is the regular part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

DISK_AREA = math.pi
COINCIDENT_TOL = 1e-12

Point = tuple[float, float]


class GeometryError(ValueError):
    """Invalid point or host layout."""


class CoincidentPointsError(GeometryError):
    pass


class BoundaryError(GeometryError):
    pass


def _as_point(p: Sequence[float]) -> Point:
    x, y = p
    return float(x), float(y)


def greens_value(x: Sequence[float], x0: Sequence[float]) -> float:
    """Neumann Green's function G(x; x0) of the unit disk."""
    x1, y1 = _as_point(x)
    x2, y2 = _as_point(x0)
    r2a = x1 * x1 + y1 * y1
    r2b = x2 * x2 + y2 * y2
    if r2a >= 1.0 or r2b >= 1.0:
        raise BoundaryError(f"points must lie inside the unit disk, got {x} and {x0}")
    dist = math.hypot(x1 - x2, y1 - y2)
    if dist < COINCIDENT_TOL:
        raise CoincidentPointsError(f"G is singular at x = x0 = {x0}")
    image = r2a * r2b + 1.0 - 2.0 * (x1 * x2 + y1 * y2)
    return (
        -math.log(dist) / (2.0 * math.pi)
        - math.log(image) / (4.0 * math.pi)
        + (r2a + r2b) / (4.0 * math.pi)
        - 3.0 / (8.0 * math.pi)
    )


def greens_value_array(x: np.ndarray, x0: Sequence[float]) -> np.ndarray:
    """Vectorised G(x; x0) for an (..., 2) array of field points.

    No singularity or boundary checks; callers keep x away from x0.
    """
    x = np.asarray(x, dtype=float)
    a, b = _as_point(x0)
    px, py = x[..., 0], x[..., 1]
    r2a = px * px + py * py
    r2b = a * a + b * b
    dist2 = (px - a) ** 2 + (py - b) ** 2
    image = r2a * r2b + 1.0 - 2.0 * (px * a + py * b)
    return (
        -np.log(dist2) / (4.0 * np.pi)
        - np.log(image) / (4.0 * np.pi)
        + (r2a + r2b) / (4.0 * np.pi)
        - 3.0 / (8.0 * np.pi)
    )


def regular_part(x0: Sequence[float]) -> float:
    """Regular part R(x0) of G at its own source point."""
    a, b = _as_point(x0)
    r2 = a * a + b * b
    if r2 >= 1.0:
        raise BoundaryError(f"R diverges at the boundary, got |x0|^2 = {r2}")
    return -math.log(1.0 - r2) / (2.0 * math.pi) + r2 / (2.0 * math.pi) - 3.0 / (8.0 * math.pi)


def layout_violations(hosts: Sequence[Sequence[float]], epsilon: float) -> list[str]:
    """Every layout problem, for reporting before a DomainSpec is built."""
    out = []
    eps = epsilon
    if not (0.0 < eps < 0.5):
        out.append(f"epsilon must lie in (0, 0.5), got {eps}")
        return out
    hosts = [_as_point(p) for p in hosts]
    for j, (a, b) in enumerate(hosts):
        if math.hypot(a, b) >= 1.0 - eps:
            out.append(f"host {j} at {(a, b)} is within epsilon={eps} of the boundary")
    for i in range(len(hosts)):
        for j in range(i + 1, len(hosts)):
            d = math.dist(hosts[i], hosts[j])
            if d <= 2.0 * eps:
                out.append(f"hosts {i} and {j} overlap (distance {d:.6g} <= 2*epsilon)")
    return out


@dataclass(frozen=True)
class DomainSpec:
    """Host layout in the unit disk.

    Hosts are disks of radius ``epsilon`` centred at ``hosts``. Layout
    checks run on construction: hosts must not overlap and must sit
    inside the domain.
    """

    hosts: tuple[Point, ...] = ()
    epsilon: float = 0.05
    area: float = field(default=DISK_AREA, init=False)

    def __post_init__(self):
        object.__setattr__(self, "hosts", tuple(_as_point(p) for p in self.hosts))
        for msg in self.violations():
            raise GeometryError(msg)

    def violations(self) -> list[str]:
        return layout_violations(self.hosts, self.epsilon)

    @property
    def m(self) -> int:
        return len(self.hosts)

    @property
    def mu(self) -> float:
        return -1.0 / math.log(self.epsilon)


def build_greens_matrix(spec: DomainSpec) -> np.ndarray:
    """m×m matrix with R(x_j) on the diagonal and G(x_i; x_j) off it."""
    m = spec.m
    G = np.zeros((m, m))
    for i in range(m):
        G[i, i] = regular_part(spec.hosts[i])
        for j in range(i + 1, m):
            G[i, j] = G[j, i] = greens_value(spec.hosts[i], spec.hosts[j])
    return G


# -- numerical checks -------------------------------------------------------


def fd_laplacian(x: Sequence[float], x0: Sequence[float], h: float = 1e-3) -> float:
    """Compact nine-point Laplacian of G(·; x0) at x.

    The stencil's leading error is (h²/12)Δ²G, which vanishes here because
    ΔG is constant away from the source, so what remains is O(h⁴).
    """
    a, b = _as_point(x)
    offs = np.array(
        [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)],
        dtype=float,
    )
    pts = np.array([a, b]) + h * offs
    g = greens_value_array(pts, x0)
    edge = g[1] + g[2] + g[3] + g[4]
    corner = g[5] + g[6] + g[7] + g[8]
    return (4.0 * edge + corner - 20.0 * g[0]) / (6.0 * h * h)


def fd_laplacian_5pt(x: Sequence[float], x0: Sequence[float], h: float = 1e-3) -> float:
    a, b = _as_point(x)
    offs = np.array([(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)], dtype=float)
    g = greens_value_array(np.array([a, b]) + h * offs, x0)
    return (g[1] + g[2] + g[3] + g[4] - 4.0 * g[0]) / (h * h)


def boundary_flux(x0: Sequence[float], n_points: int = 50, radius: float = 1.0 - 1e-6,
                  h: float = 1e-7) -> np.ndarray:
    """Radial derivative of G(·; x0) at ``n_points`` angles just inside the boundary."""
    theta = np.linspace(0.0, 2.0 * np.pi, n_points, endpoint=False)
    e = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    outer = greens_value_array((radius + h) * e, x0) if radius + h < 1.0 else None
    inner = greens_value_array((radius - h) * e, x0)
    if outer is None:
        mid = greens_value_array(radius * e, x0)
        return (mid - inner) / h
    return (outer - inner) / (2.0 * h)


def disk_integral(x0: Sequence[float], n_theta: int = 256, n_r: int = 48) -> float:
    """∫ G(x; x0) dx over the unit disk by polar quadrature centred at x0.

    The -ln r / 2π singular part is integrated in closed form along each ray;
    the smooth remainder uses Gauss-Legendre in r and the trapezoid rule in θ.
    """
    a, b = _as_point(x0)
    theta = np.linspace(0.0, 2.0 * np.pi, n_theta, endpoint=False)
    ct, st = np.cos(theta), np.sin(theta)
    # distance from x0 to the unit circle along each ray
    proj = a * ct + b * st
    rho = -proj + np.sqrt(proj * proj + 1.0 - a * a - b * b)
    sing = -(rho**2 / 2.0 * np.log(rho) - rho**2 / 4.0) / (2.0 * np.pi)

    s, w = np.polynomial.legendre.leggauss(n_r)
    s = 0.5 * (s + 1.0)
    w = 0.5 * w
    r = rho[:, None] * s[None, :]
    px = a + r * ct[:, None]
    py = b + r * st[:, None]
    r2a = px * px + py * py
    r2b = a * a + b * b
    image = r2a * r2b + 1.0 - 2.0 * (px * a + py * b)
    smooth = -np.log(image) / (4.0 * np.pi) + (r2a + r2b) / (4.0 * np.pi) - 3.0 / (8.0 * np.pi)
    ray = (smooth * r * w[None, :]).sum(axis=1) * rho + sing
    return float(ray.sum() * (2.0 * np.pi / n_theta))


@dataclass(frozen=True)
class CheckResult:
    name: str
    worst: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.worst <= self.tol


def random_interior_pairs(n: int, seed: int, r_max: float = 0.9,
                          min_sep: float = 0.05) -> tuple[np.ndarray, np.ndarray]:
    """n seeded pairs (x, x0) inside radius r_max, at least min_sep apart."""
    rng = np.random.default_rng(seed)
    xs, x0s = [], []
    while len(xs) < n:
        p = rng.uniform(-r_max, r_max, size=(2, 2))
        if np.all(np.hypot(p[:, 0], p[:, 1]) < r_max) and math.dist(p[0], p[1]) >= min_sep:
            xs.append(p[0])
            x0s.append(p[1])
    return np.array(xs), np.array(x0s)


def greens_checks(n: int = 100, seed: int = 0) -> list[CheckResult]:
    """Laplacian, boundary flux, zero mean, symmetry and singularity checks.

    Each check reports the worst deviation over ``n`` seeded random points.
    """
    if n < 1:
        raise ValueError("need at least one point")
    xs, x0s = random_interior_pairs(n, seed)
    target = 1.0 / DISK_AREA
    lap = float(max(abs(fd_laplacian(x, x0) - target) / target for x, x0 in zip(xs, x0s)))
    flux = max(float(np.max(np.abs(boundary_flux(x0)))) for x0 in x0s)
    mean = max(abs(disk_integral(x0)) for x0 in x0s)
    sym = max(
        abs(greens_value(x, x0) - greens_value(x0, x)) / max(1.0, abs(greens_value(x, x0)))
        for x, x0 in zip(xs, x0s)
    )
    rng = np.random.default_rng(seed + 1)
    r = 1e-4
    sing = 0.0
    for x0 in x0s:
        th = rng.uniform(0.0, 2.0 * math.pi)
        x = (x0[0] + r * math.cos(th), x0[1] + r * math.sin(th))
        sing = max(sing, abs(greens_value(x, x0) + math.log(r) / (2.0 * math.pi) - regular_part(x0)))
    return [
        CheckResult("laplacian", lap, 1e-4),
        CheckResult("boundary_flux", flux, 1e-4),
        CheckResult("zero_mean", mean, 1e-6),
        CheckResult("symmetry", sym, 1e-14),
        CheckResult("singularity", sing, 1e-3),
    ]
