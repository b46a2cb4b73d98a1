import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from airspread.geometry import (
    BoundaryError, CoincidentPointsError, DomainSpec, GeometryError, build_greens_matrix,
    boundary_flux, disk_integral, fd_laplacian, fd_laplacian_5pt, greens_checks, greens_value,
    greens_value_array, layout_violations, regular_part,
)

from oracle_values import G_HALF_ORIGIN, MU_EPS_005, R_HALF


def interior(r_max=0.9):
    return st.tuples(st.floats(0, r_max), st.floats(0, 2 * math.pi)).map(
        lambda rt: (rt[0] * math.cos(rt[1]), rt[0] * math.sin(rt[1]))
    )


def test_value_against_oracle():
    assert greens_value((0.5, 0.0), (0.0, 0.0)) == pytest.approx(G_HALF_ORIGIN, rel=1e-14)


def test_regular_part_against_oracle():
    assert regular_part((0.5, 0.0)) == pytest.approx(R_HALF, rel=1e-14)
    assert regular_part((0.0, 0.0)) == pytest.approx(-3 / (8 * math.pi), rel=1e-15)


def test_swapped_arguments_agree():
    a, b = (0.3, 0.2), (-0.4, 0.1)
    assert greens_value(a, b) == greens_value(b, a)


@settings(max_examples=200, deadline=None)
@given(interior(), interior())
def test_symmetry_property(x, x0):
    if math.dist(x, x0) < 1e-6:
        return
    g = greens_value(x, x0)
    assert abs(g - greens_value(x0, x)) <= 1e-14 * max(1.0, abs(g))


def test_array_matches_scalar():
    pts = np.array([[0.1, 0.2], [-0.5, 0.3], [0.7, -0.1]])
    x0 = (0.2, -0.3)
    vals = greens_value_array(pts, x0)
    assert np.allclose(vals, [greens_value(p, x0) for p in pts], rtol=1e-15, atol=0)


def test_coincident_points_rejected():
    with pytest.raises(CoincidentPointsError):
        greens_value((0.1, 0.1), (0.1, 0.1 + 1e-13))


@pytest.mark.parametrize("x0", [(1.0, 0.0), (0.8, 0.8)])
def test_regular_part_outside_disk(x0):
    with pytest.raises(BoundaryError):
        regular_part(x0)


def test_regular_part_diverges_at_wall():
    vals = [regular_part((r, 0.0)) for r in (0.9, 0.99, 0.999)]
    assert vals[0] < vals[1] < vals[2]


def test_zero_mean_by_quadrature():
    assert abs(disk_integral((0.2, 0.1))) < 1e-10


def test_zero_mean_at_origin():
    assert abs(disk_integral((0.0, 0.0))) < 1e-12


def test_nine_point_laplacian_close_to_source():
    x0 = (0.1, 0.0)
    x = (0.15, 0.0)
    assert fd_laplacian(x, x0) == pytest.approx(1 / math.pi, rel=1e-6)
    # the five-point stencil is visibly worse this close to the singularity
    assert abs(fd_laplacian_5pt(x, x0) * math.pi - 1) > 1e-3


def test_boundary_flux_vanishes():
    assert np.max(np.abs(boundary_flux((0.3, -0.2)))) < 1e-4


def test_singular_structure():
    x0 = (0.3, 0.4)
    for r in (1e-3, 1e-4, 1e-5):
        x = (x0[0] + r, x0[1])
        assert abs(greens_value(x, x0) + math.log(r) / (2 * math.pi) - regular_part(x0)) < 10 * r


def test_greens_matrix_layout():
    spec = DomainSpec(((0.0, 0.0), (0.5, 0.0), (0.0, -0.4)))
    G = build_greens_matrix(spec)
    assert G.shape == (3, 3)
    assert np.array_equal(G, G.T)
    assert G[0, 0] == regular_part((0.0, 0.0))
    assert G[0, 1] == greens_value((0.0, 0.0), (0.5, 0.0))


def test_empty_domain():
    spec = DomainSpec(())
    assert spec.m == 0
    assert build_greens_matrix(spec).shape == (0, 0)


def test_mu_recomputed():
    spec = DomainSpec(((0.0, 0.0),), 0.05)
    assert spec.mu == pytest.approx(MU_EPS_005, rel=1e-15)
    assert spec.area == math.pi


def test_overlap_rejected():
    with pytest.raises(GeometryError, match="overlap"):
        DomainSpec(((0.0, 0.0), (0.05, 0.0)), 0.05)


def test_boundary_proximity_rejected():
    with pytest.raises(GeometryError, match="boundary"):
        DomainSpec(((0.99, 0.0),), 0.05)


def test_layout_violations_lists_everything():
    msgs = layout_violations([(0.0, 0.0), (0.05, 0.0), (0.99, 0.0)], 0.05)
    assert len(msgs) == 2


@pytest.mark.parametrize("eps", [0.0, 0.5, -0.1])
def test_bad_epsilon(eps):
    with pytest.raises(GeometryError, match="epsilon"):
        DomainSpec((), eps)


def test_checks_pass_and_are_seeded():
    a = greens_checks(20, seed=3)
    b = greens_checks(20, seed=3)
    assert all(r.passed for r in a)
    assert [r.worst for r in a] == [r.worst for r in b]


def test_checks_need_points():
    with pytest.raises(ValueError):
        greens_checks(0)
