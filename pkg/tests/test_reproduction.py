import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from airspread.geometry import regular_part
from airspread.parameters import TABLE1, HostParams, single_host, two_host
from airspread.reproduction import (
    R0Inputs, ngm_pair, ngm_spectral_r0, ngm_spectral_r0_dense, r0_tcl, r0_two_term, r0_well_mixed,
)

from oracle_values import R0_TABLE1_D0_2, R0_TCL_TABLE1, R1_TABLE1_D0_2, R2_TABLE1_D0_2

MU = -1 / math.log(0.05)
R_ORIGIN = regular_part((0.0, 0.0))


def inputs(host=TABLE1, D0=2.0, R=R_ORIGIN, **kw):
    return R0Inputs(host=host, D0=D0, mu=MU, R=R, **kw)


def test_two_term_against_oracle():
    R0, R1, R2 = r0_two_term(R0Inputs.from_scenario(single_host(2.0)))
    assert R0 == pytest.approx(R0_TABLE1_D0_2, rel=1e-13)
    assert R1 == pytest.approx(R1_TABLE1_D0_2, rel=1e-13)
    assert R2 == pytest.approx(R2_TABLE1_D0_2, rel=1e-13)


def test_tcl_against_oracle():
    assert r0_tcl(inputs()) == pytest.approx(R0_TCL_TABLE1, rel=1e-14)


def test_tcl_identity_case():
    h = HostParams(beta1=0, beta2=1, xi=1, k=1, delta=1, p=1, c=1)
    assert r0_tcl(inputs(h)) == 1.0


def test_tcl_linear_in_p():
    assert r0_tcl(inputs(TABLE1.scaled(p=2))) == pytest.approx(2 * r0_tcl(inputs()), rel=1e-15)


@pytest.mark.parametrize("D0", [0.01, 0.5, 7.0])
def test_no_airborne_infection_collapses_to_tcl(D0):
    inp = inputs(TABLE1.scaled(beta1=0.0), D0=D0, R=0.3)
    assert r0_two_term(inp)[0] == r0_tcl(inp)
    assert r0_well_mixed(inp) == r0_tcl(inp)


def test_host_at_origin_lowers_r0():
    R0, R1, R2 = r0_two_term(inputs())
    assert R2 < 0 and R0 < R1


def test_well_mixed_is_large_diffusion_limit():
    wm = r0_well_mixed(inputs())
    assert abs(r0_two_term(inputs(D0=1e6))[0] - wm) < 1e-5 * wm


def test_well_mixed_large_room_and_no_exhalation():
    assert r0_well_mixed(inputs(area=1e300)) == pytest.approx(r0_tcl(inputs()), rel=1e-12)
    inp = inputs(TABLE1.scaled(xi=0.0))
    assert r0_well_mixed(inp) == r0_tcl(inp)


def test_ngm_without_exhalation_is_tcl():
    inp = inputs(TABLE1.scaled(xi=0.0))
    assert ngm_spectral_r0(inp) == pytest.approx(r0_tcl(inp), rel=1e-14)


def test_ngm_is_rank_one():
    rng = np.random.default_rng(0)
    for _ in range(100):
        h = HostParams(*(getattr(TABLE1, k) * rng.uniform(0.5, 2) for k in
                         ("beta1", "beta2", "xi", "k", "delta", "p", "c")))
        inp = inputs(h, D0=10 ** rng.uniform(-2, 1), R=rng.uniform(-0.12, 0.5))
        F, V = ngm_pair(inp)
        K = F @ np.linalg.inv(V)
        ev = np.linalg.eigvals(K)
        assert np.sum(np.abs(ev) > 1e-9 * np.abs(ev).max()) == 1
        rho = np.abs(ev).max()
        assert abs(abs(np.trace(K)) - rho) <= 1e-9 * rho
        assert ngm_spectral_r0(inp) == pytest.approx(ngm_spectral_r0_dense(inp), rel=1e-9)


def test_ngm_transfer_diagonal():
    _, V = ngm_pair(inputs())
    assert np.array_equal(np.diag(V), [1.0, TABLE1.k, TABLE1.delta, TABLE1.c])


def test_ngm_equals_expansion():
    # the printed F and V give the two-term expansion exactly, so the
    # O((mu/D0)^2) remainder is zero up to roundoff
    for D0 in (0.5, 1, 2, 4, 8):
        inp = inputs(D0=D0)
        assert abs(ngm_spectral_r0(inp) - r0_two_term(inp)[0]) <= 1e-12 * r0_two_term(inp)[0]


def test_ngm_large_diffusion():
    wm = r0_well_mixed(inputs())
    assert abs(ngm_spectral_r0(inputs(D0=1e6)) - wm) <= 1e-6 * wm


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(["p", "beta1", "beta2", "xi", "N0", "delta", "c"]), st.floats(1.01, 3.0),
       st.floats(0.01, 10.0), st.floats(0.0, 0.4))
def test_monotone_in_rates(name, factor, D0, r):
    R = regular_part((r, 0.0))
    base = inputs(D0=D0, R=R)
    if name == "N0":
        bumped = inputs(D0=D0, R=R, N0=factor)
    else:
        bumped = inputs(TABLE1.scaled(**{name: factor}), D0=D0, R=R)
    up = r0_two_term(bumped)[0] > r0_two_term(base)[0]
    assert up == (name not in ("delta", "c"))


@settings(max_examples=100, deadline=None)
@given(st.floats(0.001, 10.0), st.floats(1.01, 5.0))
def test_decreasing_in_diffusion_at_origin(D0, factor):
    assert r0_two_term(inputs(D0=D0 * factor))[0] < r0_two_term(inputs(D0=D0))[0]


def test_input_validation():
    for kw in (dict(D0=0.0), dict(area=-1.0), dict(N0=0.0)):
        with pytest.raises(ValueError):
            R0Inputs(**{"host": TABLE1, "D0": 1.0, "mu": MU, "R": 0.0, **kw})


def test_multi_host_scenarios_refused():
    with pytest.raises(ValueError, match="one host"):
        R0Inputs.from_scenario(two_host("I", 0.2))
