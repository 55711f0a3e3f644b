import math

import mpmath as mp
import oracles
import pytest
from hypothesis import given
from hypothesis import strategies as st

from serrinlab.radial import (
    LAMBDA_MAX,
    LAMBDA_MIN,
    ProblemParams,
    boundary_data,
    inner_dirichlet_value,
    neumann_constant,
    radial_solution,
    u_radial,
    u_radial_derivs,
)

lams = st.floats(min_value=0.01, max_value=0.99)
dims = st.integers(min_value=2, max_value=7)


def test_constants_at_half_in_the_plane():
    a, c = boundary_data(ProblemParams(2, 0.5))
    assert c == 0.25
    assert a == pytest.approx(0.25 * math.log(0.5) + 0.1875, abs=1e-16)


@pytest.mark.parametrize(
    "n, lam, a_ref, c_ref",
    [
        # mpmath reference values, see oracles.radial_data
        (2, 0.5, 0.014213204860013672645691969635455857981124966409936251, 0.25),
        (4, 0.3, 0.070553797468354432737614337428959680658184352638233895, 0.24145569620253164656625933271309714340401971810442917),
        (3, 0.1, 0.13232673267326732480646189576234359158299075328324251, 0.32970297029702970255291586124522346225066147099462169),
    ],
)
def test_constants_match_frozen_reference(n, lam, a_ref, c_ref):
    a, c = boundary_data(ProblemParams(n, lam))
    assert a == pytest.approx(a_ref, rel=1e-14)
    assert c == pytest.approx(c_ref, rel=1e-14)


@given(n=dims, lam=lams)
def test_constants_agree_with_linear_solve_oracle(n, lam):
    a_ref, c_ref, _, _ = oracles.radial_data(n, lam)
    a, c = boundary_data(ProblemParams(n, lam))
    assert a == pytest.approx(float(a_ref), rel=1e-12, abs=1e-15)
    assert c == pytest.approx(float(c_ref), rel=1e-12)


@given(n=dims, lam=lams)
def test_boundary_conditions_hold(n, lam):
    params = ProblemParams(n, lam)
    sol = radial_solution(params)
    assert u_radial(params, 1.0) == pytest.approx(0.0, abs=1e-15)
    assert u_radial(params, lam) == pytest.approx(sol.a, abs=1e-14)
    du_in, _ = u_radial_derivs(params, lam)
    du_out, _ = u_radial_derivs(params, 1.0)
    # inner normal is +r on the inner circle and -r on the outer one
    assert du_in == pytest.approx(sol.c, rel=1e-12)
    assert -du_out == pytest.approx(sol.c, rel=1e-12)


@given(n=dims, lam=lams, t=st.floats(min_value=0.0, max_value=1.0))
def test_values_and_derivatives_match_oracle(n, lam, t):
    params = ProblemParams(n, lam)
    r = lam + t * (1.0 - lam)
    *_, u = oracles.radial_solution(n, lam)
    rm = mp.mpf(r)
    du, d2u = u_radial_derivs(params, r)
    assert u_radial(params, r) == pytest.approx(float(u(rm)), abs=1e-14)
    assert du == pytest.approx(float(mp.diff(u, rm)), abs=1e-13)
    assert d2u == pytest.approx(float(mp.diff(u, rm, 2)), abs=1e-11, rel=1e-12)


def test_oracle_solves_torsion_equation():
    *_, u = oracles.radial_solution(3, 0.3)
    for r in (0.3, 0.5, 0.9):
        r = mp.mpf(r)
        lap = mp.diff(u, r, 2) + 2 * mp.diff(u, r) / r
        assert abs(lap + 1) < 1e-30


@given(n=dims, lam=lams)
def test_solution_is_positive_inside(n, lam):
    params = ProblemParams(n, lam)
    for t in (0.1, 0.5, 0.9):
        assert u_radial(params, lam + t * (1 - lam)) > 0.0


@given(n=dims, lam=lams)
def test_neumann_constant_in_unit_range(n, lam):
    assert 0.0 < neumann_constant(ProblemParams(n, lam)) < 1.0 / n


def test_log_limit_of_general_formula():
    # the n >= 3 expression tends to the planar one as n -> 2
    lam = 0.37
    two = inner_dirichlet_value(ProblemParams(2, lam))
    n = 2 + 1e-7
    near = lam * (lam ** (n - 2) - 1.0) / (n * (n - 2)) * (1.0 + lam) / (1.0 + lam ** (n - 1)) + (
        1.0 - lam * lam
    ) / (2 * n)
    assert near == pytest.approx(two, abs=1e-7)


@pytest.mark.parametrize("n", [1, 0, 2.5, True])
def test_bad_dimension(n):
    with pytest.raises(ValueError):
        ProblemParams(n, 0.5)


@pytest.mark.parametrize("lam", [0.0, 1.0, -0.1, LAMBDA_MIN / 2, 1.5, float("nan")])
def test_bad_radius(lam):
    with pytest.raises(ValueError):
        ProblemParams(2, lam)


def test_extreme_radii_accepted():
    for lam in (LAMBDA_MIN, LAMBDA_MAX):
        a, c = boundary_data(ProblemParams(3, lam))
        assert math.isfinite(a) and c > 0


def test_radius_outside_annulus_rejected():
    params = ProblemParams(2, 0.5)
    with pytest.raises(ValueError):
        u_radial(params, 0.4)
    with pytest.raises(ValueError):
        u_radial_derivs(params, 1.01)
