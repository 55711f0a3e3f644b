import io
import math

import numpy as np
import oracles
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from serrinlab.modes import (
    EigenPair,
    eigen_branch_table,
    eigen_closed_form,
    eigen_direct,
    harmonic_radial_profiles,
    mode_matrix,
    mode_matrix_via_profiles,
    profile_matrix_asymmetry,
    reparametrized_matrix,
    write_eigen_csv,
)
from serrinlab.radial import ProblemParams, neumann_constant

lams = st.floats(min_value=0.02, max_value=0.98)
dims = st.integers(min_value=2, max_value=6)
degrees = st.integers(min_value=0, max_value=40)


def test_planar_degree_two_at_half():
    # 50-digit reference from oracles.eigenvalues(2, 2, 0.5)
    pair = eigen_closed_form(ProblemParams(2, 0.5), 2)
    assert pair.mu1 == pytest.approx(-2.6524174696260023728862461767, abs=1e-13)
    assert pair.mu2 == pytest.approx(0.45241746962600237288624617671, abs=1e-13)


def test_planar_degree_one_at_half():
    pair = eigen_closed_form(ProblemParams(2, 0.5), 1)
    assert pair.mu1 == pytest.approx(-4.0, abs=1e-13)
    assert pair.mu2 == pytest.approx(0.0, abs=1e-13)


@given(n=dims, k=st.integers(min_value=0, max_value=15), lam=lams)
def test_matrix_matches_high_precision_oracle(n, k, lam):
    ref = oracles.mode_matrix(n, k, lam)
    mat = mode_matrix(ProblemParams(n, lam), k).as_array()
    for i in range(2):
        for j in range(2):
            assert mat[i, j] == pytest.approx(float(ref[i][j]), rel=1e-11, abs=1e-11)


@given(n=dims, k=st.integers(min_value=0, max_value=15), lam=lams)
def test_oracle_matrix_is_symmetric(n, k, lam):
    ref = oracles.mode_matrix(n, k, lam)
    assert abs(ref[0][1] - ref[1][0]) < 1e-30 * max(1, abs(ref[0][1]))


@given(n=dims, k=degrees, lam=lams)
def test_three_constructions_agree(n, k, lam):
    params = ProblemParams(n, lam)
    direct = mode_matrix(params, k)
    via = mode_matrix_via_profiles(params, k)
    assert np.allclose(direct.as_array(), via.as_array(), rtol=1e-12, atol=1e-12)
    shifted = reparametrized_matrix(params, k) - np.eye(2) / neumann_constant(params)
    assert np.allclose(direct.as_array(), shifted, rtol=1e-12, atol=1e-12)
    assert profile_matrix_asymmetry(params, k) < 1e-11 * max(1.0, abs(direct.m12))


@given(n=dims, k=degrees, lam=lams)
def test_closed_form_equals_direct(n, k, lam):
    params = ProblemParams(n, lam)
    closed = eigen_closed_form(params, k)
    direct = eigen_direct(mode_matrix(params, k))
    scale = max(1.0, abs(direct.mu2))
    assert abs(closed.mu1 - direct.mu1) < 1e-12 * scale
    assert abs(closed.mu2 - direct.mu2) < 1e-12 * scale


@given(n=dims, k=degrees, lam=lams)
def test_eigenpairs_are_orthonormal_and_sign_fixed(n, k, lam):
    params = ProblemParams(n, lam)
    mat = mode_matrix(params, k).as_array()
    pair = eigen_closed_form(params, k)
    assert pair.mu1 <= pair.mu2
    v1, v2 = np.array(pair.v1), np.array(pair.v2)
    assert np.linalg.norm(v1) == pytest.approx(1.0, abs=1e-14)
    assert abs(v1 @ v2) < 1e-12
    assert v1[0] > 0 or (v1[0] == 0 and v1[1] > 0)
    for mu, v in ((pair.mu1, v1), (pair.mu2, v2)):
        assert np.max(np.abs(mat @ v - mu * v)) < 1e-11 * max(1.0, abs(pair.mu2))


@given(a=st.floats(-50, 50), b=st.floats(-50, 50), d=st.floats(-50, 50))
def test_direct_solver_matches_numpy(a, b, d):
    mat = np.array([[a, b], [b, d]])
    pair = eigen_direct(mat)
    ref = np.linalg.eigvalsh(mat)
    assert pair.mu1 == pytest.approx(ref[0], abs=1e-12)
    assert pair.mu2 == pytest.approx(ref[1], abs=1e-12)


def test_diagonal_matrix_eigenvectors():
    pair = eigen_direct(np.diag([3.0, -1.0]))
    assert pair == EigenPair(-1.0, 3.0, (0.0, 1.0), (1.0, 0.0))


@given(n=dims, lam=lams)
def test_degree_one_is_translation_kernel(n, lam):
    params = ProblemParams(n, lam)
    pair = eigen_closed_form(params, 1)
    assert abs(pair.mu2) < 1e-12
    assert abs(pair.mu1 + 1.0 / neumann_constant(params)) < 1e-12


@given(n=dims, k=st.integers(2, 30), lam=st.floats(0.05, 0.9))
def test_first_branch_decreases_in_lambda(n, k, lam):
    lo = eigen_closed_form(ProblemParams(n, lam), k).mu1
    hi = eigen_closed_form(ProblemParams(n, lam + 0.05), k).mu1
    assert hi < lo


@given(n=dims, k=st.integers(0, 40), lam=lams)
def test_branches_increase_with_degree(n, k, lam):
    params = ProblemParams(n, lam)
    this, nxt = eigen_closed_form(params, k), eigen_closed_form(params, k + 1)
    assert nxt.mu1 > this.mu1
    assert nxt.mu2 > this.mu2


@given(n=dims, k=st.integers(2, 40), lam=lams)
def test_second_branch_positive_from_degree_two(n, k, lam):
    assert eigen_closed_form(ProblemParams(n, lam), k).mu2 > 0.0


@given(n=dims, lam=lams)
def test_radial_mode_is_stable(n, lam):
    pair = eigen_closed_form(ProblemParams(n, lam), 0)
    assert pair.mu1 < pair.mu2 < 0.0


@pytest.mark.parametrize("n", [2, 3, 4, 5])
@pytest.mark.parametrize("k", range(2, 11))
def test_small_radius_limit(n, k):
    assert eigen_closed_form(ProblemParams(n, 1e-6), k).mu1 == pytest.approx(k - 1, abs=1e-3)


@pytest.mark.parametrize("lam", [0.25, 0.5, 0.75])
@pytest.mark.parametrize("n", [2, 3, 5])
def test_large_degree_asymptotics(n, lam):
    k = 10_000
    pair = eigen_closed_form(ProblemParams(n, lam), k)
    assert pair.mu1 / k == pytest.approx(1.0, abs=0.01)
    assert lam * pair.mu2 / k == pytest.approx(1.0, abs=0.01)


@given(n=dims, lam=lams, k=st.floats(min_value=1e3, max_value=1e7))
def test_huge_degrees_stay_finite(n, lam, k):
    params = ProblemParams(n, lam)
    pair = eigen_closed_form(params, k)
    mat = mode_matrix(params, k)
    assert all(map(math.isfinite, (pair.mu1, pair.mu2, mat.m11, mat.m12, mat.m22)))
    assert abs(mat.m12) < 1e-300 or abs(mat.m12) < 1e-3 * abs(mat.m22)


def test_fractional_degree_accepted():
    pair = eigen_closed_form(ProblemParams(3, 0.4), 2.5)
    below = eigen_closed_form(ProblemParams(3, 0.4), 2)
    above = eigen_closed_form(ProblemParams(3, 0.4), 3)
    assert below.mu1 < pair.mu1 < above.mu1


@pytest.mark.parametrize("k", [-1, float("inf"), float("nan")])
def test_bad_degree(k):
    with pytest.raises(ValueError):
        mode_matrix(ProblemParams(2, 0.5), k)
    with pytest.raises(ValueError):
        eigen_closed_form(ProblemParams(2, 0.5), k)


@given(n=dims, k=st.integers(0, 10), lam=lams)
def test_profiles_meet_boundary_data(n, k, lam):
    params = ProblemParams(n, lam)
    a_in, b_in, _, _ = harmonic_radial_profiles(params, k, lam)
    a_out, b_out, _, _ = harmonic_radial_profiles(params, k, 1.0)
    assert a_in == pytest.approx(lam ** ((1 - n) / 2), rel=1e-12)
    assert abs(a_out) < 1e-12 and abs(b_in) < 1e-12
    assert b_out == pytest.approx(1.0, rel=1e-12)


def test_profile_radius_checked():
    with pytest.raises(ValueError):
        harmonic_radial_profiles(ProblemParams(2, 0.5), 2, 0.3)


def test_branch_table_layout():
    rows = eigen_branch_table(3, range(4), np.linspace(0.01, 0.99, 99))
    assert len(rows) == 8 * 99
    keys = [(r.k, r.j) for r in rows[::99]]
    assert keys == [(k, j) for k in range(4) for j in (1, 2)]
    assert all(rows[i].lam < rows[i + 1].lam for i in range(98))


def test_branch_table_rejects_empty_grid():
    with pytest.raises(ValueError):
        eigen_branch_table(2, [1], [])
    with pytest.raises(ValueError):
        eigen_branch_table(2, [], [0.5])


def test_csv_is_full_precision():
    buf = io.StringIO()
    write_eigen_csv(eigen_branch_table(2, [2], [0.5]), buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "n,k,j,lambda,mu"
    assert lines[1] == "2,2,1,0.5," + f"{eigen_closed_form(ProblemParams(2, 0.5), 2).mu1:.17g}"
    assert len(lines) == 3


@given(n=dims, k=st.integers(0, 20), lam=lams)
def test_c_and_d_coefficients(n, k, lam):
    mat = mode_matrix(ProblemParams(n, lam), k)
    assume(k != 0 or n != 2)
    # C/λ and D/λ are trace and determinant of the shifted matrix
    shifted = mat.as_array() + np.eye(2) / neumann_constant(ProblemParams(n, lam))
    assert np.trace(shifted) == pytest.approx(mat.cap_c / lam, rel=1e-10)
    assert np.linalg.det(shifted) == pytest.approx(mat.cap_d / lam, rel=1e-8, abs=1e-8)
