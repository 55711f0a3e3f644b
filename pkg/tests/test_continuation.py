import io
import json
import math

import numpy as np
import pytest

from serrinlab import continuation
from serrinlab.bifurcation import find_lambda_star
from serrinlab.collocation import FourierPerturbation
from serrinlab.continuation import (
    ContinuationError,
    continue_branch,
    newton_solve_branch_point,
    tangent_vector,
    trivial_point,
    verify_overdetermined,
    weighted_norm,
    write_curves_csv,
    write_jsonl,
)
from serrinlab.modes import mode_matrix
from serrinlab.radial import ProblemParams


@pytest.fixture(scope="module")
def tangent2():
    return tangent_vector(find_lambda_star(2, 2).lambda_star, 2)


def test_tangent_spans_kernel(tangent2):
    mat = mode_matrix(ProblemParams(2, tangent2.lambda_star), 2).as_array()
    z = np.array([tangent2.a, tangent2.b])
    assert np.linalg.norm(z) == pytest.approx(1.0, abs=1e-14)
    assert tangent2.a > 0
    assert np.max(np.abs(mat @ z)) < 1e-11
    assert tangent2.kernel_residual < 1e-11
    assert tangent2.weighted_norm() == pytest.approx(1.0, abs=1e-14)


def test_tangent_requires_bifurcation_value():
    with pytest.raises(ValueError):
        tangent_vector(0.4, 2)
    with pytest.raises(ValueError):
        tangent_vector(find_lambda_star(2, 3).lambda_star, 3)
    with pytest.raises(ValueError):
        tangent_vector(find_lambda_star(3, 2).lambda_star, 2, n=3)


def test_weighted_norm_of_constant_mode():
    p = FourierPerturbation([1.0], [0.0])
    assert weighted_norm(0.25, p) == pytest.approx(math.sqrt(0.25 * 2 * math.pi))


def test_branch_points_converge(branch_m2):
    assert len(branch_m2.points) == 6
    for p in branch_m2.points:
        assert p.residual_sup < 1e-6
        assert abs(p.orthogonality) < 1e-10


def test_branch_points_are_overdetermined_solutions(branch_m2):
    for p in branch_m2.points:
        rep = verify_overdetermined(p)
        assert rep.joint_max_dev < 1e-6
        assert abs(rep.inner_mean - rep.outer_mean) < 1e-6
        assert rep.positive
        assert rep.nontrivial
        z = p.tangent.perturbation(8)
        assert p.v.coeffs1[1] == pytest.approx(p.s * (z.coeffs1[1] + p.w.coeffs1[1]), rel=1e-14)
        assert rep.mode_coefficient == max(abs(p.v.coeffs1[1]), abs(p.v.coeffs2[1])) > 0


def test_lambda_approaches_bifurcation_value(branch_m2):
    lam_star = branch_m2.points[0].tangent.lambda_star
    dist = {p.s: abs(p.lambda_s - lam_star) for p in branch_m2.points}
    assert dist[0.005] < dist[0.01] < dist[0.02]
    assert dist[-0.005] < dist[-0.01] < dist[-0.02]


def test_branch_is_even_in_amplitude(branch_m2):
    # a quarter turn maps cos 2θ to -cos 2θ, so λ(s) = λ(-s)
    lam = {p.s: p.lambda_s for p in branch_m2.points}
    for s in (0.005, 0.01, 0.02):
        assert lam[s] == pytest.approx(lam[-s], abs=1e-7)


def test_branch_bends_quadratically(branch_m2):
    lam_star = branch_m2.points[0].tangent.lambda_star
    dist = {p.s: p.lambda_s - lam_star for p in branch_m2.points}
    assert dist[0.02] > 0
    assert dist[0.02] / dist[0.01] == pytest.approx(4.0, rel=0.05)


def test_correction_is_small(branch_m2):
    for p in branch_m2.points:
        assert weighted_norm(p.tangent.lambda_star, p.w) < 5 * abs(p.s)


def test_trivial_point(tangent2):
    p = newton_solve_branch_point(2, 0.0, tangent=tangent2)
    assert p.s == 0.0 and p.lambda_s == tangent2.lambda_star
    assert p.residual_sup < 1e-8
    assert p.neumann_constant == pytest.approx((1 - p.lambda_s) / 2, abs=1e-10)
    assert trivial_point(tangent2).residual_sup == p.residual_sup


def test_newton_failure_reports_residual(tangent2):
    with pytest.raises(ContinuationError) as info:
        newton_solve_branch_point(2, 0.01, tol=1e-14, max_iter=1, tangent=tangent2)
    assert info.value.last_residual > 0


@pytest.mark.parametrize("m", [1, 3, 0, 2.5])
def test_branch_requires_even_degree(m):
    with pytest.raises(ValueError):
        newton_solve_branch_point(m, 0.01)
    with pytest.raises(ValueError):
        continue_branch(m, [0.01])


def test_failure_keeps_converged_prefix(monkeypatch):
    real = continuation.newton_solve_branch_point

    def flaky(m, s, *args, **kwargs):
        if abs(s) > 0.015:
            raise ContinuationError("forced", 1.0)
        return real(m, s, *args, **kwargs)

    monkeypatch.setattr(continuation, "newton_solve_branch_point", flaky)
    result = continue_branch(2, [0.02, 0.01])
    assert not result.complete
    assert [p.s for p in result.points] == [0.01]
    assert "forced" in result.error


def test_records_and_curves(branch_m2):
    point = branch_m2.points[0]
    buf = io.StringIO()
    write_jsonl([point.to_record()], buf)
    rec = json.loads(buf.getvalue())
    assert float(rec["s"]) == point.s
    assert float(rec["lambda"]) == point.lambda_s
    assert len(rec["w1"]) == len(rec["v2"]) == 9
    curves = io.StringIO()
    write_curves_csv(point, curves, samples=16)
    lines = curves.getvalue().splitlines()
    assert lines[0] == "theta,r_inner,r_outer"
    assert len(lines) == 17
    theta, r_in, r_out = map(float, lines[1].split(","))
    assert theta == 0.0 and 0 < r_in < r_out


def test_higher_mode_branch_point():
    point = newton_solve_branch_point(4, 0.005)
    assert point.residual_sup < 1e-6
    assert abs(point.orthogonality) < 1e-10
    assert point.lambda_s == pytest.approx(find_lambda_star(2, 4).lambda_star, abs=1e-3)


def test_truncation_converged_under_doubling():
    coarse = newton_solve_branch_point(2, 0.02, J=8)
    fine = newton_solve_branch_point(2, 0.02, J=16)
    assert coarse.lambda_s == pytest.approx(fine.lambda_s, abs=1e-10)
    assert np.max(np.abs(fine.w.coeffs1[9:])) < 1e-10


def test_correction_coefficients_decay(branch_m2):
    point = next(p for p in branch_m2.points if p.s == 0.02)
    for coeffs in (point.w.coeffs1, point.w.coeffs2):
        tail = np.abs(coeffs[3:])
        assert np.all(tail[1:] < tail[:-1])
