"""Per-harmonic 2x2 representation of the linearized domain-variation operator.

On the span of ``(Y, 0)`` and ``(0, Y)`` for a spherical harmonic ``Y`` of
degree ``k`` the linearization acts as a symmetric 2x2 matrix, written here in
the orthonormal basis ``e1 = (lam^((1-n)/2) Y, 0)``, ``e2 = (0, Y)``.

Hyperbolic functions of ``omega = -alpha*log(lam)`` are always evaluated
through ``q = lam**alpha = exp(-omega)`` so that degrees up to 1e4 and beyond
neither overflow nor lose accuracy.
"""

from __future__ import annotations

import csv
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from typing import NamedTuple, TextIO

import numpy as np

from .radial import ProblemParams, neumann_constant, u_radial_derivs


def _check_degree(k: float) -> float:
    k = float(k)
    if not (k >= 0.0) or math.isinf(k):
        raise ValueError(f"harmonic degree must be a finite real >= 0, got {k!r}")
    return k


def _hyperbolic_terms(lam: float, alpha: float) -> tuple[float, float]:
    """Return ``(alpha*coth(omega), alpha/sinh(omega))`` with e^omega = lam^-alpha.

    At alpha = 0 (n = 2, k = 0) both terms tend to -1/log(lam).
    """
    log_lam = math.log(lam)
    if alpha == 0.0:
        val = -1.0 / log_lam
        return val, val
    one_minus_q2 = -math.expm1(2.0 * alpha * log_lam)
    q = math.exp(alpha * log_lam)
    return alpha * (1.0 + q * q) / one_minus_q2, 2.0 * alpha * q / one_minus_q2


@dataclass(frozen=True)
class ModeMatrix:
    params: ProblemParams
    k: float
    m11: float
    m12: float
    m22: float
    alpha: float
    omega: float
    cap_c: float
    cap_d: float

    @property
    def m21(self) -> float:
        return self.m12

    def as_array(self) -> np.ndarray:
        return np.array([[self.m11, self.m12], [self.m12, self.m22]])


@dataclass(frozen=True)
class EigenPair:
    mu1: float
    mu2: float
    v1: tuple[float, float]
    v2: tuple[float, float]


def _cd(params: ProblemParams, k: float) -> tuple[float, float, float, float]:
    """alpha, omega, C and D for degree ``k``."""
    n, lam = params.n, params.lam
    alpha = 0.5 * n + k - 1.0
    omega = -alpha * math.log(lam)
    acoth, _ = _hyperbolic_terms(lam, alpha)
    cap_c = (lam + 1.0) * acoth + 0.5 * n * (lam - 1.0)
    cap_d = (n + k - 1.0) * (k - 1.0)
    return alpha, omega, cap_c, cap_d


def mode_matrix(params: ProblemParams, k: float) -> ModeMatrix:
    """Matrix of the linearized operator on the degree-``k`` subspace."""
    k = _check_degree(k)
    n, lam = params.n, params.lam
    inv_c = 1.0 / neumann_constant(params)
    if k == 0.0 and n == 2:
        log_lam = math.log(lam)
        m11 = -1.0 / (lam * log_lam) - 1.0 / lam
        m12 = lam**-0.5 / log_lam
        m22 = -1.0 / log_lam + 1.0
    else:
        # numerator and denominator of the power-law form divided by lam^(2-n-k)
        p = n + k - 2.0
        q2 = lam ** (2.0 * k + n - 2.0)
        den = 1.0 - q2
        m11 = ((k + n - 2.0) + k * q2) / (lam * den) - (n - 1.0) / lam
        m12 = lam ** (0.5 * (1 - n)) * (2.0 - n - 2.0 * k) * lam**p / den
        m22 = (k + (k + n - 2.0) * q2) / den + (n - 1.0)
    alpha, omega, cap_c, cap_d = _cd(params, k)
    return ModeMatrix(params, k, m11 - inv_c, m12, m22 - inv_c, alpha, omega, cap_c, cap_d)


def reparametrized_matrix(params: ProblemParams, k: float) -> np.ndarray:
    """The shifted matrix M + (1/c) id written through alpha*coth and alpha/sinh."""
    k = _check_degree(k)
    n, lam = params.n, params.lam
    alpha = 0.5 * n + k - 1.0
    acoth, acsch = _hyperbolic_terms(lam, alpha)
    off = -acsch / math.sqrt(lam)
    return np.array([[(acoth - 0.5 * n) / lam, off], [off, acoth + 0.5 * n]])


def harmonic_radial_profiles(
    params: ProblemParams, k: float, r: float
) -> tuple[float, float, float, float]:
    """Radial factors A, B of the harmonic extensions of e1 and e2, with derivatives.

    A(lam) = lam^((1-n)/2), A(1) = 0, B(lam) = 0, B(1) = 1.
    """
    k = _check_degree(k)
    n, lam = params.n, params.lam
    r = float(r)
    if not (lam <= r <= 1.0):
        raise ValueError(f"radius {r!r} outside [{lam!r}, 1]")
    scale = lam ** (0.5 * (1 - n))
    p = n + k - 2.0
    if p == 0.0:
        log_lam = math.log(lam)
        a_val = scale * math.log(r) / log_lam
        b_val = -(math.log(r) - log_lam) / log_lam
        return a_val, b_val, scale / (r * log_lam), -1.0 / (r * log_lam)
    # r^(2-n-k) and lam^(2-n-k) rescaled by lam^p to stay bounded
    den = 1.0 - lam ** (k + p)
    inner = (lam / r) ** p
    outer = r**k
    d_inner = -p * inner / r
    d_outer = k * r ** (k - 1.0) if k != 0.0 else 0.0
    lam_p = lam**p
    lam_k = lam**k
    a_val = scale * (inner - outer * lam_p) / den
    da = scale * (d_inner - d_outer * lam_p) / den
    b_val = (outer - lam_k * inner) / den
    db = (d_outer - lam_k * d_inner) / den
    return a_val, b_val, da, db


def mode_matrix_via_profiles(params: ProblemParams, k: float) -> ModeMatrix:
    """Assemble the mode matrix from boundary derivatives of the harmonic profiles.

    Independent of :func:`mode_matrix`; the two are compared as an oracle pair.
    """
    k = _check_degree(k)
    n, lam = params.n, params.lam
    c = neumann_constant(params)
    _, _, da_in, db_in = harmonic_radial_profiles(params, k, lam)
    _, _, da_out, db_out = harmonic_radial_profiles(params, k, 1.0)
    _, d2u_in = u_radial_derivs(params, lam)
    _, d2u_out = u_radial_derivs(params, 1.0)
    back = lam ** (0.5 * (n - 1))
    m11 = -back * da_in + d2u_in / c
    m12 = -back * db_in
    m22 = db_out + d2u_out / c
    alpha, omega, cap_c, cap_d = _cd(params, k)
    return ModeMatrix(params, k, m11, m12, m22, alpha, omega, cap_c, cap_d)


def profile_matrix_asymmetry(params: ProblemParams, k: float) -> float:
    """|M12 - M21| of the profile construction (zero by self-adjointness)."""
    n, lam = params.n, params.lam
    _, _, _, db_in = harmonic_radial_profiles(params, k, lam)
    _, _, da_out, _ = harmonic_radial_profiles(params, k, 1.0)
    return abs(-(lam ** (0.5 * (n - 1))) * db_in - da_out)


def _normalize(vec: tuple[float, float]) -> tuple[float, float]:
    x, y = vec
    norm = math.hypot(x, y)
    x, y = x / norm, y / norm
    if x < 0.0 or (x == 0.0 and y < 0.0):
        x, y = -x, -y
    return x + 0.0, y + 0.0


def _eigvec(a: float, b: float, d: float, mu: float) -> tuple[float, float]:
    # two candidate null vectors of M - mu I; keep the better-conditioned one
    c1 = (b, mu - a)
    c2 = (mu - d, b)
    pick = c1 if math.hypot(*c1) >= math.hypot(*c2) else c2
    return _normalize(pick)


def eigen_closed_form(params: ProblemParams, k: float) -> EigenPair:
    """Eigenpairs from the quadratic (C -/+ sqrt(C^2 - 4 lam D)) / (2 lam) - 1/c."""
    k = _check_degree(k)
    n, lam = params.n, params.lam
    alpha, _, cap_c, cap_d = _cd(params, k)
    acoth, acsch = _hyperbolic_terms(lam, alpha)
    # discriminant as a sum of squares; never negative
    disc = (acoth * (1.0 - lam) - 0.5 * n * (1.0 + lam)) ** 2 + 4.0 * lam * acsch**2
    root = math.sqrt(disc)
    if cap_c >= 0.0:
        big = cap_c + root
        t2 = big / (2.0 * lam)
        t1 = 2.0 * cap_d / big
    else:
        small = cap_c - root
        t1 = small / (2.0 * lam)
        t2 = 2.0 * cap_d / small
    inv_c = 1.0 / neumann_constant(params)
    # eigenvectors of the shifted matrix [[x, y], [y, z]]
    x = (acoth - 0.5 * n) / lam
    y = -acsch / math.sqrt(lam)
    z = acoth + 0.5 * n
    return EigenPair(t1 - inv_c, t2 - inv_c, _eigvec(x, y, z, t1), _eigvec(x, y, z, t2))


def eigen_direct(mat: ModeMatrix | np.ndarray) -> EigenPair:
    """Eigenpairs of a symmetric 2x2 matrix from its characteristic polynomial."""
    if isinstance(mat, ModeMatrix):
        a, b, d = mat.m11, mat.m12, mat.m22
    else:
        arr = np.asarray(mat, dtype=float)
        a, b, d = float(arr[0, 0]), float(0.5 * (arr[0, 1] + arr[1, 0])), float(arr[1, 1])
    mean = 0.5 * (a + d)
    radius = math.hypot(0.5 * (a - d), b)
    mu1, mu2 = mean - radius, mean + radius
    if radius == 0.0:
        # multiple of the identity: any orthonormal pair will do
        return EigenPair(mu1, mu2, (1.0, 0.0), (0.0, 1.0))
    return EigenPair(mu1, mu2, _eigvec(a, b, d, mu1), _eigvec(a, b, d, mu2))


class EigenRow(NamedTuple):
    n: int
    k: float
    j: int
    lam: float
    mu: float


def eigen_branch_table(
    n: int, k_list: Sequence[float], lambda_grid: Iterable[float]
) -> list[EigenRow]:
    """Rows ``(n, k, j, lam, mu_kj(lam))`` ordered by k, then branch j, then lam."""
    lambdas = [float(x) for x in lambda_grid]
    ks = list(k_list)
    if not lambdas:
        raise ValueError("empty lambda grid")
    if not ks:
        raise ValueError("empty degree list")
    for lam in lambdas:
        if not (0.0 < lam < 1.0):
            raise ValueError(f"lambda grid value {lam!r} outside (0, 1)")
    pairs = {}
    rows = []
    for k in ks:
        for lam in lambdas:
            pairs[k, lam] = eigen_closed_form(ProblemParams(n, lam), k)
        for j in (1, 2):
            for lam in lambdas:
                pair = pairs[k, lam]
                rows.append(EigenRow(n, k, j, lam, pair.mu1 if j == 1 else pair.mu2))
    return rows


def write_eigen_csv(rows: Iterable[EigenRow], stream: TextIO) -> None:
    from ._fmt import fmt, fmt_degree

    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["n", "k", "j", "lambda", "mu"])
    for row in rows:
        writer.writerow([row.n, fmt_degree(row.k), row.j, fmt(row.lam), fmt(row.mu)])
