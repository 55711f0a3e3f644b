"""Bifurcation values: zeros of the first eigenvalue branch in the inner radius."""

from __future__ import annotations

import csv
import math
from collections.abc import Iterable
from dataclasses import dataclass
from typing import TextIO

from ._fmt import fmt
from .modes import eigen_closed_form
from .radial import LAMBDA_MAX, LAMBDA_MIN, ProblemParams


class BracketError(RuntimeError):
    """No sign change of the first eigenvalue branch on the admissible interval."""


@dataclass(frozen=True)
class BifurcationValue:
    n: int
    degree: int
    lambda_star: float
    residual: float
    bracket_width: float


def first_eigenvalue(n: int, degree: float, lam: float) -> float:
    return eigen_closed_form(ProblemParams(n, lam), degree).mu1


def find_lambda_star(n: int, degree: int, tol: float = 1e-12) -> BifurcationValue:
    """Bisect lam -> mu_{m,1}(lam) on [1e-6, 1 - 1e-6].

    The branch decreases strictly in lam, so a valid bracket is validated once
    and then halved until it is narrower than ``tol`` and the residual is below
    ``tol``, or until floating point cannot split it further.
    """
    if int(degree) != degree or degree < 2:
        raise ValueError(f"degree must be an integer >= 2, got {degree!r}")
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol!r}")
    degree = int(degree)

    def f(lam: float) -> float:
        return first_eigenvalue(n, degree, lam)

    lo, hi = LAMBDA_MIN, LAMBDA_MAX
    f_lo, f_hi = f(lo), f(hi)
    if not (f_lo > 0.0 > f_hi):
        raise BracketError(
            f"no sign change for n={n}, degree={degree}: "
            f"mu({lo:g})={f_lo:.3g}, mu({hi:g})={f_hi:.3g}"
        )
    best_lam, best_val = (lo, f_lo) if abs(f_lo) < abs(f_hi) else (hi, f_hi)
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = f(mid)
        if abs(f_mid) < abs(best_val):
            best_lam, best_val = mid, f_mid
        if f_mid == 0.0:
            lo = hi = mid
            break
        if f_mid > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol and abs(best_val) < tol:
            break
    return BifurcationValue(n, degree, best_lam, abs(best_val), hi - lo)


def g_invariant_degree(n: int, k: int) -> int:
    """Harmonic degree of the k-th invariant mode for G = O(n-1) x Z2.

    The invariant harmonics are the even zonal ones (cos 2k theta when n = 2),
    so the k-th nonconstant one has degree 2k.
    """
    if n < 2:
        raise ValueError(f"dimension must be >= 2, got {n}")
    if int(k) != k or k < 0:
        raise ValueError(f"mode index must be a nonnegative integer, got {k!r}")
    return 2 * int(k)


@dataclass(frozen=True)
class BifurcationRow:
    k: int
    degree: int
    lambda_star: float
    residual: float


def bifurcation_table(n: int, k_max: int, tol: float = 1e-12) -> list[BifurcationRow]:
    if int(k_max) != k_max or k_max < 1:
        raise ValueError(f"k_max must be an integer >= 1, got {k_max!r}")
    rows = []
    for k in range(1, int(k_max) + 1):
        deg = g_invariant_degree(n, k)
        val = find_lambda_star(n, deg, tol)
        rows.append(BifurcationRow(k, deg, val.lambda_star, val.residual))
    for prev, row in zip(rows, rows[1:]):
        if not row.lambda_star > prev.lambda_star:
            raise ArithmeticError(f"bifurcation values not increasing at k={row.k}")
    return rows


def write_bifurcation_csv(n: int, rows: Iterable[BifurcationRow], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["n", "k", "i_k", "lambda_star", "residual"])
    for row in rows:
        writer.writerow([n, row.k, row.degree, fmt(row.lambda_star), fmt(row.residual)])


def sign_changes(values: Iterable[float]) -> int:
    vals = [v for v in values if v != 0.0 and not math.isnan(v)]
    return sum(1 for a, b in zip(vals, vals[1:]) if (a > 0) != (b > 0))
