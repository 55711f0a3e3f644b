"""Radial solutions of -Δu = 1 on the standard annulus {λ < |x| < 1}.

For every inner radius λ there is exactly one pair of constants (a, c) such
that the Dirichlet problem u = 0 on |x| = 1, u = a on |x| = λ has a radial
solution whose inner normal derivative equals c on *both* boundary circles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

LAMBDA_MIN = 1e-6
LAMBDA_MAX = 1.0 - 1e-6


@dataclass(frozen=True)
class ProblemParams:
    """Ambient dimension ``n`` and inner radius ``lam`` (outer radius is 1)."""

    n: int
    lam: float

    def __post_init__(self) -> None:
        if isinstance(self.n, bool) or int(self.n) != self.n:
            raise ValueError(f"dimension must be an integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        if self.n < 2:
            raise ValueError(f"dimension must be >= 2, got {self.n}")
        lam = float(self.lam)
        if not (LAMBDA_MIN <= lam <= LAMBDA_MAX):
            raise ValueError(
                f"inner radius must lie in [{LAMBDA_MIN:g}, 1 - {LAMBDA_MIN:g}], got {lam!r}"
            )
        object.__setattr__(self, "lam", lam)


@dataclass(frozen=True)
class RadialSolution:
    params: ProblemParams
    a: float
    c: float


def neumann_constant(params: ProblemParams) -> float:
    n, lam = params.n, params.lam
    return (1.0 - lam**n) / (n * (1.0 + lam ** (n - 1)))


def inner_dirichlet_value(params: ProblemParams) -> float:
    n, lam = params.n, params.lam
    if n == 2:
        return 0.5 * lam * math.log(lam) + 0.25 * (1.0 - lam * lam)
    return (
        lam * (lam ** (n - 2) - 1.0) / (n * (n - 2)) * (1.0 + lam) / (1.0 + lam ** (n - 1))
        + (1.0 - lam * lam) / (2 * n)
    )


def boundary_data(params: ProblemParams) -> tuple[float, float]:
    """Return ``(a, c)``: inner Dirichlet value and common Neumann constant."""
    return inner_dirichlet_value(params), neumann_constant(params)


def radial_solution(params: ProblemParams) -> RadialSolution:
    a, c = boundary_data(params)
    return RadialSolution(params, a, c)


def integration_constant(params: ProblemParams) -> float:
    """Constant ``C`` in u'(r) = C / r^(n-1) - r / n."""
    n, lam = params.n, params.lam
    return (1.0 + lam) / (n * (1.0 + lam ** (1 - n)))


def _check_radius(params: ProblemParams, r: float) -> float:
    r = float(r)
    if not (params.lam <= r <= 1.0):
        raise ValueError(f"radius {r!r} outside [{params.lam!r}, 1]")
    return r


def u_radial(params: ProblemParams, r: float) -> float:
    r = _check_radius(params, r)
    n, lam = params.n, params.lam
    if n == 2:
        return 0.5 * lam * math.log(r) + 0.25 * (1.0 - r * r)
    amp = lam ** (n - 1) / (n * (n - 2)) * (1.0 + lam) / (1.0 + lam ** (n - 1))
    return amp * (1.0 - r ** (2 - n)) + (1.0 - r * r) / (2 * n)


def u_radial_derivs(params: ProblemParams, r: float) -> tuple[float, float]:
    """First and second radial derivatives of the radial solution at ``r``."""
    r = _check_radius(params, r)
    n = params.n
    du = integration_constant(params) / r ** (n - 1) - r / n
    d2u = -1.0 - (n - 1) * du / r
    return du, d2u
