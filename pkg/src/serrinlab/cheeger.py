"""Perimeter, area and the self-Cheeger identity P/|Ω| = 1/c for planar domains."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._fmt import fmt
from .collocation import (
    DirichletSolution,
    FourierPerturbation,
    build_grid,
    gradient_magnitude,
    solve_dirichlet,
)


@dataclass(frozen=True)
class DomainGeometry:
    perimeter: float
    area: float
    inner_length: float
    outer_length: float


def perimeter_area(
    lam: float, perturbation: FourierPerturbation | None = None, nodes: int = 256
) -> DomainGeometry:
    """Curve lengths and enclosed area by the trapezoidal rule in θ.

    Both integrands are smooth and periodic, so the rule converges spectrally.
    """
    if perturbation is None:
        perturbation = FourierPerturbation.zero()
    perturbation.check_admissible(lam)
    theta = 2.0 * np.pi * np.arange(nodes) / nodes
    dtheta = 2.0 * np.pi / nodes
    r_in, r_out = perturbation.radii(lam, theta)
    d_in, d_out = perturbation.radii(lam, theta, 1)
    inner = dtheta * float(np.sum(np.hypot(r_in, d_in)))
    outer = dtheta * float(np.sum(np.hypot(r_out, d_out)))
    area = 0.5 * dtheta * float(np.sum(r_out**2 - r_in**2))
    return DomainGeometry(inner + outer, area, inner, outer)


def _arc_density(sol: DirichletSolution) -> tuple[np.ndarray, np.ndarray]:
    """|γ'(θ)| of the inner and outer curve at the trace nodes."""
    theta = sol.inner.theta
    pert = sol.grid.perturbation
    r_in, r_out = pert.radii(sol.grid.lam, theta)
    d_in, d_out = pert.radii(sol.grid.lam, theta, 1)
    return np.hypot(r_in, d_in), np.hypot(r_out, d_out)


C_SOURCES = ("pooled", "inner", "outer")


def measured_neumann_constant(sol: DirichletSolution, source: str = "pooled") -> float:
    """Arc-length mean of the inner-normal derivative over the chosen boundary part.

    ``pooled`` averages over the whole boundary, so by the divergence theorem
    it equals |Ω|/P up to discretization error on every domain. The single
    component means agree with it only when the overdetermined condition holds.
    """
    ds_in, ds_out = _arc_density(sol)
    flux_in = float(np.sum(sol.inner.values * ds_in))
    flux_out = float(np.sum(sol.outer.values * ds_out))
    len_in, len_out = float(np.sum(ds_in)), float(np.sum(ds_out))
    if source == "pooled":
        return (flux_in + flux_out) / (len_in + len_out)
    if source == "inner":
        return flux_in / len_in
    if source == "outer":
        return flux_out / len_out
    raise ValueError(f"c source must be one of {C_SOURCES}, got {source!r}")


def pooled_neumann_constant(sol: DirichletSolution) -> float:
    return measured_neumann_constant(sol, "pooled")


@dataclass(frozen=True)
class GradientReport:
    grad_max_interior: float
    grad_max_boundary: float
    c: float
    grad_bound_ok: bool


def gradient_bound_check(sol: DirichletSolution, c: float) -> GradientReport:
    """Largest |∇u| over interior nodes, flagged when strictly below ``c``."""
    if not c > 0:
        raise ValueError(f"Neumann constant must be positive, got {c!r}")
    grad = gradient_magnitude(sol)
    interior = float(np.max(grad[1:-1]))
    boundary = float(max(np.max(grad[0]), np.max(grad[-1])))
    return GradientReport(interior, boundary, float(c), interior < c)


@dataclass(frozen=True)
class CheegerReport:
    perimeter: float
    area: float
    ratio: float
    inv_c: float
    gap_abs: float
    gap_rel: float
    div_gap: float
    grad_max_interior: float
    grad_bound_ok: bool

    def as_dict(self) -> dict:
        return {
            "perimeter": fmt(self.perimeter),
            "area": fmt(self.area),
            "ratio": fmt(self.ratio),
            "inv_c": fmt(self.inv_c),
            "gap_abs": fmt(self.gap_abs),
            "gap_rel": fmt(self.gap_rel),
            "div_gap": fmt(self.div_gap),
            "grad_max_interior": fmt(self.grad_max_interior),
            "grad_bound_ok": self.grad_bound_ok,
        }


def domain_cheeger_report(
    lam: float,
    perturbation: FourierPerturbation | None,
    a: float,
    Nr: int = 32,
    Nt: int = 64,
    c: float | None = None,
    nodes: int = 256,
    c_source: str = "pooled",
) -> CheegerReport:
    """Compare P/|Ω| with 1/c on a solved domain; ``c`` defaults to the measured constant."""
    sol = solve_dirichlet(build_grid(lam, perturbation, Nr, Nt), a)
    if c is None:
        c = measured_neumann_constant(sol, c_source)
    geom = perimeter_area(lam, perturbation, nodes)
    ratio = geom.perimeter / geom.area
    gap = abs(ratio - 1.0 / c)
    grad = gradient_bound_check(sol, c)
    return CheegerReport(
        geom.perimeter,
        geom.area,
        ratio,
        1.0 / c,
        gap,
        gap * c,
        abs(geom.area - c * geom.perimeter),
        grad.grad_max_interior,
        grad.grad_bound_ok,
    )


def cheeger_report(point, nodes: int = 256, c_source: str = "pooled") -> CheegerReport:
    """Self-Cheeger audit of a branch point (the trivial point included)."""
    return domain_cheeger_report(
        point.lambda_s,
        point.v,
        point.inner_dirichlet,
        point.Nr,
        point.Nt,
        nodes=nodes,
        c_source=c_source,
    )
