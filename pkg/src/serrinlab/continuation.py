"""Newton continuation of the bifurcating branch v(s) = s (z + w(s)) in the plane.

At fixed amplitude ``s`` the unknowns are the inner radius λ and the cosine
coefficients of the correction ``w``. The orthogonality <w, z>_{λ*} = 0 is
built into the parametrization, so it holds to rounding. The equations are
the cosine coefficients of F on the retained modes, divided by ``s``.
"""

from __future__ import annotations

import json
import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np

from ._fmt import fmt
from .bifurcation import find_lambda_star
from .collocation import (
    FourierPerturbation,
    build_grid,
    evaluate_F,
    gradient_magnitude,
    solve_dirichlet,
)
from .modes import eigen_direct, mode_matrix
from .radial import ProblemParams, boundary_data

log = logging.getLogger(__name__)

DEFAULT_J = 8


class ContinuationError(RuntimeError):
    """Newton failed to converge; ``last`` holds the final iterate's residual."""

    def __init__(self, message: str, last_residual: float = math.nan):
        super().__init__(message)
        self.last_residual = last_residual


@dataclass(frozen=True)
class Tangent:
    """Kernel direction z = a e1 + b e2 of the linearization at λ*."""

    degree: int
    lambda_star: float
    a: float
    b: float
    kernel_residual: float

    @property
    def index(self) -> int:
        """Position of the degree in the cos(2jθ) coefficient list."""
        return self.degree // 2

    def perturbation(self, J: int) -> FourierPerturbation:
        c1 = np.zeros(J + 1)
        c2 = np.zeros(J + 1)
        c1[self.index] = self.a / math.sqrt(self.lambda_star * math.pi)
        c2[self.index] = self.b / math.sqrt(math.pi)
        return FourierPerturbation(c1, c2)

    def weighted_norm(self) -> float:
        return weighted_norm(self.lambda_star, self.perturbation(self.index))


def _require_even_degree(m: int) -> int:
    if int(m) != m or m < 2 or m % 2:
        raise ValueError(f"branch degree must be an even integer >= 2, got {m!r}")
    return int(m)


def tangent_vector(lambda_star: float, m: int, n: int = 2) -> Tangent:
    """Unit kernel vector of M_{λ*, m}, first entry positive."""
    if n != 2:
        raise ValueError("branch computations are implemented for n = 2 only")
    m = _require_even_degree(m)
    mat = mode_matrix(ProblemParams(2, lambda_star), m)
    pair = eigen_direct(mat)
    if abs(pair.mu1) > 1e-8:
        raise ValueError(
            f"lambda_star={lambda_star!r} is not a bifurcation value for degree {m}: "
            f"mu1={pair.mu1:.3g}"
        )
    a, b = pair.v1
    res = float(np.max(np.abs(mat.as_array() @ np.array([a, b]))))
    return Tangent(m, float(lambda_star), a, b, res)


def _weighted_pair_inner(lam: float, p: FourierPerturbation, q: FourierPerturbation) -> float:
    """<p, q>_lam for two stride-2 cosine perturbations (exact, via orthogonality)."""
    size = max(len(p.coeffs1), len(q.coeffs1))
    pad = lambda c: np.pad(c, (0, size - len(c)))  # noqa: E731
    weights = np.full(size, math.pi)
    weights[0] = 2.0 * math.pi
    return float(
        lam * np.sum(weights * pad(p.coeffs1) * pad(q.coeffs1))
        + np.sum(weights * pad(p.coeffs2) * pad(q.coeffs2))
    )


def weighted_norm(lam: float, p: FourierPerturbation) -> float:
    return math.sqrt(_weighted_pair_inner(lam, p, p))


@dataclass(frozen=True, eq=False)
class BranchPoint:
    s: float
    lambda_s: float
    w: FourierPerturbation
    residual_sup: float
    neumann_constant: float
    inner_dirichlet: float
    tangent: Tangent
    Nr: int
    Nt: int
    iterations: int = 0

    @property
    def v(self) -> FourierPerturbation:
        """Full boundary perturbation s (z + w)."""
        return (self.tangent.perturbation(len(self.w.coeffs1) - 1) + self.w).scaled(self.s)

    @property
    def orthogonality(self) -> float:
        J = len(self.w.coeffs1) - 1
        return _weighted_pair_inner(self.tangent.lambda_star, self.w, self.tangent.perturbation(J))

    def to_record(self) -> dict:
        return {
            "s": fmt(self.s),
            "degree": self.tangent.degree,
            "lambda_star": fmt(self.tangent.lambda_star),
            "lambda": fmt(self.lambda_s),
            "tangent": [fmt(self.tangent.a), fmt(self.tangent.b)],
            "w1": [fmt(x) for x in self.w.coeffs1],
            "w2": [fmt(x) for x in self.w.coeffs2],
            "v1": [fmt(x) for x in self.v.coeffs1],
            "v2": [fmt(x) for x in self.v.coeffs2],
            "residual_sup": fmt(self.residual_sup),
            "neumann_constant": fmt(self.neumann_constant),
            "inner_dirichlet": fmt(self.inner_dirichlet),
            "orthogonality": fmt(self.orthogonality),
            "Nr": self.Nr,
            "Nt": self.Nt,
            "iterations": self.iterations,
        }


class _BranchSystem:
    """Square nonlinear system in x = (λ, t, p_j (j≠i), q_j (j≠i))."""

    def __init__(self, tangent: Tangent, s: float, J: int, Nr: int, Nt: int):
        if J < tangent.index + 1:
            raise ValueError(f"J={J} too small for degree {tangent.degree}")
        self.tangent, self.s, self.J, self.Nr, self.Nt = tangent, s, J, Nr, Nt
        self.z = tangent.perturbation(J)
        self.free = [j for j in range(J + 1) if j != tangent.index]
        # unit direction in (p_i, q_i) orthogonal to the kernel vector
        ortho = np.array([-tangent.b, tangent.a * math.sqrt(tangent.lambda_star)])
        self.ortho = ortho / np.linalg.norm(ortho)
        self.size = 2 * (J + 1)

    def unpack(self, x: np.ndarray) -> tuple[float, FourierPerturbation]:
        lam, t = x[0], x[1]
        nf = len(self.free)
        p = np.zeros(self.J + 1)
        q = np.zeros(self.J + 1)
        p[self.free] = x[2 : 2 + nf]
        q[self.free] = x[2 + nf :]
        i = self.tangent.index
        p[i], q[i] = t * self.ortho
        return float(lam), FourierPerturbation(p, q)

    def pack(self, lam: float, w: FourierPerturbation) -> np.ndarray:
        p = np.pad(w.coeffs1, (0, self.J + 1 - len(w.coeffs1)))[: self.J + 1]
        q = np.pad(w.coeffs2, (0, self.J + 1 - len(w.coeffs2)))[: self.J + 1]
        i = self.tangent.index
        t = float(np.dot([p[i], q[i]], self.ortho))
        return np.concatenate([[lam, t], p[self.free], q[self.free]])

    def residual(self, x: np.ndarray) -> tuple[np.ndarray, float]:
        """Scaled Galerkin residual and sup |F| over the θ-grid."""
        lam, w = self.unpack(x)
        v = (self.z + w).scaled(self.s)
        f1, f2 = evaluate_F(lam, v, self.Nr, self.Nt)
        idx = 2 * np.arange(self.J + 1)
        res = np.concatenate([f1.coeffs[idx], f2.coeffs[idx]]) / self.s
        sup = float(max(np.max(np.abs(f1.values)), np.max(np.abs(f2.values))))
        return res, sup


def _measured_constant(lam: float, v: FourierPerturbation, Nr: int, Nt: int) -> float:
    from .cheeger import pooled_neumann_constant

    a, _ = boundary_data(ProblemParams(2, lam))
    sol = solve_dirichlet(build_grid(lam, v, Nr, Nt), a)
    return pooled_neumann_constant(sol)


def trivial_point(tangent: Tangent, J: int = DEFAULT_J, Nr: int = 32, Nt: int = 64) -> BranchPoint:
    lam = tangent.lambda_star
    f1, f2 = evaluate_F(lam, None, Nr, Nt)
    sup = float(max(np.max(np.abs(f1.values)), np.max(np.abs(f2.values))))
    a, _ = boundary_data(ProblemParams(2, lam))
    c = _measured_constant(lam, FourierPerturbation.zero(J), Nr, Nt)
    return BranchPoint(0.0, lam, FourierPerturbation.zero(J), sup, c, a, tangent, Nr, Nt)


def newton_solve_branch_point(
    m: int,
    s: float,
    init: BranchPoint | None = None,
    Nr: int = 32,
    Nt: int = 64,
    J: int = DEFAULT_J,
    tol: float = 1e-8,
    max_iter: int = 25,
    tangent: Tangent | None = None,
) -> BranchPoint:
    """Solve F_λ(s (z + w)) = 0 for (w, λ) by damped Newton with an FD Jacobian."""
    m = _require_even_degree(m)
    if tangent is None:
        tangent = init.tangent if init is not None else tangent_vector(find_lambda_star(2, m).lambda_star, m)
    if s == 0.0:
        return trivial_point(tangent, J, Nr, Nt)
    limit = 0.05 * (1.0 - tangent.lambda_star)
    if abs(s) > limit:
        log.warning("amplitude |s|=%g exceeds the small-amplitude bound %g", abs(s), limit)
    system = _BranchSystem(tangent, float(s), J, Nr, Nt)
    if init is None:
        x = system.pack(tangent.lambda_star, FourierPerturbation.zero(J))
    else:
        x = system.pack(init.lambda_s, init.w)

    res, sup = system.residual(x)
    norm = float(np.linalg.norm(res))
    step = 1e-7
    for it in range(1, max_iter + 1):
        if sup < tol:
            return _finish(system, x, sup, it - 1)
        jac = np.empty((system.size, system.size))
        for col in range(system.size):
            xp = x.copy()
            xp[col] += step
            jac[:, col] = (system.residual(xp)[0] - res) / step
        try:
            dx = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError as exc:
            raise ContinuationError(f"singular Newton Jacobian at s={s}", sup) from exc
        damping = 1.0
        for _ in range(12):
            trial = x + damping * dx
            try:
                t_res, t_sup = system.residual(trial)
            except ValueError:
                damping *= 0.5
                continue
            t_norm = float(np.linalg.norm(t_res))
            if t_norm < norm or damping < 1e-3:
                break
            damping *= 0.5
        else:
            raise ContinuationError(f"no admissible Newton step at s={s}", sup)
        x, res, sup, norm = trial, t_res, t_sup, t_norm
        log.debug("s=%g it=%d damping=%g sup|F|=%.3e", s, it, damping, sup)
    if sup < tol:
        return _finish(system, x, sup, max_iter)
    raise ContinuationError(f"Newton did not converge at s={s}: sup|F|={sup:.3e}", sup)


def _finish(system: _BranchSystem, x: np.ndarray, sup: float, iterations: int) -> BranchPoint:
    lam, w = system.unpack(x)
    v = (system.z + w).scaled(system.s)
    a, _ = boundary_data(ProblemParams(2, lam))
    c = _measured_constant(lam, v, system.Nr, system.Nt)
    return BranchPoint(
        system.s, lam, w, sup, c, a, system.tangent, system.Nr, system.Nt, iterations
    )


@dataclass
class BranchResult:
    points: list[BranchPoint] = field(default_factory=list)
    error: str | None = None

    @property
    def complete(self) -> bool:
        return self.error is None


def continue_branch(
    m: int,
    s_list: Sequence[float],
    Nr: int = 32,
    Nt: int = 64,
    J: int = DEFAULT_J,
    tol: float = 1e-8,
) -> BranchResult:
    """Warm-started branch points for each amplitude, in order of increasing |s|.

    Stops at the first failure and returns the converged prefix with the
    diagnostic in ``error``.
    """
    m = _require_even_degree(m)
    order = sorted(s_list, key=lambda v: (abs(v), v < 0))
    tangent = tangent_vector(find_lambda_star(2, m).lambda_star, m)
    result = BranchResult()
    last: dict[bool, BranchPoint] = {}
    for s in order:
        init = last.get(s < 0)
        try:
            point = newton_solve_branch_point(m, s, init, Nr, Nt, J, tol, tangent=tangent)
        except (ContinuationError, ValueError, RuntimeError) as exc:
            result.error = f"s={s}: {exc}"
            break
        result.points.append(point)
        if s != 0.0:
            last[s < 0] = point
    return result


@dataclass(frozen=True)
class OverdeterminedReport:
    inner_mean: float
    inner_max_dev: float
    outer_mean: float
    outer_max_dev: float
    c: float
    joint_max_dev: float
    inner_dirichlet: float
    u_min_interior: float
    positive: bool
    mode_coefficient: float
    nontrivial: bool
    grad_max_interior: float

    def as_dict(self) -> dict:
        return {k: (fmt(v) if isinstance(v, float) else v) for k, v in self.__dict__.items()}


def verify_overdetermined(point: BranchPoint) -> OverdeterminedReport:
    """Re-solve the Dirichlet problem on the point's domain and audit both traces."""
    from .cheeger import pooled_neumann_constant

    v = point.v
    sol = solve_dirichlet(build_grid(point.lambda_s, v, point.Nr, point.Nt), point.inner_dirichlet)
    tin, tout = sol.inner.values, sol.outer.values
    c = pooled_neumann_constant(sol)
    joint = float(max(np.max(np.abs(tin - c)), np.max(np.abs(tout - c))))
    u_min = float(np.min(sol.u[1:-1]))
    i = point.tangent.index
    # index i >= 1, so a nonzero coefficient there makes v non-constant
    coef = float(max(abs(v.coeffs1[i]), abs(v.coeffs2[i])))
    grad = gradient_magnitude(sol)
    return OverdeterminedReport(
        float(np.mean(tin)),
        float(np.max(np.abs(tin - np.mean(tin)))),
        float(np.mean(tout)),
        float(np.max(np.abs(tout - np.mean(tout)))),
        c,
        joint,
        point.inner_dirichlet,
        u_min,
        u_min > 0.0,
        coef,
        coef > 0.0,
        float(np.max(grad[1:-1])),
    )


def boundary_curves(point: BranchPoint, samples: int = 256) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    theta = 2.0 * np.pi * np.arange(samples) / samples
    r_in, r_out = point.v.radii(point.lambda_s, theta)
    return theta, r_in, r_out


def write_curves_csv(point: BranchPoint, stream: TextIO, samples: int = 256) -> None:
    theta, r_in, r_out = boundary_curves(point, samples)
    stream.write("theta,r_inner,r_outer\n")
    for row in zip(theta, r_in, r_out):
        stream.write(",".join(fmt(x) for x in row) + "\n")


def write_jsonl(records: Iterable[dict], stream: TextIO) -> None:
    for rec in records:
        stream.write(json.dumps(rec, sort_keys=True) + "\n")
