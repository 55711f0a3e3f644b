"""Chebyshev-Fourier collocation for -Δu = 1 on perturbed annuli in the plane.

The domain ``lam + v1(θ) < |x| < 1 - v2(θ)`` is mapped onto ``[0, 1] x S^1``
by the linear radial blend ``r(s, θ) = R_in(θ) (1 - s) + R_out(θ) s``.
Boundary perturbations are cosine series, so every solution is even in θ.
The θ-grid is folded accordingly: half a period always, a quarter when
only even harmonics occur. The folded operator is exact on symmetric
functions and shrinks the dense solve by a factor of 8 to 64.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .radial import ProblemParams, boundary_data

ADMISSIBILITY_SAMPLES = 2048


@dataclass(frozen=True, eq=False)
class FourierPerturbation:
    """Boundary perturbation pair ``v_i(θ) = Σ_j coeffs_i[j] cos(stride·j·θ)``.

    ``stride = 2`` (the default) spans exactly the functions invariant under
    reflection in both coordinate axes. Other strides exist so single odd
    harmonics can be fed to the solver for validation.
    """

    coeffs1: np.ndarray
    coeffs2: np.ndarray
    stride: int = 2

    def __post_init__(self) -> None:
        c1 = np.atleast_1d(np.asarray(self.coeffs1, dtype=float)).copy()
        c2 = np.atleast_1d(np.asarray(self.coeffs2, dtype=float)).copy()
        if c1.ndim != 1 or c2.ndim != 1:
            raise ValueError("coefficient sequences must be one-dimensional")
        size = max(len(c1), len(c2))
        c1 = np.pad(c1, (0, size - len(c1)))
        c2 = np.pad(c2, (0, size - len(c2)))
        if not (np.all(np.isfinite(c1)) and np.all(np.isfinite(c2))):
            raise ValueError("coefficients must be finite")
        if int(self.stride) != self.stride or self.stride < 1:
            raise ValueError(f"stride must be a positive integer, got {self.stride!r}")
        c1.flags.writeable = False
        c2.flags.writeable = False
        object.__setattr__(self, "coeffs1", c1)
        object.__setattr__(self, "coeffs2", c2)
        object.__setattr__(self, "stride", int(self.stride))

    @classmethod
    def zero(cls, J: int = 0) -> FourierPerturbation:
        return cls(np.zeros(J + 1), np.zeros(J + 1))

    @property
    def modes(self) -> np.ndarray:
        return self.stride * np.arange(len(self.coeffs1))

    @property
    def is_g_invariant(self) -> bool:
        active = (self.coeffs1 != 0.0) | (self.coeffs2 != 0.0)
        return bool(np.all(self.modes[active] % 2 == 0))

    def evaluate(self, theta: np.ndarray, order: int = 0) -> tuple[np.ndarray, np.ndarray]:
        """``order``-th θ-derivative of (v1, v2) at ``theta``."""
        theta = np.asarray(theta, dtype=float)
        phase = np.outer(theta, self.modes)
        m = self.modes.astype(float)
        if order == 0:
            basis = np.cos(phase)
        elif order == 1:
            basis = -m * np.sin(phase)
        elif order == 2:
            basis = -(m**2) * np.cos(phase)
        else:
            raise ValueError("only derivatives up to order 2 are supported")
        return basis @ self.coeffs1, basis @ self.coeffs2

    def radii(self, lam: float, theta: np.ndarray, order: int = 0) -> tuple[np.ndarray, np.ndarray]:
        """Inner and outer boundary radii (or their θ-derivatives)."""
        v1, v2 = self.evaluate(theta, order)
        if order == 0:
            return lam + v1, 1.0 - v2
        return v1, -v2

    def check_admissible(self, lam: float, samples: int = ADMISSIBILITY_SAMPLES) -> None:
        theta = 2.0 * np.pi * np.arange(samples) / samples
        r_in, r_out = self.radii(lam, theta)
        if np.min(r_in) <= 0.0:
            raise ValueError("inadmissible perturbation: inner boundary reaches the origin")
        if np.min(r_out - r_in) <= 0.0:
            raise ValueError("inadmissible perturbation: boundary curves touch or cross")

    def scaled(self, factor: float) -> FourierPerturbation:
        return FourierPerturbation(factor * self.coeffs1, factor * self.coeffs2, self.stride)

    def __add__(self, other: FourierPerturbation) -> FourierPerturbation:
        if other.stride != self.stride:
            raise ValueError("cannot add perturbations with different strides")
        size = max(len(self.coeffs1), len(other.coeffs1))
        pad = lambda c: np.pad(c, (0, size - len(c)))  # noqa: E731
        return FourierPerturbation(
            pad(self.coeffs1) + pad(other.coeffs1),
            pad(self.coeffs2) + pad(other.coeffs2),
            self.stride,
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FourierPerturbation):
            return NotImplemented
        return (
            self.stride == other.stride
            and np.array_equal(self.coeffs1, other.coeffs1)
            and np.array_equal(self.coeffs2, other.coeffs2)
        )


def chebyshev_lobatto(N: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes cos(πj/N), j = 0..N, and the collocation differentiation matrix."""
    x = np.cos(np.pi * np.arange(N + 1) / N)
    c = np.ones(N + 1)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** np.arange(N + 1)
    dx = x[:, None] - x[None, :]
    D = np.outer(c, 1.0 / c) / (dx + np.eye(N + 1))
    D -= np.diag(D.sum(axis=1))
    return x, D


def fourier_matrices(N: int) -> tuple[np.ndarray, np.ndarray]:
    """First and second periodic differentiation matrices on 2πj/N (N even)."""
    h = 2.0 * np.pi / N
    j = np.arange(1, N)
    sign = (-1.0) ** j
    col1 = np.concatenate([[0.0], 0.5 * sign / np.tan(0.5 * j * h)])
    col2 = np.concatenate([[-np.pi**2 / (3.0 * h * h) - 1.0 / 6.0], -0.5 * sign / np.sin(0.5 * j * h) ** 2])
    return scipy.linalg.circulant(col1), scipy.linalg.circulant(col2)


def _fold(Nt: int, quarter: bool) -> tuple[np.ndarray, np.ndarray]:
    """Representative node indices and the expansion matrix (full = P @ reduced)."""
    j = np.arange(Nt)
    rep = np.minimum(j, Nt - j)
    if quarter:
        half = Nt // 2
        rep = np.minimum(rep, half - rep)
    red = np.unique(rep)
    P = np.zeros((Nt, len(red)))
    P[j, np.searchsorted(red, rep)] = 1.0
    return red, P


@dataclass(frozen=True, eq=False)
class MappedAnnulusGrid:
    lam: float
    perturbation: FourierPerturbation
    Nr: int
    Nt: int
    quarter: bool
    s: np.ndarray = field(repr=False)
    theta: np.ndarray = field(repr=False)
    reduced: np.ndarray = field(repr=False)
    expand: np.ndarray = field(repr=False)
    Ds: np.ndarray = field(repr=False)
    Dss: np.ndarray = field(repr=False)
    Dt: np.ndarray = field(repr=False)
    Dtt: np.ndarray = field(repr=False)
    r: np.ndarray = field(repr=False)
    H: np.ndarray = field(repr=False)
    g: np.ndarray = field(repr=False)
    coef_ss: np.ndarray = field(repr=False)
    coef_s: np.ndarray = field(repr=False)
    coef_st: np.ndarray = field(repr=False)
    coef_tt: np.ndarray = field(repr=False)

    @property
    def theta_reduced(self) -> np.ndarray:
        return self.theta[self.reduced]

    def to_full(self, values: np.ndarray) -> np.ndarray:
        """Expand values on reduced θ-nodes (last axis) to the full circle."""
        return values @ self.expand.T

    def jacobian(self) -> np.ndarray:
        """dr/ds at every node; positive on an admissible grid."""
        return np.broadcast_to(self.H, self.r.shape)


def build_grid(
    lam: float, perturbation: FourierPerturbation | None = None, Nr: int = 32, Nt: int = 64
) -> MappedAnnulusGrid:
    lam = ProblemParams(2, lam).lam
    if perturbation is None:
        perturbation = FourierPerturbation.zero()
    if Nr < 8 or Nt < 8 or Nt % 2:
        raise ValueError(f"need Nr >= 8 and even Nt >= 8, got Nr={Nr}, Nt={Nt}")
    perturbation.check_admissible(lam)

    x, D = chebyshev_lobatto(Nr - 1)
    s = 0.5 * (1.0 - x)
    Ds = -2.0 * D
    Dss = Ds @ Ds

    quarter = perturbation.is_g_invariant and Nt % 4 == 0
    theta = 2.0 * np.pi * np.arange(Nt) / Nt
    reduced, P = _fold(Nt, quarter)
    F1, F2 = fourier_matrices(Nt)
    Dt = F1[reduced] @ P
    Dtt = F2[reduced] @ P

    th = theta[reduced]
    ri, ro = perturbation.radii(lam, th)
    ri1, ro1 = perturbation.radii(lam, th, 1)
    ri2, ro2 = perturbation.radii(lam, th, 2)
    H, H1, H2 = ro - ri, ro1 - ri1, ro2 - ri2
    S = s[:, None]
    r = ri + S * H
    g = -(ri1 + S * H1) / H
    g_s = -H1 / H
    g_t = -(ri2 + S * H2) / H + (ri1 + S * H1) * H1 / H**2
    r2 = r * r
    coef_ss = 1.0 / H**2 + g * g / r2
    coef_s = 1.0 / (r * H) + (g_t + g * g_s) / r2
    coef_st = 2.0 * g / r2
    coef_tt = 1.0 / r2
    return MappedAnnulusGrid(
        lam, perturbation, Nr, Nt, quarter, s, theta, reduced, P, Ds, Dss, Dt, Dtt,
        r, np.broadcast_to(H, r.shape), g, coef_ss, coef_s, coef_st, coef_tt,
    )


class Trace(NamedTuple):
    """A function on the circle: samples at 2πj/Nt and its cosine coefficients."""

    theta: np.ndarray
    values: np.ndarray
    coeffs: np.ndarray


def cosine_coefficients(values: np.ndarray) -> np.ndarray:
    """Coefficients a_j with f(θ) = Σ a_j cos(jθ) for samples of an even function."""
    values = np.asarray(values, dtype=float)
    N = values.shape[-1]
    spec = np.fft.rfft(values, axis=-1).real / N
    spec[..., 1:] *= 2.0
    if N % 2 == 0:
        spec[..., -1] *= 0.5
    return spec


def _trace(theta: np.ndarray, values: np.ndarray) -> Trace:
    return Trace(theta, values, cosine_coefficients(values))


@dataclass(frozen=True, eq=False)
class DirichletSolution:
    grid: MappedAnnulusGrid
    a: float
    u: np.ndarray = field(repr=False)
    residual: float
    inner: Trace = field(repr=False)
    outer: Trace = field(repr=False)

    @property
    def u_full(self) -> np.ndarray:
        return self.grid.to_full(self.u)


def _laplacian(grid: MappedAnnulusGrid) -> np.ndarray:
    Ir = np.eye(grid.Nr)
    It = np.eye(len(grid.reduced))
    op = grid.coef_ss.reshape(-1, 1) * np.kron(grid.Dss, It)
    op += grid.coef_s.reshape(-1, 1) * np.kron(grid.Ds, It)
    op += grid.coef_st.reshape(-1, 1) * np.kron(grid.Ds, grid.Dt)
    op += grid.coef_tt.reshape(-1, 1) * np.kron(Ir, grid.Dtt)
    return op


def _gradients(grid: MappedAnnulusGrid, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Polar gradient components (∂_r u, r^-1 ∂_θ u at fixed r)."""
    u_s = grid.Ds @ u
    u_t = u @ grid.Dt.T
    return u_s / grid.H, (u_t + grid.g * u_s) / grid.r


def gradient_magnitude(sol: DirichletSolution) -> np.ndarray:
    """|∇u| at all collocation nodes (reduced θ-grid)."""
    gr, gt = _gradients(sol.grid, sol.u)
    return np.hypot(gr, gt)


def solve_dirichlet(grid: MappedAnnulusGrid, a: float) -> DirichletSolution:
    """Solve -Δu = 1 with u = a on the inner curve and u = 0 on the outer one."""
    Nr, Nred = grid.Nr, len(grid.reduced)
    op = _laplacian(grid)
    rhs = -np.ones(Nr * Nred)
    interior_op = op.copy()
    inner_rows = np.arange(Nred)
    outer_rows = (Nr - 1) * Nred + np.arange(Nred)
    for rows, value in ((inner_rows, a), (outer_rows, 0.0)):
        op[rows] = 0.0
        op[rows, rows] = 1.0
        rhs[rows] = value
    try:
        u = scipy.linalg.solve(op, rhs, check_finite=False)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise RuntimeError(f"collocation system is singular: {exc}") from exc
    res = interior_op @ u + 1.0
    residual = float(np.max(np.abs(res.reshape(Nr, Nred)[1:-1])))
    u = u.reshape(Nr, Nred)

    gr, gt = _gradients(grid, u)
    # inner normal is +∇s/|∇s| on the inner curve and -∇s/|∇s| on the outer one
    ns_r, ns_t = 1.0 / grid.H, grid.g / grid.r
    ns = np.hypot(ns_r, ns_t)
    dnu = (gr * ns_r + gt * ns_t) / ns
    inner = grid.to_full(dnu[0])
    outer = grid.to_full(-dnu[-1])
    return DirichletSolution(
        grid, float(a), u, residual, _trace(grid.theta, inner), _trace(grid.theta, outer)
    )


def normal_derivative_traces(sol: DirichletSolution) -> tuple[Trace, Trace]:
    """Inner-normal derivative of ``u`` on the inner and on the outer boundary curve."""
    return sol.inner, sol.outer


def evaluate_F(
    lam: float, perturbation: FourierPerturbation | None = None, Nr: int = 32, Nt: int = 64
) -> tuple[Trace, Trace]:
    """Normalized deviations (∂_ν u - c_λ)/c_λ on the inner and outer curves."""
    a, c = boundary_data(ProblemParams(2, lam))
    sol = solve_dirichlet(build_grid(lam, perturbation, Nr, Nt), a)
    f1 = (sol.inner.values - c) / c
    f2 = (sol.outer.values - c) / c
    return _trace(sol.grid.theta, f1), _trace(sol.grid.theta, f2)


def normalized_harmonic(m: int, theta: np.ndarray) -> np.ndarray:
    """cos(mθ) scaled to unit L² norm on the circle."""
    scale = 1.0 / math.sqrt(2.0 * math.pi) if m == 0 else 1.0 / math.sqrt(math.pi)
    return scale * np.cos(m * np.asarray(theta))


def single_mode(m: int, amp1: float, amp2: float) -> FourierPerturbation:
    """Perturbation (amp1·Ȳ_m, amp2·Ȳ_m) with Ȳ_m the unit-norm cos(mθ)."""
    if m == 0:
        y0 = 1.0 / math.sqrt(2.0 * math.pi)
        return FourierPerturbation([amp1 * y0], [amp2 * y0], stride=1)
    y0 = 1.0 / math.sqrt(math.pi)
    return FourierPerturbation([0.0, amp1 * y0], [0.0, amp2 * y0], stride=m)


def directional_response(
    lam: float, m: int, direction: int, h: float = 1e-5, Nr: int = 32, Nt: int = 64
) -> tuple[np.ndarray, np.ndarray]:
    """Central difference of F along basis vector ``direction`` (1 or 2) of mode m."""
    if direction not in (1, 2):
        raise ValueError("direction must be 1 or 2")
    amp = (lam**-0.5, 0.0) if direction == 1 else (0.0, 1.0)
    plus = evaluate_F(lam, single_mode(m, h * amp[0], h * amp[1]), Nr, Nt)
    minus = evaluate_F(lam, single_mode(m, -h * amp[0], -h * amp[1]), Nr, Nt)
    d1 = (plus[0].values - minus[0].values) / (2.0 * h)
    d2 = (plus[1].values - minus[1].values) / (2.0 * h)
    return d1, d2


def linearization_fd(
    lam: float, m: int, h: float = 1e-5, Nr: int = 32, Nt: int = 64
) -> np.ndarray:
    """Finite-difference matrix of the linearization on the degree-m subspace.

    Columns are responses to e1 = (lam^-1/2 Ȳ_m, 0) and e2 = (0, Ȳ_m); rows are
    their coordinates in the same basis under the weighted pairing
    <w, z> = lam ∫ w1 z1 + ∫ w2 z2.
    """
    if int(m) != m or m < 0:
        raise ValueError(f"mode must be a nonnegative integer, got {m!r}")
    m = int(m)
    theta = 2.0 * np.pi * np.arange(Nt) / Nt
    y = normalized_harmonic(m, theta)
    dtheta = 2.0 * np.pi / Nt
    out = np.empty((2, 2))
    for col in (1, 2):
        d1, d2 = directional_response(lam, m, col, h, Nr, Nt)
        out[0, col - 1] = math.sqrt(lam) * dtheta * float(d1 @ y)
        out[1, col - 1] = dtheta * float(d2 @ y)
    return out


def weighted_inner(lam: float, w: Sequence[np.ndarray], z: Sequence[np.ndarray], Nt: int) -> float:
    """<w, z>_lam = lam ∫ w1 z1 dθ + ∫ w2 z2 dθ for samples on 2πj/Nt."""
    dtheta = 2.0 * np.pi / Nt
    return dtheta * (lam * float(np.dot(w[0], z[0])) + float(np.dot(w[1], z[1])))
