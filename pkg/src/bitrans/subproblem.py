"""One-sided solvers: particular solutions, source coefficients, evaluation.

Each interval problem is solved by the exact representation

    u(x) = (E1 - E2) a1 + (s1 E1 - s2 E2) a2
         + (E1 + E2) a3 + (s1 E1 + s2 E2) a4 + F(x),

with E1 = e^{s1 M}, E2 = e^{s2 M}, s1 = x - left end, s2 = right end - x.
The coefficients a1..a4 are affine in the interface values (psi1, psi2)
and in the boundary-source quadruple phi~1..phi~4; F is the particular
solution with homogeneous value and second-derivative conditions at both
interval ends. Everything here is linear in the data.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import lu_factor, lu_solve, solve_banded

from .errors import AnomalyError, DimensionMismatchError, ResolutionError
from .problem import SIDE_MINUS, SIDE_PLUS, CylinderGeometry, ModalForcing, check_side
from .section_operator import GeneratorM, OperatorMatrix, semigroup

# 4th-order one-sided 5-point first-derivative stencils (left end / right end).
_D1_LEFT = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
_ENDPOINT_TOL = 1e-10


@dataclass(frozen=True)
class SideOperators:
    """Operators a one-sided solve consumes for an interval of length delta.

    E = e^{delta M}, E2 = e^{2 delta M}, U = I - E2 + 2 delta M E and
    V = I - E2 - 2 delta M E, with cached LU factorizations of U and V.
    Both are provably invertible for the admissible operator class; a
    numerically singular factorization is reported as an anomaly.
    """

    generator: GeneratorM
    delta: float
    E: np.ndarray
    E2: np.ndarray
    U: OperatorMatrix
    V: OperatorMatrix
    lu_u: tuple
    lu_v: tuple
    cond_u: float
    cond_v: float

    @property
    def m(self) -> int:
        return self.generator.m

    def u_inv(self, rhs: np.ndarray) -> np.ndarray:
        return lu_solve(self.lu_u, rhs)

    def v_inv(self, rhs: np.ndarray) -> np.ndarray:
        return lu_solve(self.lu_v, rhs)

    def m_apply(self, vec: np.ndarray) -> np.ndarray:
        return self.generator.matrix @ vec


def build_side_operators(generator: GeneratorM, delta: float, side_tag: str = "") -> SideOperators:
    """Assemble E, U, V (with inverses) for one interval from semigroups."""
    e = semigroup(generator, delta).matrix
    e2 = semigroup(generator, 2.0 * delta).matrix
    me = generator.matrix @ e
    eye = np.eye(generator.m)
    u = eye - e2 + 2.0 * delta * me
    v = eye - e2 - 2.0 * delta * me
    try:
        lu_u = lu_factor(u)
        lu_v = lu_factor(v)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - structural guarantee
        raise AnomalyError(f"singular U/V factorization on side {side_tag!r}: {exc}") from exc
    cond_u = float(np.linalg.cond(u))
    cond_v = float(np.linalg.cond(v))
    if not (np.isfinite(cond_u) and np.isfinite(cond_v)):
        raise AnomalyError(
            f"U/V numerically singular on side {side_tag!r} "
            "(contradicts their bounded invertibility)"
        )
    return SideOperators(
        generator=generator, delta=delta, E=e, E2=e2,
        U=OperatorMatrix(u, tag=f"U_{side_tag}"), V=OperatorMatrix(v, tag=f"V_{side_tag}"),
        lu_u=lu_u, lu_v=lu_v, cond_u=cond_u, cond_v=cond_v,
    )


def _one_sided_derivative(field: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """4th-order one-sided first derivatives at both ends of (m, n) samples."""
    left = field[:, :5] @ _D1_LEFT / h
    right = -(field[:, -1:-6:-1] @ _D1_LEFT) / h
    return left, right


def _dirichlet_helmholtz(mu: float, h: float, rhs_interior: np.ndarray) -> np.ndarray:
    """Solve y'' + mu y = rhs on a uniform grid with y = 0 at both ends.

    mu < 0 makes the tridiagonal system (-2/h^2 + mu) diag, 1/h^2 off
    strictly diagonally dominant. Returns the full grid including the
    zero endpoints.
    """
    n_int = rhs_interior.size
    ab = np.zeros((3, n_int))
    ab[0, 1:] = 1.0 / h**2
    ab[1, :] = -2.0 / h**2 + mu
    ab[2, :-1] = 1.0 / h**2
    inner = solve_banded((1, 1), ab, rhs_interior)
    out = np.zeros(n_int + 2)
    out[1:-1] = inner
    return out


@dataclass(frozen=True)
class ParticularSolution:
    """Particular solution F of one interval with F = F'' = 0 at both ends.

    Stores the modal fields F and w = F'' + mu F on the interval grid,
    the endpoint first-derivative traces, and the third-derivative traces
    F''' = w' - mu F' (exact identity of the factorized problem). The
    ``error_estimate`` is the relative size of the Richardson correction,
    an observed bound for the remaining discretization error.
    """

    side: str
    geometry: CylinderGeometry
    grid: np.ndarray
    f_modal: np.ndarray
    w_modal: np.ndarray
    fprime_left: np.ndarray
    fprime_right: np.ndarray
    f3_left: np.ndarray
    f3_right: np.ndarray
    error_estimate: float

    def __post_init__(self):
        if np.max(np.abs(self.f_modal)) == 0.0 and np.max(np.abs(self.w_modal)) == 0.0:
            object.__setattr__(self, "_spline_f", None)
            object.__setattr__(self, "_spline_w", None)
        else:
            object.__setattr__(self, "_spline_f", CubicSpline(self.grid, self.f_modal, axis=1))
            object.__setattr__(self, "_spline_w", CubicSpline(self.grid, self.w_modal, axis=1))

    @property
    def m(self) -> int:
        return self.f_modal.shape[0]

    @property
    def fprime_interface(self) -> np.ndarray:
        """F' at the interface end (right of minus, left of plus)."""
        return self.fprime_right if self.side == SIDE_MINUS else self.fprime_left

    @property
    def f3_interface(self) -> np.ndarray:
        return self.f3_right if self.side == SIDE_MINUS else self.f3_left

    def term(self, xs: np.ndarray, order: int, mu: np.ndarray) -> np.ndarray:
        """Modal F-term of the given derivative order at the points ``xs``.

        Endpoint values use the stored traces exactly (orders 1, 3) or the
        built-in homogeneous conditions (orders 0, 2); interior values use
        cubic-spline interpolation of the modal samples.
        """
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        m = self.m
        out = np.zeros((m, xs.size))
        if self._spline_f is None:
            return out
        lo, hi = self.grid[0], self.grid[-1]
        tol = _ENDPOINT_TOL * (hi - lo)
        at_lo = np.abs(xs - lo) <= tol
        at_hi = np.abs(xs - hi) <= tol
        inner = ~(at_lo | at_hi)
        if order == 0:
            out[:, inner] = self._spline_f(xs[inner])
        elif order == 1:
            out[:, inner] = self._spline_f(xs[inner], 1)
            out[:, at_lo] = self.fprime_left[:, None]
            out[:, at_hi] = self.fprime_right[:, None]
        elif order == 2:
            out[:, inner] = (self._spline_w(xs[inner])
                             - mu[:, None] * self._spline_f(xs[inner]))
        elif order == 3:
            out[:, inner] = (self._spline_w(xs[inner], 1)
                             - mu[:, None] * self._spline_f(xs[inner], 1))
            out[:, at_lo] = self.f3_left[:, None]
            out[:, at_hi] = self.f3_right[:, None]
        else:
            raise ValueError(f"derivative order must be 0..3, got {order}")
        return out

    @classmethod
    def zero(cls, side: str, geometry: CylinderGeometry, m: int, n_x: int = 33):
        grid = geometry.grid(side, n_x)
        z = np.zeros((m, n_x))
        zm = np.zeros(m)
        return cls(side, geometry, grid, z, z.copy(), zm, zm.copy(),
                   zm.copy(), zm.copy(), 0.0)


def _solve_factorized(mu: np.ndarray, grid: np.ndarray, fhat: np.ndarray):
    """Two-stage Dirichlet solve of u'''' + 2 mu u'' + mu^2 u = fhat per mode."""
    h = grid[1] - grid[0]
    m, n = fhat.shape
    w = np.zeros((m, n))
    f = np.zeros((m, n))
    for j in range(m):
        w[j] = _dirichlet_helmholtz(mu[j], h, fhat[j, 1:-1])
        f[j] = _dirichlet_helmholtz(mu[j], h, w[j, 1:-1])
    return f, w


def solve_particular(
    operator_mu: np.ndarray,
    geometry: CylinderGeometry,
    side: str,
    forcing: ModalForcing,
    n_x: int = 129,
) -> ParticularSolution:
    """Solve the homogeneous-ends particular problem on one interval.

    Per mode mu the fourth-order equation factors as (d^2/dx^2 + mu)^2,
    giving two successive Dirichlet solves; both are coercive since
    mu < 0. Fields and traces are Richardson-extrapolated from the h and
    h/2 central-difference solutions; first-derivative traces use
    one-sided 4th-order stencils on the extrapolated fields and the
    third-derivative traces use F''' = w' - mu F'.

    Parameters
    ----------
    operator_mu : (m,) ndarray
        Eigenvalues of the section operator (the forcing is modal).
    """
    check_side(side)
    if n_x < 17:
        raise ResolutionError(f"particular solve needs n_x >= 17, got {n_x}")
    mu = np.asarray(operator_mu, dtype=float)
    grid_c = geometry.grid(side, n_x)
    grid_f = geometry.grid(side, 2 * n_x - 1)
    fhat_c = forcing.sample(side, grid_c)
    fhat_f = forcing.sample(side, grid_f)
    if fhat_c.shape[0] != mu.size:
        raise DimensionMismatchError(
            f"forcing has {fhat_c.shape[0]} modes, operator has {mu.size}"
        )
    f_c, w_c = _solve_factorized(mu, grid_c, fhat_c)
    f_f, w_f = _solve_factorized(mu, grid_f, fhat_f)
    corr_f = (f_f[:, ::2] - f_c) / 3.0
    f_x = f_f[:, ::2] + corr_f  # = (4 f_fine - f_coarse) / 3 on coarse nodes
    w_x = w_f[:, ::2] + (w_f[:, ::2] - w_c) / 3.0
    # Endpoint rows are exactly zero in both solves; keep them exact.
    f_x[:, 0] = 0.0
    f_x[:, -1] = 0.0
    w_x[:, 0] = 0.0
    w_x[:, -1] = 0.0
    h = grid_c[1] - grid_c[0]
    fp_l, fp_r = _one_sided_derivative(f_x, h)
    wp_l, wp_r = _one_sided_derivative(w_x, h)
    scale = 1.0 + np.max(np.abs(f_x))
    estimate = float(np.max(np.abs(corr_f)) / scale) if np.max(np.abs(fhat_c)) > 0 else 0.0
    return ParticularSolution(
        side=side, geometry=geometry, grid=grid_c,
        f_modal=f_x, w_modal=w_x,
        fprime_left=fp_l, fprime_right=fp_r,
        f3_left=wp_l - mu * fp_l, f3_right=wp_r - mu * fp_r,
        error_estimate=estimate,
    )


def _check_vectors(m: int, *vectors: np.ndarray) -> list[np.ndarray]:
    out = []
    for vec in vectors:
        arr = np.atleast_1d(np.asarray(vec, dtype=float))
        if arr.shape != (m,):
            raise DimensionMismatchError(f"expected vector of length {m}, got {arr.shape}")
        out.append(arr)
    return out


def phi_tilde_minus(ops: SideOperators, phi1, phi2, fprime_a, fprime_gamma):
    """Boundary-source quadruple of the minus interval."""
    phi1, phi2, fpa, fpg = _check_vectors(ops.m, phi1, phi2, fprime_a, fprime_gamma)
    c, e = ops.delta, ops.E
    mphi1 = ops.m_apply(phi1)
    pt1 = 0.5 * ops.u_inv(phi1 + e @ (phi1 + c * (mphi1 + phi2 - fpa - fpg)))
    pt2 = (-0.5 * ops.u_inv(mphi1 - phi2 + fpa + fpg)
           - 0.5 * ops.u_inv(e @ (mphi1 + phi2 - fpa - fpg)))
    pt3 = 0.5 * ops.v_inv(phi1 - e @ (phi1 + c * (mphi1 + phi2 - fpa + fpg)))
    pt4 = (-0.5 * ops.v_inv(mphi1 - phi2 + fpa - fpg)
           + 0.5 * ops.v_inv(e @ (mphi1 + phi2 - fpa + fpg)))
    return pt1, pt2, pt3, pt4


def phi_tilde_plus(ops: SideOperators, phi1, phi2, fprime_gamma, fprime_b):
    """Boundary-source quadruple of the plus interval (mirrored signs)."""
    phi1, phi2, fpg, fpb = _check_vectors(ops.m, phi1, phi2, fprime_gamma, fprime_b)
    d, e = ops.delta, ops.E
    mphi1 = ops.m_apply(phi1)
    pt1 = -0.5 * ops.u_inv(phi1 + e @ (phi1 + d * (mphi1 - phi2 + fpg + fpb)))
    pt2 = (0.5 * ops.u_inv(mphi1 + phi2 - fpg - fpb)
           + 0.5 * ops.u_inv(e @ (mphi1 - phi2 + fpg + fpb)))
    pt3 = 0.5 * ops.v_inv(phi1 - e @ (phi1 + d * (mphi1 - phi2 - fpg + fpb)))
    pt4 = (-0.5 * ops.v_inv(mphi1 + phi2 + fpg - fpb)
           + 0.5 * ops.v_inv(e @ (mphi1 - phi2 - fpg + fpb)))
    return pt1, pt2, pt3, pt4


def alphas_minus(ops: SideOperators, psi1, psi2, phi_tilde):
    """Representation coefficients of the minus interval."""
    psi1, psi2 = _check_vectors(ops.m, psi1, psi2)
    pt1, pt2, pt3, pt4 = phi_tilde
    c, e = ops.delta, ops.E
    mpsi1 = ops.m_apply(psi1)
    e_psi1 = e @ psi1
    e_psi2 = e @ psi2
    e_mpsi1 = e @ mpsi1
    a1 = -0.5 * ops.u_inv(psi1 + e_psi1 + c * e_mpsi1 - c * e_psi2) + pt1
    a2 = 0.5 * ops.u_inv(mpsi1 + e_mpsi1 + psi2 - e_psi2) + pt2
    a3 = 0.5 * ops.v_inv(psi1 - e_psi1 - c * e_mpsi1 + c * e_psi2) + pt3
    a4 = -0.5 * ops.v_inv(mpsi1 - e_mpsi1 + psi2 + e_psi2) + pt4
    return a1, a2, a3, a4


def alphas_plus(ops: SideOperators, psi1, psi2, phi_tilde):
    """Representation coefficients of the plus interval."""
    psi1, psi2 = _check_vectors(ops.m, psi1, psi2)
    pt1, pt2, pt3, pt4 = phi_tilde
    d, e = ops.delta, ops.E
    mpsi1 = ops.m_apply(psi1)
    e_psi1 = e @ psi1
    e_psi2 = e @ psi2
    e_mpsi1 = e @ mpsi1
    a1 = 0.5 * ops.u_inv(psi1 + e_psi1 + d * e_mpsi1 + d * e_psi2) + pt1
    a2 = -0.5 * ops.u_inv(mpsi1 + e_mpsi1 - psi2 + e_psi2) + pt2
    a3 = 0.5 * ops.v_inv(psi1 - e_psi1 - d * e_mpsi1 - d * e_psi2) + pt3
    a4 = -0.5 * ops.v_inv(mpsi1 - e_mpsi1 - psi2 - e_psi2) + pt4
    return a1, a2, a3, a4


@dataclass(frozen=True)
class SubproblemSolution:
    """Assembled one-sided solution: coefficients plus particular part.

    ``alphas`` are physical-basis section vectors; evaluation happens in
    the eigenbasis (the semigroup factors are diagonal there) and maps
    back, which is exact in x for the homogeneous part.
    """

    side: str
    geometry: CylinderGeometry
    generator: GeneratorM
    alphas: tuple
    particular: Optional[ParticularSolution] = None

    def __post_init__(self):
        m = self.generator.m
        _check_vectors(m, *self.alphas)
        if len(self.alphas) != 4:
            raise DimensionMismatchError("need exactly four coefficient vectors")
        check_side(self.side)

    def evaluate(self, x, order: int = 0) -> np.ndarray:
        """Field or derivative values at x (scalar -> (m,), array -> (m, k))."""
        if order not in (0, 1, 2, 3):
            raise ValueError(f"derivative order must be 0..3, got {order}")
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        lo, hi = self.geometry.interval(self.side)
        tol = 1e-10 * (hi - lo)
        if np.any(xs < lo - tol) or np.any(xs > hi + tol):
            raise ValueError(f"evaluation points outside [{lo}, {hi}] on side {self.side!r}")
        xs = np.clip(xs, lo, hi)
        q = self.generator.operator.eigenvectors
        gm = self.generator.eigenvalues[:, None]
        ah = [q.T @ a for a in self.alphas]
        s1 = (xs - lo)[None, :]
        s2 = (hi - xs)[None, :]
        e1 = np.exp(s1 * gm)
        e2 = np.exp(s2 * gm)
        a1, a2, a3, a4 = (a[:, None] for a in ah)
        if order == 0:
            hom = ((e1 - e2) * a1 + (s1 * e1 - s2 * e2) * a2
                   + (e1 + e2) * a3 + (s1 * e1 + s2 * e2) * a4)
        elif order == 1:
            hom = (gm * (e1 + e2) * a1
                   + ((1.0 + s1 * gm) * e1 + (1.0 + s2 * gm) * e2) * a2
                   + gm * (e1 - e2) * a3
                   + ((1.0 + s1 * gm) * e1 - (1.0 + s2 * gm) * e2) * a4)
        elif order == 2:
            hom = (gm**2 * (e1 - e2) * a1
                   + ((2.0 * gm + s1 * gm**2) * e1 - (2.0 * gm + s2 * gm**2) * e2) * a2
                   + gm**2 * (e1 + e2) * a3
                   + ((2.0 * gm + s1 * gm**2) * e1 + (2.0 * gm + s2 * gm**2) * e2) * a4)
        else:
            hom = (gm**3 * (e1 + e2) * a1
                   + ((3.0 * gm**2 + s1 * gm**3) * e1 + (3.0 * gm**2 + s2 * gm**3) * e2) * a2
                   + gm**3 * (e1 - e2) * a3
                   + ((3.0 * gm**2 + s1 * gm**3) * e1 - (3.0 * gm**2 + s2 * gm**3) * e2) * a4)
        if self.particular is not None:
            hom = hom + self.particular.term(xs, order, self.generator.operator.eigenvalues)
        out = q @ hom
        return out[:, 0] if np.isscalar(x) or np.ndim(x) == 0 else out
