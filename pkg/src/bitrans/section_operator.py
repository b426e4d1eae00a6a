"""Finite-dimensional section operator and its spectral calculus.

The section operator A is a symmetric negative-definite m x m matrix; it
stands in for the cross-section diffusion operator of the transmission
problem. Every operator-valued object downstream (the square-root
generator M = -sqrt(-A), the semigroups e^{tM}, the interface blocks) is
a function of A evaluated through a single shared eigendecomposition, so
all such operators commute to rounding by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import (
    EvaluationError,
    HypothesisViolationError,
    InvalidGeometryError,
    SymmetryError,
)

# Construction-time tolerances; every downstream budget assumes these floors.
ORTHONORMALITY_TOL = 1e-12
RECONSTRUCTION_TOL = 1e-10
SYMMETRY_TOL = 1e-12
NEGATIVITY_TOL = 1e-12


def _fix_eigenvector_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip column signs so the first significant component is positive.

    Makes the decomposition reproducible across LAPACK builds; modal CSV
    output depends on this convention.
    """
    fixed = vectors.copy()
    for j in range(fixed.shape[1]):
        col = fixed[:, j]
        idx = np.argmax(np.abs(col) > 1e-8 * np.max(np.abs(col)))
        if col[idx] < 0:
            fixed[:, j] = -col
    return fixed


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense carrier for a bounded operator function of the section operator.

    Parameters
    ----------
    matrix : (m, m) ndarray
        The operator in the physical basis.
    tag : str
        Which symbol this realizes (e.g. ``"exp(0.5*M)"``, ``"U_minus"``).
    """

    matrix: np.ndarray
    tag: str = ""

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise EvaluationError(f"operator matrix must be square, got {mat.shape}")
        if not np.all(np.isfinite(mat)):
            raise EvaluationError(f"operator matrix '{self.tag}' has non-finite entries")
        object.__setattr__(self, "matrix", mat)

    @property
    def m(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class SectionOperator:
    """Symmetric negative-definite section operator, stored spectrally.

    Attributes
    ----------
    eigenvalues : (m,) ndarray
        Strictly negative, nondecreasing.
    eigenvectors : (m, m) ndarray
        Orthonormal columns, sign-fixed (first significant entry positive).
    label : str
        Provenance note ("dirichlet-laplacian-1d(...)", "user matrix", ...).
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    label: str = ""

    def __post_init__(self):
        mu = np.asarray(self.eigenvalues, dtype=float)
        q = np.asarray(self.eigenvectors, dtype=float)
        if mu.ndim != 1 or q.shape != (mu.size, mu.size):
            raise InvalidGeometryError(
                f"inconsistent spectral data: {mu.shape} eigenvalues, {q.shape} eigenvectors"
            )
        if np.any(np.diff(mu) < 0):
            raise InvalidGeometryError("eigenvalues must be nondecreasing")
        scale = np.max(np.abs(mu))
        if mu.size == 0 or not np.all(np.isfinite(mu)) or scale == 0.0:
            raise InvalidGeometryError("empty or non-finite spectrum")
        if np.any(mu > -NEGATIVITY_TOL * scale):
            bad = float(mu[np.argmax(mu)])
            raise HypothesisViolationError(
                f"eigenvalue {bad:.6g} is not strictly negative; the "
                "negative-definiteness gate (surrogates H2: 0 in the resolvent "
                "set, H4: sectorial of angle 0) rejects this section operator"
            )
        ortho = np.linalg.norm(q.T @ q - np.eye(mu.size), 2)
        if ortho > ORTHONORMALITY_TOL:
            raise InvalidGeometryError(
                f"eigenvector matrix not orthonormal: ||Q^T Q - I|| = {ortho:.3e}"
            )
        object.__setattr__(self, "eigenvalues", mu)
        object.__setattr__(self, "eigenvectors", q)

    @property
    def m(self) -> int:
        return self.eigenvalues.size

    @property
    def matrix(self) -> np.ndarray:
        """Reconstruct A = Q diag(mu) Q^T."""
        q = self.eigenvectors
        return (q * self.eigenvalues) @ q.T

    def to_modal(self, vec: np.ndarray) -> np.ndarray:
        """Coordinates of a section vector (or stack) in the eigenbasis."""
        return self.eigenvectors.T @ vec

    def from_modal(self, vec: np.ndarray) -> np.ndarray:
        """Physical-basis vector from eigenbasis coordinates."""
        return self.eigenvectors @ vec


@dataclass(frozen=True)
class GeneratorM:
    """Square-root generator M = -sqrt(-A) of the representation semigroup.

    Shares the eigenbasis of its parent; ``eigenvalues[j] = -sqrt(-mu_j)``,
    so M is symmetric negative definite and M^2 = -A.
    """

    operator: SectionOperator
    eigenvalues: np.ndarray = field(default=None)

    def __post_init__(self):
        vals = -np.sqrt(-self.operator.eigenvalues)
        if self.eigenvalues is not None:
            given = np.asarray(self.eigenvalues, dtype=float)
            if given.shape != vals.shape or np.max(np.abs(given - vals)) > 1e-12 * np.max(-vals):
                raise HypothesisViolationError("generator eigenvalues inconsistent with -sqrt(-A)")
        object.__setattr__(self, "eigenvalues", vals)

    @property
    def m(self) -> int:
        return self.operator.m

    @property
    def matrix(self) -> np.ndarray:
        q = self.operator.eigenvectors
        return (q * self.eigenvalues) @ q.T


def build_dirichlet_laplacian_1d(m: int, length: float) -> SectionOperator:
    """Second-order central-difference Dirichlet Laplacian on (0, length).

    Parameters
    ----------
    m : int
        Number of interior grid points (>= 1).
    length : float
        Interval length (> 0); grid spacing is h = length / (m + 1).

    Returns
    -------
    SectionOperator
        Spectral decomposition of the tridiagonal (1, -2, 1)/h^2 matrix.
        Eigenvalues are -(4/h^2) sin^2(k pi / (2(m+1))), k = 1..m.
    """
    if not isinstance(m, (int, np.integer)) or m < 1:
        raise InvalidGeometryError(f"interior point count must be a positive integer, got {m}")
    if not np.isfinite(length) or length <= 0:
        raise InvalidGeometryError(f"interval length must be positive, got {length}")
    h = length / (m + 1)
    diag = np.full(m, -2.0 / h**2)
    off = np.full(m - 1, 1.0 / h**2)
    if m == 1:
        mu = diag.copy()
        q = np.ones((1, 1))
    else:
        mu, q = eigh_tridiagonal(diag, off)
    q = _fix_eigenvector_signs(q)
    return SectionOperator(mu, q, label=f"dirichlet-laplacian-1d(m={m}, L={length})")


def from_matrix(a: np.ndarray, label: str = "user matrix") -> SectionOperator:
    """Validate and spectrally decompose a dense symmetric section matrix.

    Raises
    ------
    SymmetryError
        If ``a`` is not symmetric within 1e-12 relative.
    HypothesisViolationError
        If any eigenvalue fails the strict-negativity gate.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise InvalidGeometryError(f"section matrix must be square and nonempty, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidGeometryError("section matrix has non-finite entries")
    scale = np.linalg.norm(a, 2)
    asym = np.linalg.norm(a - a.T, 2)
    if asym > SYMMETRY_TOL * max(scale, 1e-300):
        raise SymmetryError(
            f"section matrix asymmetric: ||A - A^T|| = {asym:.3e} > {SYMMETRY_TOL:g} * ||A||"
        )
    mu, q = np.linalg.eigh(0.5 * (a + a.T))
    q = _fix_eigenvector_signs(q)
    op = SectionOperator(mu, q, label=label)
    recon = np.linalg.norm(op.matrix - a, 2)
    if recon > RECONSTRUCTION_TOL * scale:
        raise InvalidGeometryError(
            f"eigendecomposition reconstruction error {recon:.3e} exceeds "
            f"{RECONSTRUCTION_TOL:g} * ||A||; refusing the decomposition"
        )
    return op


def read_matrix_file(path) -> np.ndarray:
    """Read the plain-text dense matrix format: first line m, then m rows.

    Rows hold m whitespace-separated decimals each.
    """
    with open(path, "r", encoding="utf-8") as fh:
        tokens = fh.read().split()
    if not tokens:
        raise InvalidGeometryError(f"matrix file {path!r} is empty")
    try:
        m = int(tokens[0])
        values = [float(t) for t in tokens[1:]]
    except ValueError as exc:
        raise InvalidGeometryError(f"matrix file {path!r}: {exc}") from exc
    if m < 1 or len(values) != m * m:
        raise InvalidGeometryError(
            f"matrix file {path!r}: expected {m}x{m} entries, got {len(values)}"
        )
    return np.array(values).reshape(m, m)


def from_matrix_file(path, label: str | None = None) -> SectionOperator:
    """Load and validate a section operator from the plain-text format."""
    return from_matrix(read_matrix_file(path), label=label or f"matrix-file({path})")


def apply_function(operator: SectionOperator, g, tag: str = "") -> OperatorMatrix:
    """Evaluate a scalar function of the section operator spectrally.

    Computes Q diag(g(mu_j)) Q^T. ``g`` is called on the eigenvalue array
    (it may also be scalar-only; it is then mapped entrywise).

    Raises
    ------
    EvaluationError
        If g is non-finite at some eigenvalue, or returns values with a
        non-negligible imaginary part.
    """
    mu = operator.eigenvalues
    try:
        vals = np.asarray(g(mu))
        if vals.shape != mu.shape:
            raise TypeError
    except (TypeError, ValueError):
        vals = np.array([g(float(x)) for x in mu])
    if np.iscomplexobj(vals):
        scale = np.max(np.abs(vals)) if vals.size else 0.0
        if np.max(np.abs(vals.imag)) > 1e-13 * max(scale, 1.0):
            raise EvaluationError(f"spectral function '{tag}' is not real on the spectrum")
        vals = vals.real
    vals = vals.astype(float)
    if not np.all(np.isfinite(vals)):
        j = int(np.argmax(~np.isfinite(vals)))
        raise EvaluationError(
            f"spectral function '{tag}' not finite at eigenvalue mu_{j + 1} = {mu[j]:.6g}"
        )
    q = operator.eigenvectors
    mat = (q * vals) @ q.T
    return OperatorMatrix(0.5 * (mat + mat.T), tag=tag)


def square_root_generator(operator: SectionOperator) -> GeneratorM:
    """Generator M = -sqrt(-A); satisfies M^2 = -A on the shared eigenbasis."""
    return GeneratorM(operator)


def semigroup(generator: GeneratorM, t: float) -> OperatorMatrix:
    """Semigroup matrix e^{tM} for t >= 0.

    Symmetric positive definite with 2-norm <= 1 (all generator
    eigenvalues are negative); t = 0 returns the exact identity.
    """
    if not np.isfinite(t) or t < 0:
        raise ValueError(f"semigroup time must be nonnegative, got {t}")
    m = generator.m
    if t == 0:
        return OperatorMatrix(np.eye(m), tag="exp(0*M)")
    q = generator.operator.eigenvectors
    mat = (q * np.exp(t * generator.eigenvalues)) @ q.T
    return OperatorMatrix(0.5 * (mat + mat.T), tag=f"exp({t:g}*M)")
