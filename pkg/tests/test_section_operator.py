import numpy as np
import pytest

from bitrans import (
    EvaluationError,
    HypothesisViolationError,
    InvalidGeometryError,
    SymmetryError,
    apply_function,
    build_dirichlet_laplacian_1d,
    from_matrix,
    from_matrix_file,
    semigroup,
    square_root_generator,
)


def laplacian_closed_form(m, length):
    h = length / (m + 1)
    k = np.arange(1, m + 1)
    return np.sort(-(4.0 / h**2) * np.sin(k * np.pi / (2 * (m + 1))) ** 2)


@pytest.mark.parametrize("m", [1, 3, 50])
def test_laplacian_eigenvalues_match_closed_form(m):
    op = build_dirichlet_laplacian_1d(m, 1.0)
    exact = laplacian_closed_form(m, 1.0)
    assert np.max(np.abs(op.eigenvalues - exact) / np.abs(exact)) < 1e-10


def test_laplacian_m1_single_mode():
    op = build_dirichlet_laplacian_1d(1, 1.0)
    assert op.eigenvalues.shape == (1,)
    assert op.eigenvalues[0] == pytest.approx(-8.0, rel=1e-14)


@pytest.mark.parametrize("m", [1, 3, 50])
def test_laplacian_orthonormal_and_reconstructs(m):
    op = build_dirichlet_laplacian_1d(m, 1.0)
    q = op.eigenvectors
    assert np.linalg.norm(q.T @ q - np.eye(m), 2) < 1e-12
    h = 1.0 / (m + 1)
    dense = (np.diag(np.full(m, -2.0)) + np.diag(np.ones(m - 1), 1)
             + np.diag(np.ones(m - 1), -1)) / h**2
    assert np.linalg.norm(op.matrix - dense, 2) <= 1e-10 * np.linalg.norm(dense, 2)


def test_invalid_geometry_rejected():
    with pytest.raises(InvalidGeometryError):
        build_dirichlet_laplacian_1d(0, 1.0)
    with pytest.raises(InvalidGeometryError):
        build_dirichlet_laplacian_1d(3, -1.0)


def test_from_matrix_scalar():
    op = from_matrix(np.array([[-1.0]]))
    assert op.eigenvalues[0] == pytest.approx(-1.0)


def test_from_matrix_positive_eigenvalue_rejected():
    with pytest.raises(HypothesisViolationError):
        from_matrix(np.diag([-1.0, 1.0]))


def test_from_matrix_asymmetric_rejected():
    a = np.array([[-2.0, 0.5], [0.0, -1.0]])
    with pytest.raises(SymmetryError):
        from_matrix(a)


def test_from_matrix_matches_tridiagonal_constructor():
    m = 3
    h = 0.25
    dense = (np.diag(np.full(m, -2.0)) + np.diag(np.ones(m - 1), 1)
             + np.diag(np.ones(m - 1), -1)) / h**2
    a = from_matrix(dense)
    b = build_dirichlet_laplacian_1d(m, 1.0)
    assert np.max(np.abs(a.eigenvalues - b.eigenvalues)) < 1e-12 * np.max(-b.eigenvalues)


def test_apply_function_identity_reproduces_matrix():
    op = build_dirichlet_laplacian_1d(5, 1.0)
    out = apply_function(op, lambda mu: mu, tag="identity")
    assert np.linalg.norm(out.matrix - op.matrix, 2) <= 1e-12 * np.linalg.norm(op.matrix, 2)


def test_apply_function_scalar_square_root():
    op = from_matrix(np.array([[-4.0]]))
    out = apply_function(op, lambda mu: -np.sqrt(-mu))
    assert out.matrix[0, 0] == pytest.approx(-2.0, rel=1e-14)


def test_apply_function_exponential_per_mode():
    op = build_dirichlet_laplacian_1d(3, 1.0)
    out = apply_function(op, lambda mu: np.exp(-np.sqrt(-mu)))
    q = op.eigenvectors
    modal = np.diag(q.T @ out.matrix @ q)
    assert np.max(np.abs(modal - np.exp(-np.sqrt(-op.eigenvalues)))) < 1e-12


def test_apply_function_nonfinite_rejected_naming_eigenvalue():
    op = build_dirichlet_laplacian_1d(3, 1.0)
    with pytest.raises(EvaluationError, match="-32"):
        apply_function(op, lambda mu: np.where(np.isclose(mu, -32.0), np.inf, mu))


def test_apply_function_outputs_commute():
    op = build_dirichlet_laplacian_1d(8, 1.0)
    rng = np.random.default_rng(3)
    coef_a, coef_b = rng.normal(size=(2, 3))
    f = apply_function(op, lambda mu: coef_a[0] + coef_a[1] * np.exp(0.1 * mu) + coef_a[2] / mu)
    g = apply_function(op, lambda mu: coef_b[0] * np.sqrt(-mu) + coef_b[1] * mu + coef_b[2])
    comm = f.matrix @ g.matrix - g.matrix @ f.matrix
    scale = np.linalg.norm(f.matrix, 2) * np.linalg.norm(g.matrix, 2)
    assert np.linalg.norm(comm, 2) <= 1e-11 * scale


@pytest.mark.parametrize("m", [1, 3, 50])
def test_generator_squares_to_minus_a(m):
    op = build_dirichlet_laplacian_1d(m, 1.0)
    gen = square_root_generator(op)
    assert np.all(gen.eigenvalues < 0)
    gap = np.linalg.norm(gen.matrix @ gen.matrix + op.matrix, 2)
    assert gap <= 1e-10 * np.linalg.norm(op.matrix, 2)


def test_generator_scalar_values():
    assert square_root_generator(from_matrix(np.array([[-1.0]]))).eigenvalues[0] == pytest.approx(-1.0)
    assert square_root_generator(from_matrix(np.array([[-4.0]]))).eigenvalues[0] == pytest.approx(-2.0)


def test_generator_laplacian3_values():
    gen = square_root_generator(build_dirichlet_laplacian_1d(3, 1.0))
    exact = -np.sqrt(-laplacian_closed_form(3, 1.0))
    assert np.max(np.abs(np.sort(gen.eigenvalues) - np.sort(exact))) < 1e-10


def test_semigroup_identity_at_zero():
    gen = square_root_generator(build_dirichlet_laplacian_1d(4, 1.0))
    assert np.array_equal(semigroup(gen, 0.0).matrix, np.eye(4))


def test_semigroup_scalar_exponential():
    gen = square_root_generator(from_matrix(np.array([[-1.0]])))
    assert semigroup(gen, 1.0).matrix[0, 0] == pytest.approx(np.exp(-1.0), rel=1e-14)


def test_semigroup_law():
    gen = square_root_generator(build_dirichlet_laplacian_1d(3, 1.0))
    lhs = semigroup(gen, 0.3).matrix @ semigroup(gen, 0.7).matrix
    rhs = semigroup(gen, 1.0).matrix
    assert np.linalg.norm(lhs - rhs, 2) <= 1e-12


@pytest.mark.parametrize("t", [0.0, 0.1, 1.0, 10.0])
def test_semigroup_contractive(t):
    gen = square_root_generator(build_dirichlet_laplacian_1d(6, 1.0))
    assert np.linalg.norm(semigroup(gen, t).matrix, 2) <= 1.0


def test_semigroup_monotone_decay():
    gen = square_root_generator(build_dirichlet_laplacian_1d(6, 1.0))
    norms = [np.linalg.norm(semigroup(gen, t).matrix, 2) for t in (0.0, 0.2, 0.5, 1.0, 3.0)]
    assert all(b <= a for a, b in zip(norms, norms[1:]))


def test_semigroup_negative_time_rejected():
    gen = square_root_generator(build_dirichlet_laplacian_1d(2, 1.0))
    with pytest.raises(ValueError):
        semigroup(gen, -0.1)


def test_matrix_file_roundtrip(tmp_path):
    a = np.diag([-3.0, -1.5])
    path = tmp_path / "op.txt"
    path.write_text("2\n-3.0 0.0\n0.0 -1.5\n")
    op = from_matrix_file(path)
    assert np.allclose(np.sort(op.eigenvalues), np.sort(np.diag(a)))


def test_matrix_file_malformed(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("2\n-3.0 0.0\n")
    with pytest.raises(InvalidGeometryError):
        from_matrix_file(path)
