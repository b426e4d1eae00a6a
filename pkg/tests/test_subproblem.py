import numpy as np
import pytest

from bitrans import (
    CylinderGeometry,
    ModalForcing,
    ResolutionError,
    SIDE_MINUS,
    SIDE_PLUS,
    SubproblemSolution,
    alphas_minus,
    alphas_plus,
    build_dirichlet_laplacian_1d,
    build_side_operators,
    from_matrix,
    phi_tilde_minus,
    phi_tilde_plus,
    solve_particular,
    square_root_generator,
    u_delta,
)


@pytest.fixture
def scalar_setup():
    op = from_matrix(np.array([[-1.0]]))
    gen = square_root_generator(op)
    geom = CylinderGeometry(-1.0, 0.0, 1.0)   # c = d = 1
    return op, gen, geom


def test_zero_forcing_gives_zero_particular():
    op = build_dirichlet_laplacian_1d(3, 1.0)
    geom = CylinderGeometry(-0.7, 0.0, 0.9)
    part = solve_particular(op.eigenvalues, geom, SIDE_MINUS,
                            ModalForcing.zero(3, geom), n_x=33)
    assert np.max(np.abs(part.f_modal)) == 0.0
    assert np.max(np.abs(part.fprime_left)) == 0.0
    assert np.max(np.abs(part.f3_right)) == 0.0
    assert part.error_estimate == 0.0


@pytest.mark.parametrize("k_multiple", [1, 2])
def test_sine_forcing_exact_particular(k_multiple):
    op = build_dirichlet_laplacian_1d(3, 1.0)
    geom = CylinderGeometry(-0.7, 0.0, 0.9)
    mode = 1
    forcing = ModalForcing.sine(op, geom, SIDE_MINUS, mode, k_multiple=k_multiple)
    part = solve_particular(op.eigenvalues, geom, SIDE_MINUS, forcing, n_x=129)
    k = k_multiple * np.pi / geom.c
    exact = np.sin(k * (part.grid - geom.a))
    assert np.max(np.abs(part.f_modal[mode] - exact)) < 5e-9 * k_multiple**4
    others = [j for j in range(3) if j != mode]
    assert np.max(np.abs(part.f_modal[others])) == 0.0
    # Trace values: F'(a) = k, F'(gamma) = k cos(k c) = +-k.
    rel = 1e-7 * k_multiple**4
    assert part.fprime_left[mode] == pytest.approx(k, rel=rel)
    assert part.fprime_right[mode] == pytest.approx(k * np.cos(k * geom.c), rel=rel)
    # F''' = -k^2 F' for the sine.
    assert part.f3_left[mode] == pytest.approx(-k**2 * k, rel=10 * rel)


def test_particular_fourth_order_convergence():
    op = build_dirichlet_laplacian_1d(3, 1.0)
    geom = CylinderGeometry(-0.7, 0.0, 0.9)
    forcing = ModalForcing.sine(op, geom, SIDE_PLUS, 2, k_multiple=2)
    errors = []
    for n in (33, 65, 129):
        part = solve_particular(op.eigenvalues, geom, SIDE_PLUS, forcing, n_x=n)
        k = 2 * np.pi / geom.d
        exact = np.sin(k * (part.grid - geom.gamma))
        errors.append(np.max(np.abs(part.f_modal[2] - exact)))
    rates = [np.log2(errors[i] / errors[i + 1]) for i in range(2)]
    assert min(rates) > 3.5


def test_particular_endpoint_invariants():
    op = build_dirichlet_laplacian_1d(4, 1.0)
    geom = CylinderGeometry(-0.5, 0.0, 1.1)
    rng = np.random.default_rng(11)
    coeffs = rng.normal(size=(4, 3))

    def func(xs):
        xs = np.asarray(xs)
        return np.stack([c[0] + c[1] * xs + c[2] * xs**2 for c in coeffs])

    forcing = ModalForcing.from_functions(geom, 4, func, func)
    part = solve_particular(op.eigenvalues, geom, SIDE_MINUS, forcing, n_x=65)
    assert np.max(np.abs(part.f_modal[:, 0])) == 0.0
    assert np.max(np.abs(part.f_modal[:, -1])) == 0.0
    assert np.max(np.abs(part.w_modal[:, 0])) == 0.0   # w = F'' at the ends
    assert np.max(np.abs(part.w_modal[:, -1])) == 0.0


def test_resolution_error():
    op = build_dirichlet_laplacian_1d(2, 1.0)
    geom = CylinderGeometry(-1.0, 0.0, 1.0)
    with pytest.raises(ResolutionError):
        solve_particular(op.eigenvalues, geom, SIDE_MINUS,
                         ModalForcing.zero(2, geom), n_x=9)


def test_phi_tilde_scalar_reference(scalar_setup):
    op, gen, geom = scalar_setup
    ops = build_side_operators(gen, geom.c)
    one, zero = np.array([1.0]), np.array([0.0])
    pt = phi_tilde_minus(ops, one, zero, zero, zero)
    assert pt[0][0] == pytest.approx(0.5 / u_delta(1.0, 1.0), rel=1e-12)
    assert pt[0][0] == pytest.approx(3.8788, abs=1e-4)
    ptp = phi_tilde_plus(build_side_operators(gen, geom.d), one, zero, zero, zero)
    assert ptp[0][0] == pytest.approx(-3.8788, abs=1e-4)


def test_phi_tilde_zero_data(scalar_setup):
    _, gen, geom = scalar_setup
    ops = build_side_operators(gen, geom.c)
    zero = np.zeros(1)
    for vec in phi_tilde_minus(ops, zero, zero, zero, zero):
        assert np.all(vec == 0.0)


def test_phi_tilde_linearity():
    op = build_dirichlet_laplacian_1d(4, 1.0)
    gen = square_root_generator(op)
    ops = build_side_operators(gen, 0.8)
    rng = np.random.default_rng(5)
    data = rng.normal(size=(4, 4))
    base = phi_tilde_minus(ops, *data)
    double = phi_tilde_minus(ops, *(2.0 * data))
    for one, two in zip(base, double):
        assert np.max(np.abs(two - 2.0 * one)) <= 1e-12 * (1.0 + np.max(np.abs(two)))


def test_phi_tilde_plus_minus_antisymmetry(scalar_setup):
    # Mirrored data with c = d: phi~1+ = -phi~1-.
    _, gen, geom = scalar_setup
    ops_m = build_side_operators(gen, geom.c)
    ops_p = build_side_operators(gen, geom.d)
    rng = np.random.default_rng(8)
    phi1, phi2, ta, tb = rng.normal(size=(4, 1))
    pt_m = phi_tilde_minus(ops_m, phi1, phi2, ta, tb)
    pt_p = phi_tilde_plus(ops_p, phi1, -phi2, -tb, -ta)
    assert pt_p[0][0] == pytest.approx(-pt_m[0][0], rel=1e-12)


def test_alphas_scalar_reference(scalar_setup):
    _, gen, geom = scalar_setup
    ops = build_side_operators(gen, geom.c)
    zero4 = tuple(np.zeros(1) for _ in range(4))
    al = alphas_minus(ops, np.array([1.0]), np.array([0.0]), zero4)
    expected = 0.5 / u_delta(1.0, 1.0) * (1.0 + np.exp(-1.0)) * (-1.0)
    assert al[1][0] == pytest.approx(expected, rel=1e-12)
    assert al[1][0] == pytest.approx(-5.3058, abs=1e-4)


def test_alphas_reduce_to_phi_tilde(scalar_setup):
    _, gen, geom = scalar_setup
    ops = build_side_operators(gen, geom.c)
    rng = np.random.default_rng(2)
    pt = tuple(rng.normal(size=1) for _ in range(4))
    zero = np.zeros(1)
    for a, p in zip(alphas_minus(ops, zero, zero, pt), pt):
        assert a[0] == pytest.approx(p[0], rel=1e-14)
    for a, p in zip(alphas_plus(ops, zero, zero, pt), pt):
        assert a[0] == pytest.approx(p[0], rel=1e-14)


def _assemble_side(op, gen, geom, side, forcing, bc_pair, psi_pair, n_x=65):
    """Build a SubproblemSolution from data the way the orchestrator does."""
    ops = build_side_operators(gen, geom.length(side))
    part = solve_particular(op.eigenvalues, geom, side, forcing, n_x=n_x)
    q = op.eigenvectors
    if side == SIDE_MINUS:
        pt = phi_tilde_minus(ops, bc_pair[0], bc_pair[1],
                             q @ part.fprime_left, q @ part.fprime_right)
        al = alphas_minus(ops, psi_pair[0], psi_pair[1], pt)
    else:
        pt = phi_tilde_plus(ops, bc_pair[0], bc_pair[1],
                            q @ part.fprime_left, q @ part.fprime_right)
        al = alphas_plus(ops, psi_pair[0], psi_pair[1], pt)
    return SubproblemSolution(side, geom, gen, al, part)


@pytest.mark.parametrize("side", [SIDE_MINUS, SIDE_PLUS])
def test_boundary_roundtrip_with_forcing(side):
    op = build_dirichlet_laplacian_1d(4, 1.0)
    gen = square_root_generator(op)
    geom = CylinderGeometry(-0.8, 0.0, 1.2)
    rng = np.random.default_rng(17)
    forcing = ModalForcing.sine(op, geom, side, 0, k_multiple=1, amplitude=0.7)
    phi1, phi2, psi1, psi2 = rng.normal(size=(4, 4))
    sol = _assemble_side(op, gen, geom, side, forcing, (phi1, phi2), (psi1, psi2))
    lo, hi = geom.interval(side)
    outer, inner = (lo, hi) if side == SIDE_MINUS else (hi, lo)
    assert np.max(np.abs(sol.evaluate(outer, 0) - phi1)) < 1e-9
    assert np.max(np.abs(sol.evaluate(outer, 1) - phi2)) < 1e-9
    assert np.max(np.abs(sol.evaluate(inner, 0) - psi1)) < 1e-9
    assert np.max(np.abs(sol.evaluate(inner, 1) - psi2)) < 1e-9


def test_evaluate_zero_everywhere():
    op = build_dirichlet_laplacian_1d(3, 1.0)
    gen = square_root_generator(op)
    geom = CylinderGeometry(-1.0, 0.0, 1.0)
    zeros = tuple(np.zeros(3) for _ in range(4))
    sol = SubproblemSolution(SIDE_MINUS, geom, gen, zeros)
    for order in range(4):
        assert np.max(np.abs(sol.evaluate(np.linspace(-1, 0, 9), order))) == 0.0


def test_evaluate_rejects_bad_inputs():
    op = build_dirichlet_laplacian_1d(2, 1.0)
    gen = square_root_generator(op)
    geom = CylinderGeometry(-1.0, 0.0, 1.0)
    zeros = tuple(np.zeros(2) for _ in range(4))
    sol = SubproblemSolution(SIDE_MINUS, geom, gen, zeros)
    with pytest.raises(ValueError):
        sol.evaluate(0.5, 0)   # outside the minus interval
    with pytest.raises(ValueError):
        sol.evaluate(-0.5, 4)


@pytest.mark.parametrize("order", [0, 1, 2])
def test_derivative_formulas_consistent_with_differencing(order):
    # The analytic order-(k+1) field must match the numerical derivative
    # of the order-k field: an independent check of the evaluation algebra.
    op = build_dirichlet_laplacian_1d(3, 1.0)
    gen = square_root_generator(op)
    geom = CylinderGeometry(-0.9, 0.0, 1.0)
    rng = np.random.default_rng(4)
    al = tuple(rng.normal(size=3) for _ in range(4))
    sol = SubproblemSolution(SIDE_MINUS, geom, gen, al)
    xs = np.linspace(-0.7, -0.2, 5)
    h = 1e-5
    numeric = (sol.evaluate(xs + h, order) - sol.evaluate(xs - h, order)) / (2 * h)
    analytic = sol.evaluate(xs, order + 1)
    scale = 1.0 + np.max(np.abs(analytic))
    assert np.max(np.abs(numeric - analytic)) / scale < 1e-7


def test_pipeline_linearity_in_all_data():
    op = build_dirichlet_laplacian_1d(3, 1.0)
    gen = square_root_generator(op)
    geom = CylinderGeometry(-0.6, 0.0, 0.8)
    rng = np.random.default_rng(23)
    phi1, phi2, psi1, psi2 = rng.normal(size=(4, 3))
    amp = 0.9

    def solve(scale):
        forcing = ModalForcing.sine(op, geom, SIDE_MINUS, 1, amplitude=scale * amp)
        return _assemble_side(op, gen, geom, SIDE_MINUS, forcing,
                              (scale * phi1, scale * phi2),
                              (scale * psi1, scale * psi2))

    xs = np.linspace(geom.a, geom.gamma, 7)
    one = solve(1.0).evaluate(xs, 0)
    two = solve(2.0).evaluate(xs, 0)
    assert np.max(np.abs(two - 2.0 * one)) <= 1e-12 * (1.0 + np.max(np.abs(two)))
