import numpy as np
import pytest

from bitrans import (
    BoundaryData,
    CylinderGeometry,
    DimensionMismatchError,
    SIDE_MINUS,
    SIDE_PLUS,
    SIDES,
    SolveOptions,
    build_dirichlet_laplacian_1d,
    compare,
    convergence_study,
    direct_solve,
    from_matrix,
    manufactured_forced,
    manufactured_homogeneous,
    solve_transmission,
)
from bitrans.oracle import _assemble_mode


@pytest.fixture
def scalar_pi():
    return from_matrix(np.array([[-np.pi**2]]))


def test_homogeneous_single_branch(scalar_pi):
    geom = CylinderGeometry(-1.0, 0.0, 1.0)
    case = manufactured_homogeneous(scalar_pi, geom, 0, 1.0, 0.0)
    p1, p2 = case.psi()
    assert p1[0] == pytest.approx(1.0)
    assert p2[0] == pytest.approx(np.pi)
    xs = np.array([0.3])
    assert case.field(SIDE_PLUS, xs, 0)[0, 0] == pytest.approx(np.exp(np.pi * 0.3), rel=1e-14)


def test_homogeneous_cosh_even(scalar_pi):
    geom = CylinderGeometry(-1.0, 0.0, 1.0)
    case = manufactured_homogeneous(scalar_pi, geom, 0, 0.5, 0.5)
    _, p2 = case.psi()
    assert abs(p2[0]) < 1e-15
    xs = np.array([0.4])
    assert case.field(SIDE_PLUS, xs, 0)[0, 0] == pytest.approx(np.cosh(np.pi * 0.4), rel=1e-14)


def test_homogeneous_tc2_identically_zero_any_k(scalar_pi):
    # u'' + mu u = 0 pointwise, so both flux conditions hold for any k.
    geom = CylinderGeometry(-0.8, 0.0, 1.2)
    case = manufactured_homogeneous(scalar_pi, geom, 0, 0.7, -0.3)
    mu = scalar_pi.eigenvalues[0]
    g = np.array([geom.gamma])
    for km, kp in ((1.0, 5.0), (3.3, 0.2)):
        lhs = km * (case.field(SIDE_MINUS, g, 2) + mu * case.field(SIDE_MINUS, g, 0))
        rhs = kp * (case.field(SIDE_PLUS, g, 2) + mu * case.field(SIDE_PLUS, g, 0))
        assert np.max(np.abs(lhs)) < 1e-12 and np.max(np.abs(rhs)) < 1e-12


def test_homogeneous_invalid_inputs(scalar_pi):
    geom = CylinderGeometry(-1.0, 0.0, 1.0)
    with pytest.raises(DimensionMismatchError):
        manufactured_homogeneous(scalar_pi, geom, 4, 1.0, 0.0)
    with pytest.raises(ValueError):
        manufactured_homogeneous(scalar_pi, geom, 0, 0.0, 0.0)


def test_forced_constant_profile_reference():
    # r = 1, mu = -1, k+ = 2, k- = 1, zero interface values:
    # u_- = 2(cosh(xi) - 1), u_+ = cosh(xi) - 1, f = -w.
    op = from_matrix(np.array([[-1.0]]))
    geom = CylinderGeometry(-1.0, 0.0, 1.0)
    case = manufactured_forced(op, geom, 1.0, 2.0, 0, [1.0])
    xs = np.linspace(-1.0, 0.0, 5)
    exact_m = 2.0 * (np.cosh(xs) - 1.0)
    assert np.max(np.abs(case.field(SIDE_MINUS, xs, 0)[0] - exact_m)) < 1e-13
    xs_p = np.linspace(0.0, 1.0, 5)
    exact_p = np.cosh(xs_p) - 1.0
    assert np.max(np.abs(case.field(SIDE_PLUS, xs_p, 0)[0] - exact_p)) < 1e-13
    forcing = case.forcing()
    assert np.max(np.abs(forcing.sample(SIDE_MINUS, xs)[0] - (-2.0))) < 1e-13
    assert np.max(np.abs(forcing.sample(SIDE_PLUS, xs_p)[0] - (-1.0))) < 1e-13


def test_forced_flux_identity():
    # k- w- = k+ w+ identically along the axis, not just at the interface.
    op = build_dirichlet_laplacian_1d(3, 1.0)
    geom = CylinderGeometry(-0.7, 0.0, 0.9)
    km, kp = 1.3, 2.7
    case = manufactured_forced(op, geom, km, kp, 1, [0.4, -0.8, 0.2, 0.5], psi1=0.1, psi2=0.3)
    mu = op.eigenvalues[1]
    xs = np.array([geom.gamma, geom.gamma + 1e-3, geom.gamma - 1e-3])
    wm = case._mode_values(SIDE_MINUS, xs, 2) + mu * case._mode_values(SIDE_MINUS, xs, 0)
    wp = case._mode_values(SIDE_PLUS, xs, 2) + mu * case._mode_values(SIDE_PLUS, xs, 0)
    assert np.max(np.abs(km * wm - kp * wp)) < 1e-10


def test_forced_profile_degree_cap():
    op = from_matrix(np.array([[-1.0]]))
    geom = CylinderGeometry(-1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        manufactured_forced(op, geom, 1.0, 1.0, 0, np.ones(8))


def test_direct_solve_zero_case():
    op = build_dirichlet_laplacian_1d(3, 1.0)
    geom = CylinderGeometry(-0.7, 0.0, 0.9)
    sol = direct_solve(op, geom, 1.0, 2.0, n_x=33)
    assert np.max(np.abs(sol.u_minus)) == 0.0
    assert np.max(np.abs(sol.u_plus)) == 0.0


def test_direct_solve_convergence_on_exact_case():
    op = build_dirichlet_laplacian_1d(3, 1.0)
    geom = CylinderGeometry(-0.7, 0.0, 0.9)
    case = manufactured_homogeneous(op, geom, [0, 2], [0.6, -0.2], [0.1, 0.4])
    table = convergence_study(case, "direct", [65, 129, 257], 1.0, 2.5)
    assert not table.floor
    assert table.fitted_rate == pytest.approx(2.0, abs=0.2)


def test_direct_agrees_with_representation_at_order_two():
    op = build_dirichlet_laplacian_1d(4, 1.0)
    geom = CylinderGeometry(-0.7, 0.0, 0.9)
    rng = np.random.default_rng(14)
    bc = BoundaryData(*rng.normal(size=(4, 4)))
    rep = solve_transmission(op, geom, 1.0, 3.0, None, bc)
    gaps = []
    for n in (65, 129, 257):
        oracle = direct_solve(op, geom, 1.0, 3.0, None, bc, n_x=n)
        gaps.append(compare(rep, oracle).sup)
    rates = [np.log2(gaps[i] / gaps[i + 1]) for i in range(2)]
    assert min(rates) > 1.7


def test_exact_case_discrete_residual_truncation_order():
    # Substituting the closed form into the discrete operator leaves only
    # the truncation error, which must shrink at second order.
    op = from_matrix(np.array([[-4.0]]))
    geom = CylinderGeometry(-1.0, 0.0, 1.0)
    case = manufactured_homogeneous(op, geom, 0, 0.3, 0.6)
    bc = case.boundary_data()
    mu = op.eigenvalues[0]
    sups = []
    for n in (65, 129):
        mat, rhs = _assemble_mode(mu, geom, 1.5, 0.5,
                                  np.zeros(n), np.zeros(n),
                                  np.array([bc.phi1_minus[0], bc.phi2_minus[0],
                                            bc.phi1_plus[0], bc.phi2_plus[0]]), n)
        gm = geom.grid(SIDE_MINUS, n)
        gp = geom.grid(SIDE_PLUS, n)
        u_m = case.modal_field(gm, 0)[0]
        u_p = case.modal_field(gp, 0)[0]
        w_m = case.modal_field(gm, 2)[0] + mu * u_m
        w_p = case.modal_field(gp, 2)[0] + mu * u_p
        exact = np.concatenate([u_m, w_m, u_p, w_p])
        sups.append(np.max(np.abs(mat @ exact - rhs)))
    assert np.log2(sups[0] / sups[1]) > 1.7


def test_convergence_study_validation():
    op = build_dirichlet_laplacian_1d(2, 1.0)
    geom = CylinderGeometry(-1.0, 0.0, 1.0)
    case = manufactured_homogeneous(op, geom, 0, 1.0, 0.0)
    with pytest.raises(ValueError):
        convergence_study(case, "direct", [65, 129], 1.0, 1.0)
    with pytest.raises(ValueError):
        convergence_study(case, "finite-element", [65, 129, 257], 1.0, 1.0)


def test_representation_floor_flag_on_exact_case():
    op = build_dirichlet_laplacian_1d(3, 1.0)
    geom = CylinderGeometry(-0.7, 0.0, 0.9)
    case = manufactured_homogeneous(op, geom, [1], [0.4], [-0.2])
    table = convergence_study(case, "representation", [33, 65, 129], 1.0, 2.0)
    assert table.floor
    assert np.isnan(table.fitted_rate)
    rows = table.to_csv_rows()
    assert rows[0] == ("n_x", "error", "rate")
    assert all(row[2] == "floor" for row in rows[1:])


def test_forced_case_convergence_both_methods():
    op = build_dirichlet_laplacian_1d(3, 1.0)
    geom = CylinderGeometry(-0.7, 0.0, 0.9)
    case = manufactured_forced(op, geom, 1.0, 3.0, 2,
                               [0.5, -1.2, 0.8, 0.3, -0.6], psi1=0.3, psi2=-0.2)
    rep = convergence_study(case, "representation", [65, 129, 257])
    assert not rep.floor and rep.fitted_rate >= 1.8
    direct = convergence_study(case, "direct", [65, 129, 257])
    assert direct.fitted_rate == pytest.approx(2.0, abs=0.2)


def test_compare_identity_and_incompatibility():
    op = build_dirichlet_laplacian_1d(3, 1.0)
    geom = CylinderGeometry(-0.7, 0.0, 0.9)
    case = manufactured_homogeneous(op, geom, 0, 1.0, 0.5)
    metrics = compare(case, case)
    assert metrics.sup == 0.0 and metrics.l2_scaled == 0.0
    other_geom = CylinderGeometry(-0.5, 0.0, 0.9)
    other = manufactured_homogeneous(op, other_geom, 0, 1.0, 0.5)
    with pytest.raises(ValueError):
        compare(case, other)


def test_oracle_solution_field_orders():
    op = build_dirichlet_laplacian_1d(2, 1.0)
    geom = CylinderGeometry(-0.7, 0.0, 0.9)
    case = manufactured_homogeneous(op, geom, 0, 0.5, 0.1)
    sol = direct_solve(op, geom, 1.0, 2.0, case.forcing(), case.boundary_data(), n_x=129)
    xs = np.linspace(geom.gamma, geom.b, 9)
    for order in (0, 1, 2):
        approx = sol.modal_field(SIDE_PLUS, xs, order)[0]
        exact = case.modal_field(xs, order)[0]
        assert np.max(np.abs(approx - exact)) < 5e-3 * (1 + np.max(np.abs(exact)))
    with pytest.raises(ValueError):
        sol.modal_field(SIDE_PLUS, xs, 3)
