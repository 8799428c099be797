import math

import numpy as np
import pytest

from paracheb import (
    NonConvergenceError,
    NonFiniteRhsError,
    PicardConfig,
    SingularSystemError,
    build_operator,
    cg_points,
    endpoint_value,
    picard_sweep,
    solve_linear,
    solve_nonlinear,
)


def series_eval(coeffs, tau):
    # Direct sum via the recurrence; robust reference for small degree.
    total, t_prev, t_cur = 0.0, 1.0, tau
    for l, c in enumerate(coeffs):
        if l == 0:
            total += c * 1.0
        elif l == 1:
            total += c * tau
        else:
            t_prev, t_cur = t_cur, 2.0 * tau * t_cur - t_prev
            total += c * t_cur
    return total


class TestPicardSweep:
    def test_zero_rhs_preserves_constants(self):
        op = build_operator(3)
        pts = cg_points(3, 0.0, 1.0)
        u_hat, u_nodes = picard_sweep(op, lambda t, u: 0.0 * u, pts, 2.5, np.full((4, 1), 2.5))
        np.testing.assert_allclose(u_hat[0], [2.5])
        np.testing.assert_allclose(u_hat[1:], 0.0, atol=1e-16)
        np.testing.assert_allclose(u_nodes[:, 0], 2.5)

    def test_constant_rhs_integrates_exactly(self):
        op = build_operator(4)
        pts = cg_points(4, 0.0, 1.0)
        u_prev = np.zeros((5, 1))
        _, u_nodes = picard_sweep(op, lambda t, u: np.ones(1), pts, 0.0, u_prev)
        np.testing.assert_allclose(u_nodes[:, 0], pts.t, atol=1e-12)

    def test_fixed_point_matches_coarsest_stability_value(self):
        # Repeated sweeps for u' = -u over a unit interval with a single node
        # settle on the endpoint value (2-z)/(2+z) = 1/3 at z = 1.
        op = build_operator(0)
        pts = cg_points(0, 0.0, 1.0)
        u_nodes = np.ones((1, 1))
        for _ in range(80):
            u_hat, u_nodes = picard_sweep(op, lambda t, u: -u, pts, 1.0, u_nodes)
        assert endpoint_value(u_hat)[0] == pytest.approx(1.0 / 3.0, abs=1e-12)

    def test_nonfinite_rhs_reports_node(self):
        op = build_operator(3)
        pts = cg_points(3, 0.0, 1.0)

        def f(t, u):
            return np.full(1, np.nan) if t > pts.t[1] else -u

        with pytest.raises(NonFiniteRhsError) as err:
            picard_sweep(op, f, pts, 1.0, np.ones((4, 1)))
        assert err.value.node == 2

    def test_dimension_mismatch_rejected(self):
        op = build_operator(3)
        pts = cg_points(2, 0.0, 1.0)
        with pytest.raises(ValueError):
            picard_sweep(op, lambda t, u: -u, pts, 1.0, np.ones((3, 1)))
        with pytest.raises(ValueError):
            picard_sweep(op, lambda t, u: -u, cg_points(3, 0.0, 1.0), 1.0, np.ones((3, 1)))


class TestSolveNonlinear:
    def test_exponential_decay(self):
        op = build_operator(16)
        pts = cg_points(16, 0.0, 0.5)
        sol = solve_nonlinear(op, lambda t, u: -u, pts, 1.0, PicardConfig(tol=1e-13))
        assert sol.converged
        assert sol.u_end[0] == pytest.approx(math.exp(-0.5), abs=1e-12)

    def test_single_node_endpoint(self):
        op = build_operator(0)
        pts = cg_points(0, 0.0, 1.0)
        sol = solve_nonlinear(op, lambda t, u: -u, pts, 1.0, PicardConfig(tol=1e-13))
        assert sol.u_end[0] == pytest.approx(1.0 / 3.0, abs=1e-12)

    def test_divergence_detected(self):
        # With one node the sweep multiplies errors by z/2; z = 4 diverges.
        op = build_operator(0)
        pts = cg_points(0, 0.0, 1.0)
        with pytest.raises(NonConvergenceError):
            solve_nonlinear(op, lambda t, u: -4.0 * u, pts, 1.0)

    def test_warn_policy_returns_best_iterate(self):
        op = build_operator(0)
        pts = cg_points(0, 0.0, 1.0)
        cfg = PicardConfig(max_iter=5, on_nonconvergence="warn")
        with pytest.warns(RuntimeWarning):
            sol = solve_nonlinear(op, lambda t, u: -4.0 * u, pts, 1.0, cfg)
        assert not sol.converged
        assert sol.iterations == 5

    def test_provided_initial_guess(self):
        op = build_operator(8)
        pts = cg_points(8, 0.0, 0.3)
        guess = np.exp(-pts.t)[:, None]
        cfg = PicardConfig(initial_guess="provided")
        sol = solve_nonlinear(op, lambda t, u: -u, pts, 1.0, cfg, u_guess=guess)
        assert sol.converged
        assert sol.iterations <= 4  # warm start needs fewer sweeps
        with pytest.raises(ValueError):
            solve_nonlinear(op, lambda t, u: -u, pts, 1.0, cfg)

    def test_polynomial_rhs_integrated_exactly(self):
        # RHS p(t) of degree <= M is reproduced through its antiderivative.
        op = build_operator(4)
        pts = cg_points(4, 0.3, 0.9)
        poly = lambda t: 3.0 * t**2 - 2.0 * t + 1.0
        anti = lambda t: t**3 - t**2 + t
        sol = solve_nonlinear(op, lambda t, u: np.full(1, poly(t)), pts, anti(0.3))
        np.testing.assert_allclose(sol.u_nodes[:, 0], anti(pts.t), atol=1e-11)
        assert sol.u_end[0] == pytest.approx(anti(0.9), abs=1e-11)

    def test_linear_convergence_rate_below_one(self):
        # Lipschitz constant times interval length 0.2 < 1/4.
        op = build_operator(6)
        pts = cg_points(6, 0.0, 0.2)
        u_nodes = np.ones((7, 1))
        diffs = []
        for _ in range(8):
            _, u_new = picard_sweep(op, lambda t, u: -u, pts, 1.0, u_nodes)
            diffs.append(np.max(np.abs(u_new - u_nodes)))
            u_nodes = u_new
        ratios = [b / a for a, b in zip(diffs, diffs[1:]) if b > 1e-15]
        assert all(r < 1.0 for r in ratios)

    def test_spectral_endpoint_accuracy(self):
        errors = []
        for M in (4, 6, 8, 10, 12):
            op = build_operator(M)
            pts = cg_points(M, 0.0, 1.0)
            sol = solve_nonlinear(op, lambda t, u: -u, pts, 1.0, PicardConfig(tol=1e-14, max_iter=200))
            errors.append(abs(sol.u_end[0] - math.exp(-1.0)))
        for e_coarse, e_fine in zip(errors, errors[1:]):
            if e_coarse < 1e-14:
                break
            assert e_fine < e_coarse / 5.0


class TestSolveLinear:
    def test_coarsest_closed_form(self):
        op = build_operator(0)
        pts = cg_points(0, 0.0, 1.0)
        sol = solve_linear(op, np.array([[1.0]]), None, pts, 1.0)
        assert sol.u_end[0] == pytest.approx(1.0 / 3.0, abs=1e-14)

    def test_two_node_closed_form(self):
        op = build_operator(1)
        pts = cg_points(1, 0.0, 1.0)
        sol = solve_linear(op, np.array([[1.0]]), None, pts, 1.0)
        assert sol.u_end[0] == pytest.approx(9.0 / 25.0, abs=1e-14)

    def test_diagonal_system_decouples(self):
        op = build_operator(20)
        pts = cg_points(20, 0.0, 0.7)
        sol = solve_linear(op, np.diag([1.0, 2.0]), None, pts, np.array([1.0, 1.0]))
        np.testing.assert_allclose(sol.u_end, [math.exp(-0.7), math.exp(-1.4)], atol=1e-10)

    def test_forced_scalar_problem(self):
        # u' + u = 1, u(0) = 0 has solution 1 - exp(-t).
        op = build_operator(16)
        pts = cg_points(16, 0.0, 1.0)
        sol = solve_linear(op, np.array([[1.0]]), lambda t: np.ones(1), pts, 0.0)
        assert sol.u_end[0] == pytest.approx(1.0 - math.exp(-1.0), abs=1e-12)

    def test_node_values_consistent_with_coefficients(self):
        op = build_operator(6)
        pts = cg_points(6, 0.0, 0.5)
        sol = solve_linear(op, np.array([[2.0]]), None, pts, 1.0)
        np.testing.assert_allclose(sol.u_nodes, op.T1 @ sol.u_hat, atol=1e-14)
        np.testing.assert_allclose(sol.u_end, sol.u_hat.sum(axis=0), atol=1e-14)

    def test_singular_system_flagged(self):
        # A negative eigenvalue can place the scaled problem on a pole.
        op = build_operator(0)
        pts = cg_points(0, 0.0, 1.0)
        with pytest.raises(SingularSystemError):
            solve_linear(op, np.array([[-2.0]]), None, pts, 1.0)

    def test_agrees_with_picard_in_convergent_regime(self):
        rng = np.random.default_rng(3)
        op_cache = {}
        for _ in range(10):
            lam = rng.uniform(0.05, 0.95)
            M = int(rng.integers(0, 9))
            op = op_cache.setdefault(M, build_operator(M))
            pts = cg_points(M, 0.0, 1.0)
            u0 = rng.uniform(-2.0, 2.0)
            direct = solve_linear(op, np.array([[lam]]), None, pts, u0)
            picard = solve_nonlinear(op, lambda t, u: -lam * u, pts, u0, PicardConfig(tol=1e-14, max_iter=300))
            assert direct.u_end[0] == pytest.approx(picard.u_end[0], abs=1e-10)


class TestEndpointValue:
    def test_constant_series(self):
        assert endpoint_value(np.array([[3.0], [0.0], [0.0]]))[0] == 3.0

    def test_first_mode(self):
        assert endpoint_value(np.array([[0.0], [1.0], [0.0]]))[0] == 1.0

    def test_matches_series_evaluation_at_right_endpoint(self):
        rng = np.random.default_rng(9)
        coeffs = rng.standard_normal(7)
        got = endpoint_value(coeffs[:, None])[0]
        assert got == pytest.approx(series_eval(coeffs, 1.0), abs=1e-14)
