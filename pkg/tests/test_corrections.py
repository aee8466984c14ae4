"""Correction-function solves: forcing assembly, tails, linearity, refinement."""

import dataclasses
import itertools

import numpy as np
import pytest
from scipy.integrate import solve_bvp

import tflimit as tf
from tflimit.corrections import forcing_term, solve_correction
from tflimit.errors import MissingPrior, SingularOperator, TailTooNoisy
from tflimit.grid import ScalarField


class TestForcing:
    def test_first_order_formula(self, hm):
        f1 = forcing_term(1, 3, hm)
        y = hm.grid.nodes
        expected = (-2 * 3 * hm.derivative.values
                    - 4 * y * hm.second_derivative_values())
        np.testing.assert_allclose(f1.values, expected, rtol=1e-12)

    def test_cubic_sum_empty_at_order_one(self, hm):
        # d-dependence is purely through the -2d v0' term
        f_d1 = forcing_term(1, 1, hm).values
        f_d3 = forcing_term(1, 3, hm).values
        np.testing.assert_allclose(f_d3 - f_d1, -4.0 * hm.derivative.values,
                                   rtol=1e-10, atol=1e-14)

    def test_value_at_origin(self, hm):
        # the 4 y v0'' term vanishes at y=0
        i0 = hm.grid.index_of(0.0)
        f1 = forcing_term(1, 3, hm)
        assert f1.values[i0] == pytest.approx(-6.0 * hm.derivative.values[i0],
                                              rel=1e-12)

    def test_second_order_vs_bruteforce_enumeration(self, hm, nu1):
        d = 2
        f2 = forcing_term(2, d, hm, (nu1[d],))
        fields = [hm.field.values, nu1[d].field.values]
        cubic = np.zeros_like(fields[0])
        for n1, n2, n3 in itertools.product((0, 1), repeat=3):
            if n1 + n2 + n3 == 2:
                cubic += fields[n1] * fields[n2] * fields[n3]
        np.testing.assert_allclose(cubic, 3.0 * fields[0] * fields[1] ** 2,
                                   rtol=1e-12)
        d1 = nu1[d].field.derivative().values
        w0 = hm.w0.values
        f1 = forcing_term(1, d, hm).values
        d2 = (w0 * nu1[d].field.values - f1) / 4.0
        expected = -cubic - 2 * d * d1 - 4 * hm.grid.nodes * d2
        np.testing.assert_allclose(f2.values, expected, rtol=1e-10, atol=1e-12)

    def test_missing_prior(self, hm):
        with pytest.raises(MissingPrior):
            forcing_term(2, 2, hm, ())

    def test_wrong_prior_rejected(self, hm, nu1):
        with pytest.raises(MissingPrior):
            forcing_term(2, 2, hm, (nu1[3],))


class TestSolveCorrection:
    def test_residual(self, nu1):
        for cf in nu1.values():
            assert cf.residual_norm <= 1e-10

    def test_diagonal_dominance_margin_positive(self, nu1):
        # W0 > 0 makes the discrete operator strictly diagonally dominant
        for cf in nu1.values():
            assert cf.diagonal_dominance_margin > 0

    def test_right_boundary_is_series_value(self, hm, nu1):
        hi = hm.window[1]
        for d, cf in nu1.items():
            assert cf.field.values[-1] == pytest.approx(
                float(tf.correction_tail_series(d).evaluate(hi)), abs=1e-15)

    def test_left_boundary_zero_and_decay(self, nu1):
        for cf in nu1.values():
            assert cf.field.values[0] == 0.0
            nodes = cf.grid.nodes
            # decays super-exponentially on the left; ~1e-7 by y=-15 and
            # below 1e-8 once y <= -17
            assert np.max(np.abs(cf.field.values[nodes <= -15.0])) < 1e-6
            assert np.max(np.abs(cf.field.values[nodes <= -17.0])) < 1e-8

    def test_second_order_correction_solves(self, hm, nu1):
        cf2 = solve_correction(2, 3, hm, (nu1[3],))
        assert cf2.residual_norm <= 1e-10
        assert cf2.boundary_value_right == 0.0
        # decays on both sides
        assert abs(cf2.field.values[5]) < 1e-8

    def test_pointwise_tail_ratio(self, nu1):
        # y^(3/2) v1 -> (1-d)/2 along y = 10, 20, 30 for d = 2, 3, and
        # y^(9/2) v1 -> 15/2 for d = 1, approaching monotonically
        for d in (2, 3):
            cf = nu1[d]
            vals = [cf.evaluate(yv) * yv ** 1.5 for yv in (10.0, 20.0, 30.0)]
            gaps = [abs(v - (1 - d) / 2.0) for v in vals]
            assert gaps[2] < gaps[1] < gaps[0]
            assert gaps[2] < 0.01 * abs((1 - d) / 2.0)
        cf = nu1[1]
        vals = [cf.evaluate(yv) * yv ** 4.5 for yv in (10.0, 20.0, 30.0)]
        gaps = [abs(v - 7.5) for v in vals]
        assert gaps[2] < gaps[1] < gaps[0]
        assert gaps[2] < 0.05 * 7.5

    def test_third_order_chain(self, hm, nu1):
        cf2 = solve_correction(2, 3, hm, (nu1[3],))
        cf3 = solve_correction(3, 3, hm, (nu1[3], cf2))
        assert cf3.residual_norm <= 1e-10
        assert abs(cf3.field.values[5]) < 1e-8  # decays on the left

    def test_dimension_validation(self, hm):
        with pytest.raises(ValueError):
            solve_correction(1, 4, hm)

    def test_singular_operator_detected(self, hm):
        w0_bad = ScalarField(hm.grid, hm.w0.values - hm.w0.values.min() - 1e-3)
        hm_bad = dataclasses.replace(hm, w0=w0_bad)
        with pytest.raises(SingularOperator):
            solve_correction(1, 2, hm_bad)

    def test_linearity_alpha_two(self, hm):
        # solve with a scaled forcing: solution scales exactly
        f1 = forcing_term(1, 2, hm)
        base = solve_correction(1, 2, hm, forcing=f1, bc_right=0.0)
        doubled = solve_correction(
            1, 2, hm, forcing=ScalarField(hm.grid, 2.0 * f1.values), bc_right=0.0)
        np.testing.assert_allclose(doubled.field.values, 2.0 * base.field.values,
                                   rtol=0, atol=1e-13)

    def test_dimension_superposition(self, hm, nu1):
        # the forcing and the tail data are affine in d, so corrections
        # satisfy v1(d=1) - 2 v1(d=2) + v1(d=3) = 0
        combo = (nu1[1].field.values - 2.0 * nu1[2].field.values
                 + nu1[3].field.values)
        assert np.max(np.abs(combo)) < 1e-9

    def test_refinement_convergence(self, hm_refined):
        coarse_hm = tf.solve_hastings_mcleod(n_nodes=7001)
        mid_hm = tf.solve_hastings_mcleod(n_nodes=14001)
        vals = {}
        for tag, source in (("2h", coarse_hm), ("h", mid_hm),
                            ("ref", hm_refined)):
            idx = source.grid.index_of(0.0)
            vals[tag] = solve_correction(1, 3, source).field.values[idx]
        e1 = abs(vals["2h"] - vals["ref"])
        e2 = abs(vals["h"] - vals["ref"])
        assert e1 / e2 > 8.0  # declared order 4

    def test_against_collocation_oracle(self, hm, nu1):
        d = 3

        def rhs(x, u):
            w0 = 3.0 * hm.evaluate(x) ** 2 - x
            dv = hm.derivative(x)
            d2v = (hm.evaluate(x) ** 3 - x * hm.evaluate(x)) / 4.0
            f1 = -2 * d * dv - 4 * x * d2v
            return np.vstack([u[1], (w0 * u[0] - f1) / 4.0])

        def bc(ua, ub):
            return np.array([ua[0],
                             ub[0] - float(tf.correction_tail_series(d).evaluate(40.0))])

        x = np.linspace(-30.0, 40.0, 2001)
        sol = solve_bvp(rhs, bc, x, np.zeros((2, x.size)), tol=1e-10,
                        max_nodes=400000)
        assert sol.status == 0
        i0 = hm.grid.index_of(0.0)
        assert nu1[d].field.values[i0] == pytest.approx(float(sol.sol(0.0)[0]),
                                                        abs=5e-8)


class TestTailFit:
    def test_exponent_and_coefficient(self, nu1):
        expected = {1: (-4.5, 7.5), 2: (-1.5, -0.5), 3: (-1.5, -1.0)}
        for d, cf in nu1.items():
            expo, coef = tf.correction_tail_fit(cf)
            assert expo == pytest.approx(expected[d][0], abs=0.2)
            assert coef == pytest.approx(expected[d][1], rel=0.10)

    def test_d23_tight_tolerances(self, nu1):
        # the leading tails carry (1-d)/2 to better than a percent
        for d in (2, 3):
            expo, coef = tf.correction_tail_fit(nu1[d])
            assert expo == pytest.approx(-1.5, abs=0.05)
            assert coef == pytest.approx((1 - d) / 2.0, rel=0.05)

    def test_noisy_tail_rejected(self, hm, nu1):
        wiggly = ScalarField(hm.grid,
                             nu1[3].field.values
                             * (1.0 + 0.5 * np.sin(hm.grid.nodes)))
        cf = dataclasses.replace(nu1[3], field=wiggly)
        with pytest.raises(TailTooNoisy):
            tf.correction_tail_fit(cf)

    def test_fit_window_validation(self, nu1):
        with pytest.raises(ValueError):
            tf.correction_tail_fit(nu1[3], fit_window=(2.0, 10.0))


class TestSerialization:
    def test_round_trip(self, nu1, tmp_path):
        from tflimit.corrections import load_correction, save_correction
        p1, p2 = tmp_path / "nu1_d3.txt", tmp_path / "again.txt"
        save_correction(nu1[3], p1)
        text = p1.read_text().splitlines()
        assert text[0] == "# tflimit-correction-v1"
        assert "order_n=1" in text[1]
        assert "dimension_d=3" in text[1]
        loaded = load_correction(p1)
        np.testing.assert_array_equal(loaded.field.values, nu1[3].field.values)
        assert loaded.order_n == 1 and loaded.dimension_d == 3
        save_correction(loaded, p2)
        assert p1.read_bytes() == p2.read_bytes()
