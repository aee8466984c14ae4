"""Order verification of the trap-weighted truncated integrals."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

import tflimit as tf
from tflimit.errors import CaseMismatch, QuadratureBudget
from tflimit.weighted_integrals import PROBES, TestIntegrand


def left_supported_integrand():
    return TestIntegrand(
        evaluator=lambda y: np.exp(np.minimum(y, 0.0)) * (np.asarray(y) <= 0),
        closed_form_integral=1.0, closed_form_first_moment=-1.0,
        alpha=math.inf, tail_amplitude=0.0, label="exp-left")


class TestTruncatedIntegral:
    def test_weight_is_identity_in_2d(self):
        g = tf.power_tail_integrand(2.0)
        eps = 1e-2
        t = tf.truncated_weighted_integral(g, eps, 2)
        ref = (quad(g, -np.inf, 0.0, epsabs=1e-13)[0]
               + quad(g, 0.0, eps ** (-2 / 3), epsabs=1e-13, limit=400)[0])
        assert t == pytest.approx(ref, abs=1e-10)

    def test_zero_integrand(self):
        zero = TestIntegrand(lambda y: np.zeros_like(np.asarray(y, dtype=float)),
                             0.0, 0.0, math.inf, 0.0, "zero")
        assert tf.truncated_weighted_integral(zero, 1e-3, 1) == 0.0

    @pytest.mark.parametrize("d", (1, 2, 3))
    def test_left_supported_limit(self, d):
        g = left_supported_integrand()
        vals = [tf.truncated_weighted_integral(g, eps, d) for eps in (1e-2, 1e-4)]
        assert vals[0] == pytest.approx(1.0, abs=0.03)
        assert abs(vals[1] - 1.0) < abs(vals[0] - 1.0) + 1e-12

    def test_epsilon_validation(self):
        g = tf.power_tail_integrand(2.0)
        with pytest.raises(ValueError):
            tf.truncated_weighted_integral(g, 2.0, 1)
        with pytest.raises(ValueError):
            tf.truncated_weighted_integral(g, 1e-2, 4)

    def test_quadrature_budget(self):
        g = tf.power_tail_integrand(2.0)
        with pytest.raises(QuadratureBudget):
            tf.truncated_weighted_integral(g, 1e-3, 1, tol=0.0)


class TestIntegrandBounds:
    @pytest.mark.parametrize("alpha", (0.5, 1.5, 2.5, 3.0))
    def test_envelope_sampled(self, alpha):
        # |g(y)| <= C e^y for y <= 0 and <= C y^(-alpha) for y >= 1
        g = tf.power_tail_integrand(alpha, scale=2.0)
        y_neg = np.linspace(-30.0, 0.0, 61)
        assert np.all(np.abs(g(y_neg)) <= 1.0001 * np.exp(y_neg))
        y_pos = np.logspace(0.0, 4.0, 41)
        C = 2.0 ** alpha  # tail amplitude of the scaled family
        assert np.all(np.abs(g(y_pos)) <= 1.0001 * C * y_pos ** (-alpha))

    def test_bounded_everywhere(self):
        g = tf.power_tail_integrand(1.5)
        y = np.linspace(-50, 500, 2001)
        assert np.all(np.abs(g(y)) <= 1.0)


class TestPrediction:
    def test_case3_d2_is_plain_integral(self):
        g = tf.power_tail_integrand(2.5)
        assert tf.lemma_prediction(g, 1e-3, 2, 3) == g.closed_form_integral

    def test_case_mismatch(self):
        g = tf.power_tail_integrand(1.0)
        with pytest.raises(CaseMismatch):
            tf.lemma_prediction(g, 1e-3, 2, 2)
        with pytest.raises(CaseMismatch):
            tf.lemma_prediction(tf.power_tail_integrand(2.0), 1e-3, 2, 3)

    def test_case_validation(self):
        g = tf.power_tail_integrand(3.0)
        with pytest.raises(ValueError):
            tf.lemma_prediction(g, 1e-3, 2, 4)

    def test_case1_growth_constant(self):
        from scipy.special import beta as beta_fn
        g = tf.power_tail_integrand(0.5, scale=2.0)
        expected = 2.0 ** 0.5 * beta_fn(0.5, 1.5)
        assert tf.lemma_prediction(g, 1e-3, 3, 1) == pytest.approx(expected, rel=1e-12)

    @given(st.floats(min_value=2.51, max_value=4.0),
           st.sampled_from((1, 2, 3)))
    @settings(max_examples=15, deadline=None)
    def test_case3_reduces_to_case2_at_d2(self, alpha, d):
        g = tf.power_tail_integrand(alpha)
        p3 = tf.lemma_prediction(g, 1e-3, d, 3)
        p2 = tf.lemma_prediction(g, 1e-3, d, 2)
        if d == 2:
            assert p3 == p2
        else:
            assert p3 != p2


class TestOrders:
    def test_table_all_pass(self, order_rows):
        for row in order_rows:
            assert row.passed, row

    def test_case2_one_sided_at_threshold(self):
        # module-level bound check: |T - int g| <= K eps^(1/3); any alpha=3/2
        # member fits with slope >= 0.33 - 0.05 (it can only decay faster)
        eps_grid = np.logspace(-2, -4, 5)
        for d in (1, 2, 3):
            g = tf.power_tail_integrand(1.5)
            errs = [abs(tf.truncated_weighted_integral(g, e, d)
                        - tf.lemma_prediction(g, e, d, 2)) for e in eps_grid]
            slope = np.polyfit(np.log(eps_grid), np.log(errs), 1)[0]
            assert slope >= 0.33 - 0.05

    def test_case3_one_sided_alpha3_d3(self):
        eps_grid = np.logspace(-2, -4, 5)
        g = tf.power_tail_integrand(3.0)
        errs = [abs(tf.truncated_weighted_integral(g, e, 3)
                    - tf.lemma_prediction(g, e, 3, 3)) for e in eps_grid]
        slope = np.polyfit(np.log(eps_grid), np.log(errs), 1)[0]
        assert slope >= 1.0 - 0.1

    @pytest.mark.parametrize("d", (1, 3))
    def test_left_supported_case3_beats_generic(self, d):
        # weight analytic on the support: error is O(eps^{4/3}) or better
        g = left_supported_integrand()
        eps_grid = np.logspace(-1.5, -3.5, 5)
        errs = [abs(tf.truncated_weighted_integral(g, e, d)
                    - tf.lemma_prediction(g, e, d, 3)) for e in eps_grid]
        slope = np.polyfit(np.log(eps_grid), np.log(errs), 1)[0]
        assert slope >= 4.0 / 3.0 - 0.1

    def test_left_supported_case3_exact_in_2d(self):
        g = left_supported_integrand()
        err = abs(tf.truncated_weighted_integral(g, 1e-3, 2)
                  - tf.lemma_prediction(g, 1e-3, 2, 3))
        assert err < 1e-10

    def test_probe_designs_are_hypothesis_compliant(self):
        from tflimit.weighted_integrals import CASE_MIN_ALPHA
        for (case, _), probe in PROBES.items():
            assert probe["alpha"] >= CASE_MIN_ALPHA[case]
