"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Criterion 5 is asserted exactly as specified (leading-constant agreement to
1% at eps=0.04 in every dimension).  The d=1 case passes; for d=2 and d=3
the eps^2 ln(eps) term of the expansion alone is ~2.4% and ~4.9% of the
leading constant at eps=0.04, so the stated tolerance is mathematically
unattainable there and the test reports the measured deviations.
"""

import math
import time

import numpy as np
import pytest

import tflimit as tf

DIMS = (1, 2, 3)
SWEEP = (0.16, 0.08, 0.04, 0.02)


def _line(num, ok, detail):
    print(f"\ncriterion {num}: {'PASS' if ok else 'FAIL'} - {detail}")
    return ok


class TestAcceptance:
    def test_criterion_1_profile_solve(self):
        t0 = time.perf_counter()
        hm = tf.solve_hastings_mcleod()
        seconds = time.perf_counter() - t0
        checks = {
            "residual": hm.residual_norm <= 1e-10,
            "monotone": bool(np.all(np.diff(hm.field.values) > 0)),
            "W0>0": bool(hm.w0.values.min() > 0),
            "runtime": seconds <= 10.0,
        }
        ok = _line(1, all(checks.values()),
                   f"residual {hm.residual_norm:.2e}, min W0 "
                   f"{hm.w0.values.min():.4f}, {seconds:.2f} s ({checks})")
        assert ok

    def test_criterion_2_tail_match_and_recurrence(self, hm):
        nodes = hm.grid.nodes
        mask = (nodes >= 20.0) & (nodes <= 40.0)
        y = nodes[mask]
        diff = np.abs(hm.field.values[mask] - tf.nu0_tail_plus(y, 5))
        keep = diff > 5e-13
        slope = float(np.polyfit(np.log(y[keep]), np.log(diff[keep]), 1)[0])
        b = tf.b_integers(11)
        checks = {
            "slope<=-5.5": slope <= -6.0 + 0.5,
            "b2": b[2] == -4,
            "b3": b[3] == 0,
            "odd_zero": all(b[k] == 0 for k in range(1, 12, 2)),
        }
        ok = _line(2, all(checks.values()),
                   f"tail-match slope {slope:.2f}, b2={b[2]}, b3={b[3]}")
        assert ok

    def test_criterion_3_correction_tails(self, nu1):
        expected = {1: (-4.5, 7.5), 2: (-1.5, -0.5), 3: (-1.5, -1.0)}
        results = {}
        ok = True
        for d in DIMS:
            expo, coef = tf.correction_tail_fit(nu1[d])
            e_ref, c_ref = expected[d]
            good = (abs(expo - e_ref) <= 0.2
                    and abs(coef - c_ref) <= 0.10 * abs(c_ref))
            results[d] = (round(expo, 3), round(coef, 4), good)
            ok &= good
        ok = _line(3, ok, f"fits (exponent, coefficient) per d: {results}")
        assert ok

    def test_criterion_4_identity_suite(self, hm, ground_state):
        lhs, rhs = tf.virial_identity_check(hm)
        virial_ok = abs(lhs - rhs) <= 1e-6
        worst = 0.0
        states = [ground_state(eps, d) for d in DIMS
                  for eps in (0.2, 0.16, 0.1, 0.08, 0.05, 0.04, 0.02)]
        for st in states:
            r1 = abs(st.E_total + 0.5 * st.quartic_integral) / abs(st.E_total)
            r2 = abs(st.E_kinetic - (2 * st.E_total - st.E_potential)) / st.E_kinetic
            worst = max(worst, r1, r2)
        ok = _line(4, virial_ok and worst <= 1e-8,
                   f"virial gap {abs(lhs - rhs):.2e}, worst identity residual "
                   f"{worst:.2e} over {len(states)} states")
        assert ok

    def test_criterion_5_leading_constants(self, ground_state):
        results = {}
        ok = True
        for d in DIMS:
            c = {1: -8 / 15, 2: -math.pi / 6, 3: -16 * math.pi / 105}[d]
            devs = [abs(ground_state(eps, d).E_total - c) / abs(c)
                    for eps in (0.16, 0.08, 0.04)]
            monotone = devs[0] > devs[1] > devs[2]
            within = devs[2] <= 0.01
            results[d] = {"dev@0.04": f"{100 * devs[2]:.2f}%",
                          "monotone": monotone, "within_1pct": within}
            ok &= monotone and within
        ok = _line(5, ok, f"{results}")
        assert ok, ("the eps^2 ln eps term alone exceeds 1% of the leading "
                    f"constant at eps=0.04 for d=2,3: {results}")

    def test_criterion_6_expansion_reproduction(self, hm, coeffs):
        # fresh solves (no session cache) so the reported runtime is honest
        t0 = time.perf_counter()
        closed_const = {1: -8 / 15, 2: -math.pi / 6, 3: -16 * math.pi / 105}
        closed_log = {1: -2 / 3, 2: -2 * math.pi / 3, 3: -4 * math.pi / 3}
        slopes = {}
        ok = True
        for d in DIMS:
            c = coeffs[("total", d)]
            ok &= abs(c.c_const - closed_const[d]) <= 1e-12
            ok &= abs(c.c_log - closed_log[d]) <= 1e-12
            rep = tf.verify_expansion(d, SWEEP, c, nu0=hm)
            slopes[d] = round(rep.slope, 3)
            ok &= rep.slope >= 2.7
        seconds = time.perf_counter() - t0
        ok &= seconds <= 600.0
        ok = _line(6, ok, f"slopes {slopes} (threshold 2.7), closed-form "
                          f"const/log matched to 1e-12, {seconds:.2f} s")
        assert ok

    def test_criterion_7_weighted_integral_orders(self, order_rows):
        fails = [r for r in order_rows if not r.passed]
        by_case = {}
        for r in order_rows:
            by_case.setdefault((r.case, r.dimension_d), []).append(round(r.slope, 3))
        ok = _line(7, not fails, f"fitted slopes by (case, d): {by_case}")
        assert ok, fails

    def test_criterion_8_remainder_boundedness(self, hm, nu1, ground_state):
        ok = True
        details = {}
        i0 = hm.grid.index_of(0.0)
        for d in DIMS:
            norms = []
            gaps = []
            for eps in (0.2, 0.1, 0.05):
                st = ground_state(eps, d)
                R0 = tf.extract_remainder(st, hm, [nu1[d]], N=0,
                                          y_window=(-8.0, 2.8), n_probe=541)
                norms.append(float(np.max(np.abs(R0.values))))
                at0 = R0.values[R0.grid.index_of(0.0)]
                gaps.append(float(abs(at0 - nu1[d].field.values[i0])))
            ratio = max(norms) / min(norms)
            shrink = gaps[0] > gaps[1] > gaps[2]
            details[d] = {"max/min": round(ratio, 3),
                          "gaps": [round(g, 4) for g in gaps]}
            ok &= ratio < 2.0 and shrink
        ok = _line(8, ok, f"{details}")
        assert ok

    def test_criterion_9_dps_bracket(self, hm, hm_extended):
        C, _ = tf.dps_constant(hm)
        gap = abs(tf.physical_kinetic_energy(5.0, hm, dps=C)
                  - tf.physical_kinetic_energy_direct(5.0, hm, dps=C))
        C2, _ = tf.dps_constant(hm_extended)
        stability = abs(C - C2)
        ok = _line(9, gap <= 1e-10 and stability <= 1e-4,
                   f"bracket route gap {gap:.2e}, C={C:.9f}, window shift "
                   f"{stability:.2e}")
        assert ok
