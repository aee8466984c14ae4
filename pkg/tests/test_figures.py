"""Figure rendering smoke tests (Agg backend, PNG outputs)."""

import numpy as np

import tflimit as tf
from tflimit import figures


def test_profile_figure(hm, tmp_path):
    out = figures.profile_figure(hm, tmp_path / "p.png")
    assert out.exists() and out.stat().st_size > 1000


def test_corrections_figure(nu1, tmp_path):
    out = figures.corrections_figure(list(nu1.values()), tmp_path / "c.png")
    assert out.exists()


def test_verification_figure(hm, coeffs, ground_state, tmp_path):
    rep = tf.verify_expansion(1, (0.16, 0.08, 0.04), coeffs[("total", 1)],
                              nu0=hm, states=ground_state)
    out = figures.verification_figure([rep], tmp_path / "v.png")
    assert out.exists()


def test_lemma_figure(order_rows, tmp_path):
    out = figures.lemma_figure(order_rows, tmp_path / "l.png")
    assert out.exists()


def test_remainder_figure(hm, nu1, ground_state, tmp_path):
    fields = {}
    for eps in (0.2, 0.1):
        st = ground_state(eps, 3)
        fields[eps] = tf.extract_remainder(st, hm, [nu1[3]], N=0,
                                           y_window=(-8.0, 2.8), n_probe=541)
    out = figures.remainder_figure(fields, tmp_path / "r.png", nu1=nu1[3])
    assert out.exists()
