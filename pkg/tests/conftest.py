"""Shared solver fixtures; everything expensive is solved once per session."""

import numpy as np
import pytest

import tflimit as tf

DIMS = (1, 2, 3)


@pytest.fixture(scope="session")
def hm():
    return tf.solve_hastings_mcleod()


@pytest.fixture(scope="session")
def hm_refined():
    return tf.solve_hastings_mcleod(n_nodes=32201)


@pytest.fixture(scope="session")
def hm_extended():
    return tf.solve_hastings_mcleod(window=(30.0, 60.0), n_nodes=20701)


@pytest.fixture(scope="session")
def nu1(hm):
    return {d: tf.solve_correction(1, d, hm) for d in DIMS}


@pytest.fixture(scope="session")
def nu1_extended(hm_extended):
    return {d: tf.solve_correction(1, d, hm_extended) for d in DIMS}


@pytest.fixture(scope="session")
def table(hm, nu1):
    return tf.integral_table(hm, nu1)


@pytest.fixture(scope="session")
def coeffs(table):
    out = {}
    for d in DIMS:
        tot = tf.energy_expansion_coeffs(d, table)
        pot = tf.potential_expansion_coeffs(d, table)
        out[("total", d)] = tot
        out[("potential", d)] = pot
        out[("kinetic", d)] = tf.kinetic_expansion_coeffs(d, tot, pot)
    return out


class GroundStateCache:
    """Memoized ground-state solves; also usable as the ``states`` mapping
    of verify_expansion (keys (eps, d) solve lazily at default resolution)."""

    def __init__(self, nu0):
        self.nu0 = nu0
        self.cache = {}

    def __call__(self, eps, d, layer_points=400):
        key = (eps, d, layer_points)
        if key not in self.cache:
            self.cache[key] = tf.solve_ground_state(eps, d, nu0=self.nu0,
                                                    layer_points=layer_points)
        return self.cache[key]

    def __contains__(self, key):
        return True

    def __getitem__(self, key):
        eps, d = key
        return self(eps, d)


@pytest.fixture(scope="session")
def ground_state(hm):
    return GroundStateCache(hm)


@pytest.fixture(scope="session")
def order_rows():
    return tf.order_table()
