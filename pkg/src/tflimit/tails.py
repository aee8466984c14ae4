"""Asymptotic tail series of the boundary-layer profile and its corrections.

The Hastings-McLeod branch of the rescaled Painleve-II equation

    4 v''(y) + y v(y) - v(y)^3 = 0

behaves like sqrt(y) for y -> +infinity, with an algebraic correction series
in powers of y^(-3/2), and decays super-exponentially for y -> -infinity.
This module generates the series coefficients by exact rational recurrences
and provides a small algebra (add/multiply/integrate) for power series on the
exponent ladder p - 3k/2, which is closed under the products that appear in
the regularized energy integrals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

__all__ = [
    "TailSeries",
    "b_coefficients",
    "b_integers",
    "nu0_tail_series",
    "nu0_tail_plus",
    "nu0_tail_minus",
    "correction_tail_coefficients",
    "correction_tail_series",
]

#: exponent decrement between consecutive series terms
STEP = 1.5


@dataclass(frozen=True)
class TailSeries:
    """Algebraic series  y^p * sum_k coeffs[k] * (scale*y)^(-3k/2).

    ``scale`` keeps the conventional normalization of the Painleve series
    (scale=2) representable without rescaling its integer coefficients;
    arithmetic normalizes to scale=1.  ``exact`` marks a complete finite
    expression (e.g. a counter-term monomial) rather than a truncation, so
    products do not cut the partner series down to its length.
    """

    leading_power: float
    coeffs: tuple
    scale: float = 1.0
    step: float = STEP
    exact: bool = False

    def __post_init__(self):
        if self.step != STEP:
            raise ValueError("series ladder is fixed at step 3/2")

    @property
    def n_terms(self):
        return len(self.coeffs)

    def term_powers(self):
        return np.array([self.leading_power - STEP * k for k in range(self.n_terms)])

    def unit_scale(self) -> "TailSeries":
        """Equivalent series with scale 1 (coefficients absorbed)."""
        if self.scale == 1.0:
            return self
        c = tuple(float(a) * self.scale ** (-STEP * k) for k, a in enumerate(self.coeffs))
        return TailSeries(self.leading_power, c, 1.0, exact=self.exact)

    def evaluate(self, y, n_terms=None):
        """Evaluate the truncated series at y > 0."""
        y = np.asarray(y, dtype=float)
        if np.any(y <= 0):
            raise ValueError("tail series is defined for y > 0 only")
        m = self.n_terms if n_terms is None else min(n_terms, self.n_terms)
        out = np.zeros_like(y)
        for k in range(m):
            a = float(self.coeffs[k])
            if a != 0.0:
                out += a * (self.scale * y) ** (-STEP * k)
        return out * y ** self.leading_power

    def __call__(self, y, n_terms=None):
        return self.evaluate(y, n_terms)

    def __add__(self, other: "TailSeries") -> "TailSeries":
        a, b = self.unit_scale(), other.unit_scale()
        # align ladders: powers must differ by a multiple of 3/2
        shift = (a.leading_power - b.leading_power) / STEP
        if abs(shift - round(shift)) > 1e-12:
            raise ValueError("series ladders are incompatible")
        shift = int(round(shift))
        if shift < 0:
            a, b, shift = b, a, -shift
        n = max(a.n_terms, b.n_terms + shift)
        c = [0.0] * n
        for k, v in enumerate(a.coeffs):
            c[k] += v
        for k, v in enumerate(b.coeffs):
            c[k + shift] += v
        return TailSeries(a.leading_power, tuple(c), 1.0,
                          exact=a.exact and b.exact)

    def __mul__(self, other):
        if np.isscalar(other):
            return TailSeries(self.leading_power,
                              tuple(float(other) * a for a in self.coeffs),
                              self.scale, exact=self.exact)
        a, b = self.unit_scale(), other.unit_scale()
        # an exact factor does not limit how far the product is reliable
        limits = [s.n_terms for s in (a, b) if not s.exact]
        n = min(limits) if limits else a.n_terms + b.n_terms - 1
        n = min(n, a.n_terms + b.n_terms - 1)
        c = [0.0] * n
        for i, ai in enumerate(a.coeffs):
            if i >= n:
                break
            for j, bj in enumerate(b.coeffs):
                if i + j >= n:
                    break
                c[i + j] += ai * bj
        return TailSeries(a.leading_power + b.leading_power, tuple(c), 1.0,
                          exact=a.exact and b.exact)

    __rmul__ = __mul__

    def shift_power(self, dp) -> "TailSeries":
        """Multiply by y^dp (e.g. dp=1 for the first-moment integrands)."""
        return TailSeries(self.leading_power + dp, self.coeffs, self.scale,
                          exact=self.exact)

    def differentiate(self) -> "TailSeries":
        s = self.unit_scale()
        c = tuple(a * (s.leading_power - STEP * k) for k, a in enumerate(s.coeffs))
        return TailSeries(s.leading_power - 1.0, c, 1.0, exact=s.exact)

    def truncated(self, n_terms) -> "TailSeries":
        return TailSeries(self.leading_power, self.coeffs[:n_terms], self.scale,
                          exact=False)

    def integral_beyond(self, L):
        """Closed form of int_L^inf of the series; every term must decay."""
        s = self.unit_scale()
        tot = 0.0
        for k, a in enumerate(s.coeffs):
            p = s.leading_power - STEP * k
            if a == 0.0:
                continue
            if p >= -1.0:
                raise ValueError(f"series term y^{p} is not integrable at infinity")
            tot += a * L ** (p + 1) / (-(p + 1))
        return tot

    def integral_tail_estimate(self, L):
        """Magnitude of the last kept term's tail integral (truncation estimate)."""
        s = self.unit_scale()
        for k in range(s.n_terms - 1, -1, -1):
            a = s.coeffs[k]
            p = s.leading_power - STEP * k
            if a != 0.0 and p < -1.0:
                return abs(a) * L ** (p + 1) / (-(p + 1))
        return 0.0


@lru_cache(maxsize=None)
def b_integers(n_max: int):
    """Coefficients b_0..b_n_max of the right-tail series, by exact recurrence.

    b_0 = 1, b_1 = 0 and

        b_{n+2} = 4 (9 n^2 - 1) b_n
                  - (3/2) sum_{m=1}^{n+1} b_m b_{n+2-m}
                  - (1/2) sum_{l=1}^{n} sum_{m=1}^{n+1-l} b_l b_m b_{n+2-l-m}.

    The recurrence preserves integrality; exact rational arithmetic is used
    throughout, so there is no overflow for any practical n_max.
    """
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    b = [Fraction(1), Fraction(0)]
    for n in range(0, n_max - 1):
        s2 = sum(b[m] * b[n + 2 - m] for m in range(1, n + 2))
        s3 = sum(b[l] * b[m] * b[n + 2 - l - m]
                 for l in range(1, n + 1) for m in range(1, n + 2 - l))
        b.append(4 * (9 * n * n - 1) * b[n] - Fraction(3, 2) * s2 - Fraction(1, 2) * s3)
    return tuple(int(v) if v.denominator == 1 else v for v in b[: n_max + 1])


def b_coefficients(n_max: int) -> TailSeries:
    """Right-tail series of the layer profile: sqrt(y) * sum b_n (2y)^(-3n/2)."""
    return TailSeries(0.5, tuple(float(v) for v in b_integers(n_max)), scale=2.0)


def nu0_tail_series(n_terms: int = 12) -> TailSeries:
    return b_coefficients(n_terms - 1)


def nu0_tail_plus(y, n_terms: int = 5):
    """Truncated right-tail approximation of the layer profile (y > 0)."""
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    y_arr = np.asarray(y, dtype=float)
    if np.any(y_arr <= 0):
        raise ValueError("right tail requires y > 0")
    out = b_coefficients(n_terms - 1).evaluate(y_arr)
    return float(out) if np.isscalar(y) else out


def nu0_tail_minus(y):
    """Leading decaying approximation for y < 0.

    WKB balance of 4 v'' = -y v gives

        v(y) ~ (-y)^(-1/4) / sqrt(pi) * exp(-(1/3) (-y)^(3/2)),

    i.e. a *decaying* algebraic prefactor; this matches the Airy-function
    connection v ~ 2^(5/6) Ai(2^(-2/3) |y|) exactly, and the ratio test
    against the solved profile confirms it empirically.
    """
    y_arr = np.asarray(y, dtype=float)
    if np.any(y_arr >= 0):
        raise ValueError("left tail requires y < 0")
    out = (-y_arr) ** -0.25 / np.sqrt(np.pi) * np.exp(-((-y_arr) ** 1.5) / 3.0)
    return float(out) if np.isscalar(y) else out


@lru_cache(maxsize=None)
def correction_tail_coefficients(d: int, m_max: int = 10):
    """Tail coefficients h_m of the first correction: v1 ~ sum h_m y^(-3/2-3m/2).

    Obtained by inserting the ladder ansatz into the linearized equation
    -4 v1'' + (3 v0^2 - y) v1 = -2 d v0' - 4 y v0'' and matching powers
    y^(-1/2-3k/2):

        2 h_k = -c_k [(9k^2 - 1) + d - 3dk] + 4 mu_{k-2} h_{k-2}
                - 3 sum_{i=1}^{k} s_i h_{k-i},

    with c_n the unit-scale profile coefficients, s = c*c (its square) and
    mu_m = (3m+3)(3m+5)/4.  In particular h_0 = (1-d)/2 and, for d = 1 where
    h_0 vanishes, the leading behaviour is h_2 y^(-9/2) with h_2 = 15/2.
    """
    if d not in (1, 2, 3):
        raise ValueError("dimension must be 1, 2 or 3")
    c = [float(b) * 2.0 ** (-STEP * n) for n, b in enumerate(b_integers(m_max + 2))]
    s = [sum(c[i] * c[k - i] for i in range(k + 1)) for k in range(m_max + 3)]
    h = []
    for k in range(m_max + 1):
        acc = -c[k] * ((9 * k * k - 1) + d - 3 * d * k)
        if k >= 2:
            m = k - 2
            acc += (3 * m + 3) * (3 * m + 5) * h[m]
        acc -= 3 * sum(s[i] * h[k - i] for i in range(1, k + 1))
        h.append(acc / 2.0)
    return tuple(h)


def correction_tail_series(d: int, m_max: int = 10) -> TailSeries:
    return TailSeries(-1.5, correction_tail_coefficients(d, m_max), scale=1.0)
