"""Regularized integrals and energy-expansion coefficients.

Every energy functional of the ground state expands, per dimension d, as

    c_const + c_log e^2 ln(e) + c_eps2 e^2 + c_eps83 e^(8/3) + O(e^3),

with coefficients assembled from six regularized integrals of the layer
profile v0 and its first correction v1:

    g0 = v0^4 - (y+)^2 + (2/y) 1{y>=1}        (decays like y^-4)
    g1 = v0^3 v1 + ((d-1)/2) 1{y>=0}          (decays like y^-3)
    g2 = y (v0^2 - y+) + (1/y) 1{y>=1}        (decays like y^-4)
    g3 = y v0 v1 + ((d-1)/2) 1{y>=0}          (decays like y^-3)

plus the first moments y*g0 and y*g2.  The counter-terms cancel the slow
parts of the integrands; what is left decays algebraically, so each integral
is computed as a windowed quadrature plus the closed-form integral of the
exact tail series beyond the window.  Indicator kinks at y=0 and y=1 sit on
quadrature segment boundaries by construction of the solver grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.integrate import quad

from .corrections import CorrectionFunction
from .errors import (ConsistencyFailure, ExtrapolationUnstable,
                     TailBudgetExceeded)
from .painleve import HastingsMcLeod
from .tails import TailSeries, nu0_tail_minus

__all__ = [
    "SPHERE_MEASURE", "TF_QUARTIC_NORM", "RegularizedIntegrand",
    "IntegralValue", "ExpansionCoefficients", "beta_integral",
    "regularized_integrand", "regularized_integral", "integral_table",
    "energy_expansion_coeffs", "potential_expansion_coeffs",
    "kinetic_expansion_coeffs", "virial_identity_check",
    "derivative_energy_integral", "dps_constant",
    "physical_kinetic_energy", "physical_kinetic_energy_direct",
    "write_constants_report", "read_constants_report",
]

#: surface measure |S^{d-1}| (d=1 counts both half-lines)
SPHERE_MEASURE = {1: 2.0, 2: 2.0 * math.pi, 3: 4.0 * math.pi}

#: integral of the squared Thomas-Fermi density, int (1-|x|^2)_+^2 dx
TF_QUARTIC_NORM = {1: 16.0 / 15.0, 2: math.pi / 3.0, 3: 32.0 * math.pi / 105.0}

INTEGRAND_NAMES = ("g0", "g1", "g2", "g3", "y*g0", "y*g2")


class IntegralValue(NamedTuple):
    value: float
    error: float


@dataclass(frozen=True)
class RegularizedIntegrand:
    """One of the six compensated integrands, bound to a dimension."""

    name: str
    dimension_d: int
    decay_alpha: float

    def __post_init__(self):
        if self.name not in INTEGRAND_NAMES:
            raise ValueError(f"unknown integrand {self.name!r}")


def regularized_integrand(name: str, d: int = 3) -> RegularizedIntegrand:
    """Claimed decay rates: g0, g2 are O(y^-5/2); g1, g3 are O(y^-3/2)."""
    rates = {"g0": 2.5, "g2": 2.5, "g1": 1.5, "g3": 1.5,
             "y*g0": 1.5, "y*g2": 1.5}
    if name not in rates:
        raise ValueError(f"unknown integrand {name!r}")
    return RegularizedIntegrand(name, d, rates[name])


def _monomial(power, coeff):
    return TailSeries(power, (coeff,), exact=True)


def _drop_cancelled(series: TailSeries, name: str) -> TailSeries:
    """Strip the (exactly cancelled) non-decaying leading entries."""
    s = series.unit_scale()
    powers = s.term_powers()
    keep = [(a, p) for a, p in zip(s.coeffs, powers) if abs(a) > 1e-9]
    if keep and keep[0][1] >= -1.0:
        raise ConsistencyFailure(
            f"counter-terms failed to cancel the slow tail of {name}")
    if not keep:
        return TailSeries(-4.0, (0.0,))
    lead = keep[0][1]
    n = int(round((lead - keep[-1][1]) / 1.5)) + 1
    arr = [0.0] * n
    for a, p in keep:
        arr[int(round((lead - p) / 1.5))] = a
    return TailSeries(lead, tuple(arr))


def _integrand_parts(which: RegularizedIntegrand, nu0: HastingsMcLeod,
                     nu1: CorrectionFunction | None):
    """Decomposition of one regularized integrand over the solve window.

    Returns (smooth_values, counterterm_integral, counterterm_at_end, tail):
    the smooth profile-dependent part is sampled on the grid (its only kinks
    are weak ones at y=0, which sit on a quadrature segment boundary); the
    discontinuous indicator counter-term is integrated in closed form; the
    tail series represents the full integrand beyond the window.
    """
    y = nu0.grid.nodes
    v0 = nu0.field.values
    d = which.dimension_d
    L = nu0.window[1]
    s0 = nu0.tail_plus.unit_scale()
    name = which.name
    base = name[2:] if name.startswith("y*") else name
    moment = name.startswith("y*")

    if base in ("g1", "g3"):
        if nu1 is None:
            raise ValueError(f"{name} needs the first correction function")
        if nu1.dimension_d != d:
            raise ValueError("correction dimension does not match integrand")
        v1 = nu1.field.values
        s1 = nu1.tail
        w = (d - 1) / 2.0

    yp = np.maximum(y, 0.0)
    if base == "g0":
        smooth = v0 ** 4 - yp ** 2
        sq = s0 * s0
        series = (sq * sq) + _monomial(2.0, -1.0) + _monomial(-1.0, 2.0)
        if moment:
            ct_integral, ct_end = 2.0 * (L - 1.0), 2.0
        else:
            ct_integral, ct_end = 2.0 * math.log(L), 2.0 / L
    elif base == "g2":
        smooth = y * (v0 ** 2 - yp)
        series = ((s0 * s0).shift_power(1.0) + _monomial(2.0, -1.0)
                  + _monomial(-1.0, 1.0))
        if moment:
            ct_integral, ct_end = L - 1.0, 1.0
        else:
            ct_integral, ct_end = math.log(L), 1.0 / L
    elif base == "g1":
        smooth = v0 ** 3 * v1
        series = (s0 * s0 * s0) * s1 + _monomial(0.0, w)
        ct_integral, ct_end = (w * L ** 2 / 2.0, w * L) if moment else (w * L, w)
    elif base == "g3":
        smooth = y * v0 * v1
        series = (s0 * s1).shift_power(1.0) + _monomial(0.0, w)
        ct_integral, ct_end = (w * L ** 2 / 2.0, w * L) if moment else (w * L, w)
    else:  # pragma: no cover
        raise AssertionError(name)

    if moment:
        smooth = y * smooth
        series = series.shift_power(1.0)
    return smooth, ct_integral, ct_end, _drop_cancelled(series, name)


def _quartic_derivative_budget(grid, vals):
    """Conservative composite-Simpson error bound from sampled 4th differences."""
    h = grid.spacing
    f = np.asarray(vals)
    if f.size < 9:
        return np.inf
    d4 = np.abs(f[4:] - 4 * f[3:-1] + 6 * f[2:-2] - 4 * f[1:-3] + f[:-4]) / h ** 4
    # kink neighborhoods produce spurious spikes; clip to the smooth bulk level
    bulk = np.percentile(d4, 99.0)
    return 4.0 * h ** 4 / 180.0 * float(np.sum(np.minimum(d4, bulk)) * h)


def regularized_integral(which: RegularizedIntegrand, nu0: HastingsMcLeod,
                         nu1: CorrectionFunction | None = None,
                         tol: float = 1e-6) -> IntegralValue:
    """Integral over the real line with an explicit error budget.

    Window quadrature on the solver grid, closed-form series tail beyond the
    right end, and a super-exponential bound beyond the left end.  Raises
    TailBudgetExceeded when the budget cannot meet ``tol``.
    """
    smooth, ct_integral, ct_end, tail = _integrand_parts(which, nu0, nu1)
    grid = nu0.grid
    lo, hi = nu0.window
    core = grid.integrate(smooth) + ct_integral
    beyond = tail.integral_beyond(hi)

    # a field/series mismatch at the junction decays into the window over the
    # linearization length 2/sqrt(W0(L+)); keep a 2x safety factor on it
    junction = abs(smooth[-1] + ct_end - tail.evaluate(hi))
    decay_len = 2.0 / math.sqrt(max(nu0.w0.values[-1], 1.0))
    budget = (tail.integral_tail_estimate(hi)
              + 2.0 * decay_len * junction
              + abs(nu0_tail_minus(lo)) * 4.0  # left-tail remainder bound
              + _quartic_derivative_budget(grid, smooth))
    if budget > tol:
        raise TailBudgetExceeded(
            f"{which.name}: error budget {budget:.2e} exceeds tolerance {tol:.1e}")
    return IntegralValue(core + beyond, budget)


def integral_table(nu0: HastingsMcLeod, nu1_by_d: dict, tol=1e-6) -> dict:
    """All six integrals for every dimension with a solved correction."""
    table = {}
    for d, nu1 in sorted(nu1_by_d.items()):
        for name in INTEGRAND_NAMES:
            which = regularized_integrand(name, d)
            needs_nu1 = name in ("g1", "g3")
            table[(name, d)] = regularized_integral(
                which, nu0, nu1 if needs_nu1 else None, tol=tol)
    return table


def beta_integral(d: int) -> float:
    """int_0^1 ((1-t)^(d/2-1) - 1)/t dt by adaptive quadrature.

    The integrand has a removable singularity at t=0; for d=1 the endpoint
    t=1 is integrable and is removed by the substitution u = sqrt(1-t).
    Closed forms (test oracles): 2 ln 2 (d=1), 0 (d=2), 2 ln 2 - 2 (d=3).
    """
    if d == 2:
        return 0.0
    if d == 1:
        val, _ = quad(lambda u: 2.0 / (1.0 + u), 0.0, 1.0, epsabs=1e-14)
        return val

    def f(t):
        if t < 1e-8:
            return -(d / 2.0 - 1.0)  # limit value at t -> 0
        return ((1.0 - t) ** (d / 2.0 - 1.0) - 1.0) / t

    val, _ = quad(f, 0.0, 1.0, epsabs=1e-14, limit=200)
    return val


@dataclass(frozen=True)
class ExpansionCoefficients:
    """Coefficients of one energy functional in one dimension."""

    energy_kind: str
    dimension_d: int
    c_const: float
    c_log: float
    c_eps2: float
    c_eps83: float
    remainder_order: int = 3

    def predict(self, eps):
        eps = np.asarray(eps, dtype=float)
        out = (self.c_const + self.c_log * eps ** 2 * np.log(eps)
               + self.c_eps2 * eps ** 2 + self.c_eps83 * eps ** (8.0 / 3.0))
        return float(out) if out.ndim == 0 else out


def _get(table, name, d):
    return table[(name, d)].value


def energy_expansion_coeffs(d: int, table: dict) -> ExpansionCoefficients:
    """Total-energy coefficients from the bracketed assembly

    E + (1/2)||TF||_4^4 = -(e^2/4)|S^{d-1}| [ (4/3) ln e
        + (4(1-d)/d - 2 B_d + I[g0])
        + ((1-d/2)(2 + I[y g0]) + 4 I[g1]) e^{2/3} + O(e) ].
    """
    S = SPHERE_MEASURE[d]
    return ExpansionCoefficients(
        energy_kind="total", dimension_d=d,
        c_const=-0.5 * TF_QUARTIC_NORM[d],
        c_log=-S / 3.0,
        c_eps2=-(S / 4.0) * (4.0 * (1 - d) / d - 2.0 * beta_integral(d)
                             + _get(table, "g0", d)),
        c_eps83=-(S / 4.0) * ((1.0 - d / 2.0) * (2.0 + _get(table, "y*g0", d))
                              + 4.0 * _get(table, "g1", d)),
    )


def potential_expansion_coeffs(d: int, table: dict) -> ExpansionCoefficients:
    """Potential-energy coefficients; the J-integrals halve the log slope."""
    S = SPHERE_MEASURE[d]
    return ExpansionCoefficients(
        energy_kind="potential", dimension_d=d,
        c_const=-TF_QUARTIC_NORM[d],
        c_log=-S / 3.0,
        c_eps2=-(S / 2.0) * (2.0 * (1 - d) / d - beta_integral(d)
                             + _get(table, "g2", d)),
        c_eps83=-(S / 2.0) * ((1.0 - d / 2.0) * (1.0 + _get(table, "y*g2", d))
                              + 2.0 * _get(table, "g3", d)),
    )


def kinetic_expansion_coeffs(d: int, total: ExpansionCoefficients,
                             potential: ExpansionCoefficients) -> ExpansionCoefficients:
    """Coefficientwise 2*total - potential; the constant must vanish."""
    if total.dimension_d != d or potential.dimension_d != d:
        raise ValueError("dimension mismatch")
    c_const = 2.0 * total.c_const - potential.c_const
    if abs(c_const) > 1e-10:
        raise ConsistencyFailure(
            f"kinetic constant term {c_const:.2e} should vanish")
    return ExpansionCoefficients(
        energy_kind="kinetic", dimension_d=d,
        c_const=0.0,
        c_log=2.0 * total.c_log - potential.c_log,
        c_eps2=2.0 * total.c_eps2 - potential.c_eps2,
        c_eps83=2.0 * total.c_eps83 - potential.c_eps83,
    )


def derivative_energy_integral(nu0: HastingsMcLeod):
    """Compensated derivative integral  int (v0'^2 - 1{y>=1}/(4y)) dy."""
    hi = nu0.window[1]
    smooth = nu0.derivative.values ** 2
    ds = nu0.tail_plus.unit_scale().differentiate()
    series = _drop_cancelled(ds * ds + _monomial(-1.0, -0.25), "v0'^2")
    return (nu0.grid.integrate(smooth) - 0.25 * math.log(hi)
            + series.integral_beyond(hi))


def virial_identity_check(nu0: HastingsMcLeod):
    """Both sides of the derivative-trade identity

        (1/4) int (v0^4 - y v0^2 + 1{y>=1}/y) dy
            = 1/2 - int (v0'^2 - 1{y>=1}/(4y)) dy,

    evaluated with the same window-plus-series tail compensation.
    """
    y = nu0.grid.nodes
    v0 = nu0.field.values
    lhs_smooth = v0 ** 4 - y * v0 ** 2
    s0 = nu0.tail_plus.unit_scale()
    sq = s0 * s0
    lhs_series = _drop_cancelled(
        (sq * sq) + sq.shift_power(1.0) * (-1.0) + _monomial(-1.0, 1.0),
        "v0^4 - y v0^2")
    hi = nu0.window[1]
    lhs = 0.25 * (nu0.grid.integrate(lhs_smooth) + math.log(hi)
                  + lhs_series.integral_beyond(hi))
    rhs = 0.5 - derivative_energy_integral(nu0)
    return lhs, rhs


def _partial_derivative_sq_integral(nu0: HastingsMcLeod, upto):
    """Simpson integral of v0'^2 from the left end to node coordinate ``upto``."""
    grid = nu0.grid
    i = grid.index_of(upto)
    if i % 2:
        raise ValueError("partial integral endpoint must be an even node index")
    h = grid.spacing
    f = nu0.derivative.values[: i + 1] ** 2
    w = np.full(i + 1, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return float(np.dot(w, f) * h / 3.0)


def dps_constant(nu0: HastingsMcLeod, tol=1e-6):
    """Renormalized kinetic constant of the rescaled layer profile.

    With phi(xi) = 2^(-1/3) v0(-2^(2/3) xi) (the inner scale is the inverse
    of the profile-to-phi map; the equivalence phi'' = xi phi + phi^3 holds
    exactly under it),

        C = lim_{A->inf} ( int_{-A}^{inf} phi'(xi)^2 dxi - (1/4) ln A ) - (1/4) ln 2.

    The limit is evaluated on the profile grid via S(A) = int v0'^2 up to
    Y = 2^(2/3) A minus the log counter-term, Richardson-extrapolated over a
    ladder of window fractions with the known error exponents {3, 9/2, 6}.
    Returns (C, error_estimate).
    """
    lo, hi = nu0.window
    if hi < 20.0:
        raise ExtrapolationUnstable("window too small for the A-limit ladder")
    h = nu0.grid.spacing
    ys = []
    for frac in (0.6, 0.7, 0.8, 0.9, 1.0):
        target = hi * frac
        i = int(round((target - lo) / h))
        i -= i % 2
        ys.append(lo + i * h)
    ys = sorted(set(ys))
    ln2 = math.log(2.0)
    svals = np.array([
        _partial_derivative_sq_integral(nu0, Y) - 0.25 * math.log(Y) + ln2 / 6.0
        for Y in ys])
    avals = np.array(ys) * 2.0 ** (-2.0 / 3.0)

    def extrapolate(n_exponents):
        powers = [3.0, 4.5, 6.0][:n_exponents]
        M = np.hstack([np.ones((len(avals), 1)),
                       np.array([[-a ** (-p) for p in powers] for a in avals])])
        sol, *_ = np.linalg.lstsq(M, svals, rcond=None)
        return float(sol[0])

    s2, s3 = extrapolate(2), extrapolate(3)
    err = abs(s3 - s2) + 1e-12
    if err > tol:
        raise ExtrapolationUnstable(
            f"A-limit estimates differ by {err:.2e} (> {tol:.1e})")
    return s3 - 0.25 * ln2, err


def physical_kinetic_energy(R_over_aHO: float, nu0: HastingsMcLeod,
                            dps: float | None = None) -> float:
    """Dimensionless bracket of the harmonic-trap kinetic energy (d=3),

        ln(R/a_HO) - 2 + (7/4) ln 2 + 3 C,

    multiplying 5 N hbar^2 / (2 m R^2)."""
    if R_over_aHO <= 0:
        raise ValueError("R/a_HO must be positive")
    C = dps_constant(nu0)[0] if dps is None else dps
    return math.log(R_over_aHO) - 2.0 + 1.75 * math.log(2.0) + 3.0 * C


def physical_kinetic_energy_direct(R_over_aHO: float, nu0: HastingsMcLeod,
                                   dps: float | None = None) -> float:
    """Same bracket via the un-collapsed form ln(R/a) - 2 + ln 2 + 3(C + (1/4) ln 2)."""
    if R_over_aHO <= 0:
        raise ValueError("R/a_HO must be positive")
    C = dps_constant(nu0)[0] if dps is None else dps
    return (math.log(R_over_aHO) - 2.0 + math.log(2.0)
            + 3.0 * (C + 0.25 * math.log(2.0)))


def read_constants_report(path) -> dict:
    """Parse a key=value constants report back into floats (and the
    per-(kind, d) ExpansionCoefficients it carries)."""
    raw = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, val = line.split("=", 1)
            raw[key] = float(val)
    coeffs = {}
    for kind in ("total", "potential", "kinetic"):
        for d in (1, 2, 3):
            keys = {f: f"{kind}_{f}_d{d}"
                    for f in ("c_const", "c_log", "c_eps2", "c_eps83")}
            if all(k in raw for k in keys.values()):
                coeffs[(kind, d)] = ExpansionCoefficients(
                    energy_kind=kind, dimension_d=d,
                    **{f: raw[k] for f, k in keys.items()})
    raw["coefficients"] = coeffs
    return raw


def write_constants_report(path, nu0, table, coeffs_by_kind_d, extras=None,
                           header_lines=()):
    """key=value constants report consumed by the verifier and the CLI."""
    with open(path, "w") as fh:
        fh.write("# tflimit-constants-v1\n")
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(f"residual_norm={float(nu0.residual_norm)!r}\n")
        for (name, d), iv in sorted(table.items()):
            key = name.replace("*", "")
            fh.write(f"int_{key}_d{d}={float(iv.value)!r}\n")
            fh.write(f"int_{key}_d{d}_error={float(iv.error)!r}\n")
        for d in sorted({d for _, d in coeffs_by_kind_d}):
            fh.write(f"beta_integral_d{d}={float(beta_integral(d))!r}\n")
        for (kind, d), c in sorted(coeffs_by_kind_d.items()):
            for fieldname in ("c_const", "c_log", "c_eps2", "c_eps83"):
                fh.write(f"{kind}_{fieldname}_d{d}={float(getattr(c, fieldname))!r}\n")
        for key, val in (extras or {}).items():
            fh.write(f"{key}={float(val)!r}\n")
