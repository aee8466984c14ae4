"""Direct radial ground-state solver and expansion verification.

The stationary equation  e^2 (u'' + (d-1)/r u') + (1 - r^2) u - u^3 = 0  is
discretized variationally: the energy functional

    E[u] = |S^{d-1}| int_0^Rmax ( e^2 u'^2 + (r^2 - 1) u^2 + u^4/2 ) r^{d-1} dr

is restricted to continuous piecewise-linear fields on a layer-graded mesh,
with exact element integrals of r^{d-1} for the gradient term and lumped hat
weights for the rest.  Newton zeroes the exact gradient of this discrete
functional, so the two energy identities

    E = -(1/2) int u^4      and      E_k = 2 E - E_p

hold at machine precision for every converged state by construction - they
only depend on stationarity, not on discretization accuracy.  The natural
r=0 symmetry condition u'(0)=0 is built into the weak form; the far end uses
homogeneous Dirichlet data at Rmax = 1 + 10 e^{2/3}, far outside the layer.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .constants import SPHERE_MEASURE, ExpansionCoefficients
from .errors import GridMismatch, NegativeProfile, NonConvergence, SolverFailure
from .grid import Grid, ScalarField
from .painleve import HastingsMcLeod

__all__ = ["GroundState", "VerificationReport", "radial_grid",
           "solve_ground_state", "energies", "extract_remainder",
           "verify_expansion", "write_verification_report", "write_profile"]

DEFAULT_LAYER_POINTS = 400   # nodes per layer width eps^(2/3)
DEFAULT_CORE_FACTOR = 2.0    # core spacing relative to layer spacing
DEFAULT_RMAX_WIDTHS = 10.0   # Rmax = 1 + widths * eps^(2/3)


@dataclass
class GroundState:
    epsilon: float
    dimension_d: int
    profile: ScalarField
    E_total: float
    E_potential: float
    E_kinetic: float
    quartic_integral: float
    newton_iterations: int
    residual_norm: float
    solve_seconds: float = 0.0

    @property
    def r_max(self):
        return float(self.profile.grid.nodes[-1])


@dataclass
class VerificationReport:
    dimension_d: int
    energy_kind: str
    eps: np.ndarray
    e_numeric: np.ndarray
    e_predicted: np.ndarray
    slope: float
    slope_threshold: float
    failures: list = field(default_factory=list)

    @property
    def delta(self):
        return self.e_numeric - self.e_predicted

    @property
    def passed(self):
        return not self.failures and self.slope >= self.slope_threshold


def radial_grid(epsilon, R_max=None, layer_points=DEFAULT_LAYER_POINTS,
                core_factor=DEFAULT_CORE_FACTOR):
    """Layer-graded radial mesh: node density ~ 1/eps^(2/3) near r = 1.

    Uniform spacing eps^(2/3)/layer_points on [1 - 5 eps^(2/3), Rmax], and
    ``core_factor`` times coarser on the interior bulk.
    """
    w = epsilon ** (2.0 / 3.0)
    if R_max is None:
        R_max = 1.0 + DEFAULT_RMAX_WIDTHS * w
    if R_max < 1.0 + 8.0 * w:
        raise ValueError("R_max must clear the boundary layer (>= 1 + 8 eps^(2/3))")
    hl = w / layer_points
    ra = 1.0 - 5.0 * w
    if ra < 10.0 * hl:
        n = int(math.ceil(R_max / hl))
        return np.linspace(0.0, R_max, n + 1)
    nc = int(math.ceil(ra / (core_factor * hl)))
    nl = int(math.ceil((R_max - ra) / hl))
    return np.concatenate([np.linspace(0.0, ra, nc + 1),
                           np.linspace(ra, R_max, nl + 1)[1:]])


def _element_moments(r, d):
    a, b = r[:-1], r[1:]
    m0 = (b ** d - a ** d) / d
    m1 = (b ** (d + 1) - a ** (d + 1)) / (d + 1)
    return m0, m1


def _assemble(r, d):
    """Element stiffness coefficients and lumped hat weights (exact moments)."""
    h = np.diff(r)
    m0, m1 = _element_moments(r, d)
    ke = m0 / h ** 2
    phi_right = (m1 - r[:-1] * m0) / h
    phi_left = m0 - phi_right
    w = np.zeros_like(r)
    w[:-1] += phi_left
    w[1:] += phi_right
    return h, ke, w


def solve_ground_state(epsilon, d, R_max=None, n_nodes=None, tol=1e-10,
                       nu0: HastingsMcLeod | None = None,
                       layer_points=DEFAULT_LAYER_POINTS,
                       max_iterations=60) -> GroundState:
    """Damped-Newton solve of the discrete energy stationarity conditions.

    Parameters
    ----------
    epsilon : float in (0, 0.3]
    d : 1, 2 or 3
    R_max : float, optional
        Domain end; defaults to 1 + 10 eps^(2/3).
    n_nodes : int, optional
        Overrides the mesh density (scales the layer resolution).
    tol : float
        Max-norm tolerance on the weight-scaled gradient (the discrete
        analogue of the pointwise equation residual).
    nu0 : HastingsMcLeod, optional
        Layer profile used for the initial guess; without it a smoothed
        Thomas-Fermi profile is used (a few more Newton steps).

    Raises
    ------
    NonConvergence, NegativeProfile
    """
    if not 0 < epsilon <= 0.3:
        raise ValueError("epsilon must lie in (0, 0.3]")
    if d not in (1, 2, 3):
        raise ValueError("dimension must be 1, 2 or 3")
    t_start = time.perf_counter()
    if n_nodes is not None:
        base = radial_grid(epsilon, R_max, layer_points)
        scale = n_nodes / base.size
        layer_points = max(20, int(round(layer_points * scale)))
    r = radial_grid(epsilon, R_max, layer_points)
    n = r.size
    h, ke, w = _assemble(r, d)
    V = r ** 2 - 1.0
    e2 = epsilon ** 2

    if nu0 is not None:
        eta = epsilon ** (1.0 / 3.0) * nu0.evaluate((1.0 - r ** 2) / epsilon ** (2.0 / 3.0))
    else:
        eta = np.sqrt(0.5 * ((1.0 - r ** 2) + np.sqrt((1.0 - r ** 2) ** 2
                                                      + 4.0 * epsilon ** (4.0 / 3.0))))
    eta[-1] = 0.0

    def gradient(vec):
        g = np.zeros(n)
        flux = ke * np.diff(vec)
        g[:-1] -= flux
        g[1:] += flux
        g = e2 * g + w * (V * vec + vec ** 3)
        return g[:-1]

    def newton(eta, damping_start=1.0):
        prev = np.inf
        for it in range(1, max_iterations + 1):
            g = gradient(eta)
            res = float(np.max(np.abs(g / w[:-1])))
            nrm = float(np.linalg.norm(g))
            if res < tol:
                return eta, res, it
            if nrm >= 0.999 * prev:
                return eta, res, it
            prev = nrm
            dV = w * (V + 3.0 * eta ** 2)
            diag = dV[:-1] + e2 * ke
            diag[1:] += e2 * ke[:-1]
            ab = np.zeros((3, n - 1))
            ab[0, 1:] = -e2 * ke[:-1]
            ab[1, :] = diag
            ab[2, :-1] = -e2 * ke[:-1]
            du = solve_banded((1, 1), ab, -g)
            lam = damping_start
            while lam > 1e-14:
                trial = eta.copy()
                trial[:-1] += lam * du
                if np.linalg.norm(gradient(trial)) < nrm:
                    eta = trial
                    break
                lam *= 0.5
            else:
                return eta, res, it
        return eta, res, max_iterations

    eta_out, res, its = newton(eta.copy())
    if np.any(eta_out[:-1] <= 0):
        # restart from the initial cone with stronger damping
        eta_out, res, its2 = newton(eta.copy(), damping_start=0.25)
        its += its2
        if np.any(eta_out[:-1] <= 0):
            raise NegativeProfile(
                f"profile left the positive cone (eps={epsilon}, d={d})")
    if res > tol:
        raise NonConvergence(
            f"gradient residual {res:.2e} above tolerance {tol:.1e} "
            f"(eps={epsilon}, d={d})", iterations=its, residual=res)

    S = SPHERE_MEASURE[d]
    Ek = S * e2 * float(np.dot(ke, np.diff(eta_out) ** 2))
    Ep = S * float(np.dot(w, V * eta_out ** 2))
    I4 = S * float(np.dot(w, eta_out ** 4))
    state = GroundState(
        epsilon=float(epsilon), dimension_d=d,
        profile=ScalarField(Grid.from_nodes(r), eta_out, derivative_rule="p1-fem"),
        E_total=Ek + Ep + 0.5 * I4,
        E_potential=Ep, E_kinetic=Ek, quartic_integral=I4,
        newton_iterations=its, residual_norm=res,
        solve_seconds=time.perf_counter() - t_start,
    )
    return state


def energies(state: GroundState):
    """(E, E_p, E_k) re-derived from the stored profile with the same
    discrete forms used by the solver (idempotent with the stored values)."""
    r = state.profile.grid.nodes
    d = state.dimension_d
    _, ke, w = _assemble(r, d)
    eta = state.profile.values
    V = r ** 2 - 1.0
    S = SPHERE_MEASURE[d]
    Ek = S * state.epsilon ** 2 * float(np.dot(ke, np.diff(eta) ** 2))
    Ep = S * float(np.dot(w, V * eta ** 2))
    I4 = S * float(np.dot(w, eta ** 4))
    return Ek + Ep + 0.5 * I4, Ep, Ek


def extract_remainder(state: GroundState, nu0: HastingsMcLeod,
                      corrections=(), N=0, y_window=(-8.0, None),
                      n_probe=401) -> ScalarField:
    """Rescaled expansion remainder sampled on a probe grid in the layer
    variable y = (1 - r^2)/eps^(2/3):

        R_N(y) = eps^(-2(N+1)/3) ( nu_eps(y) - sum_{n<=N} eps^(2n/3) nu_n(y) ),

    with nu_eps(y) = eps^(-1/3) * profile(r(y)).
    """
    if N > len(corrections):
        raise GridMismatch(f"N={N} needs {N} correction functions, got {len(corrections)}")
    for k, cf in enumerate(corrections[:N], start=1):
        if cf.order_n != k or cf.dimension_d != state.dimension_d:
            raise GridMismatch("correction list does not match (order, dimension)")
    eps = state.epsilon
    e23 = eps ** (2.0 / 3.0)
    y_top_limit = 1.0 / e23
    lo = y_window[0]
    hi = y_window[1]
    if hi is None:
        hi = y_top_limit - 0.1  # stay slightly below the r = 0 image
    if hi > y_top_limit:
        raise GridMismatch(f"probe window top {hi} exceeds eps^(-2/3) = {y_top_limit:.3f}")
    r_lo_sq = 1.0 - e23 * lo
    if r_lo_sq > state.r_max ** 2 + 1e-12:
        raise GridMismatch("probe window bottom maps outside the radial domain")
    y = np.linspace(lo, hi, n_probe)
    rr = np.sqrt(np.maximum(1.0 - e23 * y, 0.0))
    nu_eps = state.profile(rr) / eps ** (1.0 / 3.0)
    total = nu0.evaluate(y).copy()
    for k, cf in enumerate(corrections[:N], start=1):
        total += eps ** (2.0 * k / 3.0) * cf.evaluate(y)
    rem = (nu_eps - total) / eps ** (2.0 * (N + 1) / 3.0)
    return ScalarField(Grid.from_nodes(y, "uniform-probe"), rem,
                       derivative_rule="probe")


def verify_expansion(d, eps_list, coeffs: ExpansionCoefficients,
                     slope_threshold=2.7, nu0=None, solver_kwargs=None,
                     states=None, parallel=False) -> VerificationReport:
    """Residual-order check of a four-term expansion against direct solves.

    For each eps the residual Delta = E_numeric - prediction is formed and
    the log-log slope over the sweep is fitted; the claimed remainder order
    makes the slope approach 3 from below at desk scale.  With ``parallel``
    the independent solves run on a thread pool; results are assembled in
    sweep order after a join, so the report does not depend on scheduling.
    """
    eps_arr = np.asarray(sorted(eps_list, reverse=True), dtype=float)
    if eps_arr.size < 2:
        raise ValueError("need at least two epsilon values")
    kind_attr = {"total": "E_total", "potential": "E_potential",
                 "kinetic": "E_kinetic"}[coeffs.energy_kind]
    e_num = np.full(eps_arr.size, np.nan)
    failures = []

    def one(eps):
        if states is not None and (eps, d) in states:
            return states[(eps, d)]
        return solve_ground_state(eps, d, nu0=nu0, **(solver_kwargs or {}))

    if parallel:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=min(4, eps_arr.size)) as pool:
            futures = [pool.submit(one, eps) for eps in eps_arr]
        outcomes = []
        for eps, fut in zip(eps_arr, futures):
            try:
                outcomes.append(fut.result())
            except (NonConvergence, NegativeProfile) as exc:
                outcomes.append((float(eps), str(exc)))
    else:
        outcomes = []
        for eps in eps_arr:
            try:
                outcomes.append(one(eps))
            except (NonConvergence, NegativeProfile) as exc:
                outcomes.append((float(eps), str(exc)))
    for i, out in enumerate(outcomes):
        if isinstance(out, tuple):
            failures.append(out)
        else:
            e_num[i] = getattr(out, kind_attr)
    e_pred = coeffs.predict(eps_arr)
    ok = np.isfinite(e_num)
    if ok.sum() >= 2:
        delta = np.abs(e_num[ok] - e_pred[ok])
        slope = float(np.polyfit(np.log(eps_arr[ok]), np.log(delta), 1)[0])
    else:
        slope = float("nan")
    report = VerificationReport(
        dimension_d=d, energy_kind=coeffs.energy_kind, eps=eps_arr,
        e_numeric=e_num, e_predicted=e_pred, slope=slope,
        slope_threshold=slope_threshold, failures=failures)
    if failures:
        raise SolverFailure(
            f"{len(failures)} solves failed during verification", partial=report)
    return report


def write_verification_report(report: VerificationReport, path, delimiter=",",
                              header_lines=()):
    """Machine-readable residual table plus a human summary line."""
    with open(path, "w") as fh:
        fh.write("# tflimit-verification-v1\n")
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(f"# dimension={report.dimension_d} kind={report.energy_kind} "
                 f"slope={report.slope!r} threshold={report.slope_threshold!r} "
                 f"passed={report.passed}\n")
        fh.write(delimiter.join(("eps", "E_num", "E_pred", "delta", "slope")) + "\n")
        for eps, en, ep in zip(report.eps, report.e_numeric, report.e_predicted):
            fh.write(delimiter.join((repr(float(eps)), repr(float(en)),
                                     repr(float(ep)), repr(float(en - ep)),
                                     repr(report.slope))) + "\n")
        status = "PASS" if report.passed else "FAIL"
        fh.write(f"# summary: d={report.dimension_d} {report.energy_kind} "
                 f"slope {report.slope:.3f} vs threshold {report.slope_threshold} "
                 f"-> {status}\n")


def write_profile(state: GroundState, path, delimiter=",", header_lines=()):
    """Columnar dump (r, eta, eta') of a converged state."""
    r = state.profile.grid.nodes
    eta = state.profile.values
    deta = np.gradient(eta, r, edge_order=2)
    with open(path, "w") as fh:
        fh.write("# tflimit-groundstate-v1\n")
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(f"# epsilon={state.epsilon!r} dimension={state.dimension_d} "
                 f"E_total={state.E_total!r} E_potential={state.E_potential!r} "
                 f"E_kinetic={state.E_kinetic!r} residual_norm={state.residual_norm!r} "
                 f"newton_iterations={state.newton_iterations}\n")
        fh.write("# columns: r eta deta\n")
        for row in zip(r, eta, deta):
            fh.write(delimiter.join(repr(float(v)) for v in row) + "\n")
