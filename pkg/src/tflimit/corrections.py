"""Linear correction functions of the boundary-layer expansion.

Each order n >= 1 solves the linearized two-point problem

    -4 v_n''(y) + W0(y) v_n(y) = F_n(y),      W0 = 3 v0^2 - y,

with forcing assembled from all lower orders,

    F_n = - sum_{n1+n2+n3=n, ni<n} v_{n1} v_{n2} v_{n3}
          - 2 d v_{n-1}' - 4 y v_{n-1}''.

W0 > 0 makes the operator coercive, so a direct tridiagonal (Numerov) solve
suffices.  The right boundary uses the algebraic tail value (series-matched
for n=1, zero for n>=2 where the decay is at least y^(-7/2)); the left
boundary is zero.  Extended-precision iterative refinement certifies the
residual the same way as the profile solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .errors import MissingPrior, SingularOperator, TailTooNoisy
from .grid import ScalarField
from .painleve import HastingsMcLeod
from .tails import correction_tail_series

__all__ = ["CorrectionFunction", "forcing_term", "solve_correction",
           "correction_tail_fit", "save_correction"]


@dataclass
class CorrectionFunction:
    order_n: int
    dimension_d: int
    field: ScalarField
    tail: "TailSeries"
    residual_norm: float
    boundary_value_right: float
    #: min over rows of |diag| - |subdiag| - |superdiag| of the discrete
    #: operator; positive whenever W0 > 0 on the window
    diagonal_dominance_margin: float = 0.0

    @property
    def grid(self):
        return self.field.grid

    def evaluate(self, y):
        """Spline inside the window, algebraic tail to the right, 0 to the left."""
        y = np.asarray(y, dtype=float)
        scalar = y.ndim == 0
        y = np.atleast_1d(y)
        lo, hi = self.grid.window
        out = np.zeros_like(y)
        inside = (y >= lo) & (y <= hi)
        out[inside] = self.field(y[inside])
        right = y > hi
        if np.any(right) and self.tail is not None:
            out[right] = self.tail.evaluate(y[right])
        return float(out[0]) if scalar else out

    def __call__(self, y):
        return self.evaluate(y)


def _derivatives_of(order, nu0: HastingsMcLeod, priors):
    """(v', v'') of the given order, discretely consistent with the solves."""
    if order == 0:
        return nu0.derivative.values, nu0.second_derivative_values()
    cf = priors[order - 1]
    d1 = cf.field.derivative().values
    # second derivative from the correction's own equation
    w0 = nu0.w0.values
    fn = forcing_term(order, cf.dimension_d, nu0, priors[:order - 1]).values
    d2 = (w0 * cf.field.values - fn) / 4.0
    return d1, d2


def forcing_term(n: int, d: int, nu0: HastingsMcLeod, priors=()) -> ScalarField:
    """Forcing F_n sampled on the profile grid.

    ``priors`` lists the already-solved corrections v_1 .. v_{n-1} in order.
    For n = 1 the cubic sum is empty and F_1 = -2 d v0' - 4 y v0''.
    """
    if n < 1:
        raise ValueError("forcing is defined for n >= 1")
    if len(priors) < n - 1:
        raise MissingPrior(f"F_{n} needs corrections 1..{n - 1}, got {len(priors)}")
    for k, cf in enumerate(priors[:n - 1], start=1):
        if cf.order_n != k or cf.dimension_d != d:
            raise MissingPrior(f"prior at position {k} has (n={cf.order_n}, d={cf.dimension_d})")
    y = nu0.grid.nodes
    fields = [nu0.field.values] + [cf.field.values for cf in priors[:n - 1]]
    cubic = np.zeros_like(y)
    for n1 in range(n):
        for n2 in range(n):
            n3 = n - n1 - n2
            if 0 <= n3 < n:
                cubic += fields[n1] * fields[n2] * fields[n3]
    d1, d2 = _derivatives_of(n - 1, nu0, priors)
    values = -cubic - 2.0 * d * d1 - 4.0 * y * d2
    return ScalarField(nu0.grid, values, derivative_rule="stencil-4")


def solve_correction(n: int, d: int, nu0: HastingsMcLeod, priors=(),
                     tol=1e-10, forcing: ScalarField | None = None,
                     bc_right: float | None = None) -> CorrectionFunction:
    """Solve the order-n correction on the profile grid.

    Numerov form of v'' = p v + q with p = W0/4 and q = -F_n/4; Dirichlet
    data 0 on the left and the algebraic tail value on the right (zero for
    n >= 2).  ``forcing`` overrides F_n (used by the linearity checks) and
    ``bc_right`` overrides the series boundary value.
    """
    if d not in (1, 2, 3):
        raise ValueError("dimension must be 1, 2 or 3")
    y = nu0.grid.nodes
    h = nu0.grid.spacing
    w0 = nu0.w0.values
    if np.any(w0 <= 0):
        raise SingularOperator("W0 must be positive on the window")
    F = (forcing.values if forcing is not None
         else forcing_term(n, d, nu0, priors).values)
    p = w0 / 4.0
    q = -F / 4.0

    tail = correction_tail_series(d) if n == 1 else None
    hi = nu0.window[1]
    if bc_right is None:
        bc_right = float(tail.evaluate(hi)) if n == 1 else 0.0
    bc_left = 0.0

    m = y.size
    one = 1.0 / h ** 2
    lower = one - p[:-2] / 12.0
    diag = -2.0 * one - 10.0 * p[1:-1] / 12.0
    upper = one - p[2:] / 12.0
    rhs = (q[2:] + 10.0 * q[1:-1] + q[:-2]) / 12.0
    rhs[0] -= lower[0] * bc_left
    rhs[-1] -= upper[-1] * bc_right
    ab = np.zeros((3, m - 2))
    ab[0, 1:] = upper[:-1]
    ab[1, :] = diag
    ab[2, :-1] = lower[1:]
    margin = float(np.min(np.abs(diag) - np.abs(lower) - np.abs(upper)))
    try:
        interior = solve_banded((1, 1), ab, rhs)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - defensive
        raise SingularOperator(str(exc)) from exc
    if not np.all(np.isfinite(interior)):
        raise SingularOperator("linear solve produced non-finite values")

    v = np.empty(m)
    v[0], v[-1] = bc_left, bc_right
    v[1:-1] = interior

    # extended-precision refinement of the tridiagonal solve
    vl = v.astype(np.longdouble)
    yl = y.astype(np.longdouble)
    hl = np.longdouble(y[-1] - y[0]) / (m - 1)
    pl = (w0 / 4.0).astype(np.longdouble)
    ql = q.astype(np.longdouble)

    def residual_ext(vec):
        lhs = (vec[2:] - 2.0 * vec[1:-1] + vec[:-2]) / hl ** 2
        rhsv = (pl * vec + ql)
        return 4.0 * (lhs - (rhsv[2:] + 10.0 * rhsv[1:-1] + rhsv[:-2]) / 12.0)

    residual = float(np.max(np.abs(residual_ext(vl))))
    for _ in range(6):
        if residual <= 0.25 * tol:
            break
        dv = solve_banded((1, 1), ab, -(residual_ext(vl) / 4.0).astype(np.float64))
        vl[1:-1] += dv.astype(np.longdouble)
        residual = float(np.max(np.abs(residual_ext(vl))))
    if residual > tol:
        raise SingularOperator(
            f"correction residual {residual:.2e} above tolerance {tol:.1e}")

    field = ScalarField(nu0.grid, vl.astype(np.float64), derivative_rule="numerov-4")
    return CorrectionFunction(order_n=n, dimension_d=d, field=field,
                              tail=tail, residual_norm=residual,
                              boundary_value_right=bc_right,
                              diagonal_dominance_margin=margin)


def correction_tail_fit(cf: CorrectionFunction, fit_window=None,
                        max_fit_residual=0.05):
    """Least-squares fit of log|v_n| against log y on [L+/2, L+].

    Returns (exponent, coefficient) with the coefficient carrying the sign of
    the tail.  Raises TailTooNoisy when the per-point fit residual exceeds
    ``max_fit_residual`` in log space.
    """
    lo, hi = cf.grid.window
    if fit_window is None:
        fit_window = (hi / 2.0, hi)
    if fit_window[0] < 10.0:
        raise ValueError("fit window must start well inside the algebraic tail")
    nodes = cf.grid.nodes
    mask = (nodes >= fit_window[0]) & (nodes <= fit_window[1])
    yy = nodes[mask]
    vv = cf.field.values[mask]
    sign = np.sign(vv[0]) if vv[0] != 0 else 1.0
    if np.any(vv * sign <= 0):
        raise TailTooNoisy("tail changes sign inside the fit window")
    logy = np.log(yy)
    logv = np.log(np.abs(vv))
    design = np.vstack([logy, np.ones_like(logy)]).T
    sol, *_ = np.linalg.lstsq(design, logv, rcond=None)
    rms = float(np.sqrt(np.mean((design @ sol - logv) ** 2)))
    if rms > max_fit_residual:
        raise TailTooNoisy(f"fit rms {rms:.3f} exceeds {max_fit_residual}")
    return float(sol[0]), float(sign * np.exp(sol[1]))


def save_correction(cf: CorrectionFunction, path, delimiter=",", header_lines=()):
    with open(path, "w") as fh:
        fh.write("# tflimit-correction-v1\n")
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(f"# order_n={cf.order_n} dimension_d={cf.dimension_d} "
                 f"residual_norm={float(cf.residual_norm)!r} "
                 f"bc_right={float(cf.boundary_value_right)!r} bc_left=0.0\n")
        fh.write("# columns: y nu_n\n")
        for yv, vv in zip(cf.grid.nodes, cf.field.values):
            fh.write(delimiter.join((repr(float(yv)), repr(float(vv)))) + "\n")


def load_correction(path) -> CorrectionFunction:
    from .grid import Grid

    header = {}
    rows = []
    with open(path) as fh:
        if fh.readline().strip() != "# tflimit-correction-v1":
            raise ValueError(f"not a correction file: {path}")
        for line in fh:
            if line.startswith("#"):
                for tok in line[1:].split():
                    if "=" in tok:
                        k, v = tok.split("=", 1)
                        header[k] = v
                continue
            if line.strip():
                rows.append([float(t) for t in line.replace(",", " ").split()])
    data = np.array(rows)
    n = int(header["order_n"])
    d = int(header["dimension_d"])
    grid = Grid.uniform(data[0, 0], data[-1, 0], data.shape[0],
                        breakpoints=(0.0, 1.0))
    return CorrectionFunction(
        order_n=n, dimension_d=d,
        field=ScalarField(grid, data[:, 1], derivative_rule="numerov-4"),
        tail=correction_tail_series(d) if n == 1 else None,
        residual_norm=float(header["residual_norm"]),
        boundary_value_right=float(header["bc_right"]))
