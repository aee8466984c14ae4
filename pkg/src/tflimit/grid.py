"""One-dimensional grids and sampled scalar fields.

A Grid is an ordered node set with quadrature weights.  Uniform grids carry
composite-Simpson weights assembled per smooth segment, so integrands with
indicator-function kinks are integrated at full order provided the kinks sit
on segment boundaries (the constructor enforces this).  Graded grids (used by
the radial ground-state solver) carry trapezoid weights; the solver itself
uses its own variational forms and never relies on them for accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

__all__ = ["Grid", "ScalarField"]


def _simpson_weights(n_nodes, h):
    if n_nodes < 3 or (n_nodes - 1) % 2:
        raise ValueError("Simpson segment needs an even interval count >= 2")
    w = np.full(n_nodes, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w * (h / 3.0)


@dataclass(frozen=True)
class Grid:
    """Strictly increasing nodes plus per-node quadrature weights."""

    nodes: np.ndarray
    weights: np.ndarray
    spacing_profile: str = "uniform"
    breakpoints: tuple = ()

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        if nodes.size < 3:
            raise ValueError("grid needs at least 3 nodes")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("grid nodes must be strictly increasing")
        if weights.shape != nodes.shape:
            raise ValueError("weights must match nodes")
        if np.any(weights <= 0):
            raise ValueError("quadrature weights must be positive")

    @classmethod
    def uniform(cls, a, b, n_nodes, breakpoints=()) -> "Grid":
        """Uniform grid on [a, b] with segment-wise Simpson weights.

        Every breakpoint must coincide with a node at an even interval offset
        from the previous segment boundary, so each segment supports a
        composite Simpson rule on its own.
        """
        nodes = np.linspace(a, b, n_nodes)
        h = (b - a) / (n_nodes - 1)
        cuts = [0]
        for brk in sorted(breakpoints):
            if brk <= a or brk >= b:
                continue
            idx = (brk - a) / h
            if abs(idx - round(idx)) > 1e-9 * n_nodes:
                raise ValueError(f"breakpoint {brk} is not on a grid node")
            cuts.append(int(round(idx)))
        cuts.append(n_nodes - 1)
        weights = np.zeros(n_nodes)
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            if (hi - lo) % 2:
                raise ValueError("breakpoints must cut the grid into even-count segments")
            weights[lo:hi + 1] += _simpson_weights(hi - lo + 1, h)
        return cls(nodes, weights, "uniform", tuple(breakpoints))

    @classmethod
    def from_nodes(cls, nodes, spacing_profile="graded") -> "Grid":
        """Arbitrary strictly increasing nodes with trapezoid weights."""
        nodes = np.asarray(nodes, dtype=float)
        h = np.diff(nodes)
        w = np.zeros_like(nodes)
        w[:-1] += h / 2.0
        w[1:] += h / 2.0
        return cls(nodes, w, spacing_profile)

    @property
    def n_nodes(self):
        return self.nodes.size

    @property
    def spacing(self):
        return float(self.nodes[1] - self.nodes[0])

    @property
    def window(self):
        return float(self.nodes[0]), float(self.nodes[-1])

    def integrate(self, values):
        return float(np.dot(self.weights, np.asarray(values, dtype=float)))

    def index_of(self, y):
        """Index of the node at coordinate y (must lie on the grid)."""
        idx = (y - self.nodes[0]) / self.spacing
        i = int(round(idx))
        if not (0 <= i < self.n_nodes) or abs(self.nodes[i] - y) > 1e-9:
            raise ValueError(f"{y} is not a node of this grid")
        return i


@dataclass
class ScalarField:
    """Samples of a function on a Grid with a declared stencil order."""

    grid: Grid
    values: np.ndarray
    derivative_rule: str = "stencil-4"

    _spline: CubicSpline = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.nodes.shape:
            raise ValueError("values must match grid nodes")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field values must be finite")

    def spline(self) -> CubicSpline:
        if self._spline is None:
            self._spline = CubicSpline(self.grid.nodes, self.values)
        return self._spline

    def __call__(self, y):
        return self.spline()(y)

    def integrate(self):
        return self.grid.integrate(self.values)

    def derivative(self) -> "ScalarField":
        """First derivative by 4th-order centered stencils (one-sided at ends).

        Requires a uniform grid; the graded radial grids never use this path.
        """
        if self.grid.spacing_profile != "uniform":
            raise ValueError("stencil derivative requires a uniform grid")
        f = self.values
        h = self.grid.spacing
        d = np.empty_like(f)
        d[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)
        for i in (0, 1):
            d[i] = np.dot([-25 / 12, 4, -3, 4 / 3, -1 / 4], f[i:i + 5]) / h
        for i in (-2, -1):
            d[i] = -np.dot([-25 / 12, 4, -3, 4 / 3, -1 / 4], f[i - 4:i + 1 if i != -1 else None][::-1]) / h
        return ScalarField(self.grid, d, "stencil-4")
