"""Input densities and the pushforward density evaluation.

A density specification normalizes its raw shape by composite Simpson
quadrature at construction.  ``pushforward_density`` evaluates the density of
the transformed variable on a per-interval midpoint grid: between two
consecutive critical values the covering branches are known from the
layer table, each branch contributes the input density at its local
preimage times the inverse-map slope there, and the contributions sum.
Critical values themselves are never sampled (cell midpoints only), so
the integrable singularities at interior extrema are represented by
finite, grid-limited peaks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInputError
from .maps import SampledMap
from .partition import LayerTable, MonotonePartition
from .unfold import UnfoldedMap, eta_derivative, eta_eval

SIMPSON_PANELS = 2048
DEFAULT_CELLS = 500


def simpson_integral(f, a: float, b: float, panels: int = SIMPSON_PANELS) -> float:
    """Composite Simpson quadrature with an even number of panels."""
    if panels % 2:
        raise ValueError("panel count must be even")
    xs = np.linspace(a, b, panels + 1)
    ys = np.asarray(f(xs), dtype=float)
    h = (b - a) / panels
    return float(h / 3.0 * (ys[0] + ys[-1] + 4.0 * ys[1:-1:2].sum() + 2.0 * ys[2:-1:2].sum()))


@dataclass(frozen=True)
class DensitySpec:
    """Base input density on [alpha, beta]; normalization computed once."""

    alpha: float
    beta: float
    normalization: float = field(init=False)

    def __post_init__(self):
        if not self.alpha < self.beta:
            raise ValueError(f"need alpha < beta, got [{self.alpha}, {self.beta}]")
        z = simpson_integral(self._raw, self.alpha, self.beta)
        if z <= 0.0:
            raise DegenerateInputError("density normalization constant is not positive")
        object.__setattr__(self, "normalization", z)

    def _raw(self, x):
        raise NotImplementedError

    def pdf(self, x):
        """Normalized density value(s) at x."""
        return self._raw(np.asarray(x, dtype=float)) / self.normalization


@dataclass(frozen=True)
class SinPlusTwo(DensitySpec):
    """Shape sin(omega*x) + 2, strictly positive for every omega."""

    omega: float = 5.0

    def _raw(self, x):
        return np.sin(self.omega * x) + 2.0


@dataclass(frozen=True)
class Uniform(DensitySpec):
    def _raw(self, x):
        return np.ones_like(np.asarray(x, dtype=float))


@dataclass(frozen=True, eq=False)
class TableDensity(DensitySpec):
    """Nonnegative weights at sample points, linearly interpolated."""

    xs: np.ndarray = field(default_factory=lambda: np.array([0.0, 1.0]))
    weights: np.ndarray = field(default_factory=lambda: np.array([1.0, 1.0]))

    def __post_init__(self):
        if len(self.xs) != len(self.weights) or len(self.xs) < 2:
            raise ValueError("table needs matching x/weight columns of length >= 2")
        if not np.all(np.diff(self.xs) > 0):
            raise ValueError("table x values must be strictly increasing")
        if (self.weights < 0).any():
            raise ValueError("table weights must be nonnegative")
        if not (self.weights > 0).any():
            raise ValueError("table weights must not all be zero")
        super().__post_init__()
        self.xs.setflags(write=False)
        self.weights.setflags(write=False)

    def _raw(self, x):
        return np.interp(x, self.xs, self.weights)


def build_density_spec(kind: str, alpha: float, beta: float, **params) -> DensitySpec:
    """Construct a density variant by name ('sin_plus_two', 'uniform', 'table')."""
    if kind == "sin_plus_two":
        return SinPlusTwo(alpha=alpha, beta=beta, **params)
    if kind == "uniform":
        return Uniform(alpha=alpha, beta=beta, **params)
    if kind == "table":
        return TableDensity(alpha=alpha, beta=beta, **params)
    raise ValueError(f"unknown density kind {kind!r}")


@dataclass(frozen=True, eq=False)
class DensityCurve:
    """Pushforward density sampled at per-interval cell midpoints.

    edges holds the critical values bounding the intervals;
    interval_ids[q] is the 0-based interval of point q.  delta is the
    requested global step; each interval uses the nearest step that fits
    an integer number of cells, so no point ever lands on an edge.
    """

    ys: np.ndarray
    mu_ys: np.ndarray
    interval_ids: np.ndarray
    edges: np.ndarray
    delta: float
    mass: float

    def __post_init__(self):
        for arr in (self.ys, self.mu_ys, self.interval_ids, self.edges):
            arr.setflags(write=False)


def _interval_cells(width: float, delta: float) -> int:
    return max(1, int(round(width / delta)))


def pushforward_density(
    sm: SampledMap,
    p: MonotonePartition,
    table: LayerTable,
    um: UnfoldedMap,
    spec: DensitySpec,
    delta: float | None = None,
    gprime=None,
) -> DensityCurve:
    """Evaluate the pushforward density on per-interval midpoint grids.

    At each evaluation point y the contributions of all covering
    branches are summed: input density at the branch preimage times the
    local inverse slope.  The slope comes from the interpolant by
    default; passing ``gprime`` (a callable for dg/dx) switches the
    Jacobian to 1/|gprime| evaluated at the preimage.
    """
    if delta is None:
        delta = (table.g_max - table.g_min) / DEFAULT_CELLS
    if delta <= 0:
        raise ValueError("delta must be positive")

    ys_out, mu_out, id_out = [], [], []
    for i in range(len(table.values) - 1):
        lo, hi = table.values[i], table.values[i + 1]
        n_cells = _interval_cells(hi - lo, delta)
        step = (hi - lo) / n_cells
        y = lo + (np.arange(n_cells) + 0.5) * step
        acc = np.zeros(n_cells)
        for j in sorted(table.index_sets[i]):
            sign = np.sign(p.lambdas[j - 1])
            u = p.masses[j - 1] + (y - p.g_alphas[j - 1]) * sign
            x = eta_eval(um, u)
            if gprime is None:
                jac = eta_derivative(um, u)
            else:
                with np.errstate(divide="ignore"):
                    jac = 1.0 / np.abs(np.asarray(gprime(x), dtype=float))
            acc += spec.pdf(x) * jac
        ys_out.append(y)
        mu_out.append(acc)
        id_out.append(np.full(n_cells, i, dtype=int))

    curve = DensityCurve(
        ys=np.concatenate(ys_out),
        mu_ys=np.concatenate(mu_out),
        interval_ids=np.concatenate(id_out),
        edges=table.values.copy(),
        delta=float(delta),
        mass=0.0,
    )
    object.__setattr__(curve, "mass", curve_mass(curve))
    return curve


def curve_mass(curve: DensityCurve) -> float:
    """Integral of the curve: per-interval cell sums, intervals added up.

    Cells are uniform within an interval, so summing midpoint values
    times the cell width equals the trapezoid rule over the points with
    flat half-cell extensions at both interval ends.
    """
    if len(curve.ys) == 0:
        raise ValueError("empty curve")
    total = 0.0
    for i in np.unique(curve.interval_ids):
        inside = curve.interval_ids == i
        width = curve.edges[i + 1] - curve.edges[i]
        total += curve.mu_ys[inside].sum() * (width / inside.sum())
    return float(total)
