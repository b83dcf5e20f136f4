"""Monte Carlo baseline: sample the input density, push the samples
through the map, and estimate the output density from a normalized
histogram.  Used to cross-check the direct pushforward curves.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .density import DensitySpec
from .maps import GridSpec, MapDefinition, eval_map, sample_map

CDF_GRID_POINTS = 4096
_CHUNK = 131072


@dataclass(frozen=True)
class McConfig:
    n_samples: int = 1_000_000
    n_bins: int = 200
    seed: int = 0

    def __post_init__(self):
        if not self.n_samples >= self.n_bins >= 2:
            raise ValueError("need n_samples >= n_bins >= 2")


@dataclass(frozen=True, eq=False)
class Histogram:
    """Uniform-bin density estimate over the sampled map range.

    heights[i] = count_i / (n_samples * bin width); mass is the binned
    sample fraction; clamped_fraction the share of pushforward values
    that fell marginally outside the scanned range and were clamped
    into the boundary bins.
    """

    edges: np.ndarray
    heights: np.ndarray
    n_samples: int
    mass: float
    clamped_fraction: float

    def __post_init__(self):
        self.edges.setflags(write=False)
        self.heights.setflags(write=False)


class InverseCdfSampler:
    """Draw from a density spec by inverting its numeric CDF.

    The CDF is accumulated by the trapezoid rule on a fixed uniform
    grid and inverted by monotone linear interpolation of uniform
    deviates; the stream is fully determined by the seed.
    """

    def __init__(self, spec: DensitySpec, seed: int, grid_points: int = CDF_GRID_POINTS):
        xs = np.linspace(spec.alpha, spec.beta, grid_points)
        pdf = np.asarray(spec.pdf(xs), dtype=float)
        cdf = np.concatenate([[0.0], np.cumsum(0.5 * (pdf[1:] + pdf[:-1]) * np.diff(xs))])
        cdf /= cdf[-1]
        self._xs = xs
        self._cdf = cdf
        self._rng = np.random.default_rng(seed)

    def draw(self, n: int) -> np.ndarray:
        u = self._rng.random(n)
        return np.interp(u, self._cdf, self._xs)

    def numeric_cdf(self, x) -> np.ndarray:
        """CDF values used for inversion (exposed for validation)."""
        return np.interp(x, self._xs, self._cdf)


def mc_density(
    map_def: MapDefinition,
    spec: DensitySpec,
    cfg: McConfig,
    scan_grid: GridSpec | None = None,
    threads: int = 1,
) -> Histogram:
    """Histogram density of the pushforward of cfg.n_samples draws.

    The bin range [g_min, g_max] comes from a preliminary uniform-grid
    scan of the map (400 subdivisions unless a grid is given); values
    jittering marginally outside it are clamped into the boundary bins.
    The pushforward runs over fixed-size chunks, so results do not
    depend on the worker count.
    """
    scan = sample_map(map_def, scan_grid or GridSpec(400))
    g_min, g_max = scan.g_min, scan.g_max
    edges = np.linspace(g_min, g_max, cfg.n_bins + 1)

    sampler = InverseCdfSampler(spec, cfg.seed)
    xs = sampler.draw(cfg.n_samples)
    chunks = [xs[i:i + _CHUNK] for i in range(0, len(xs), _CHUNK)]

    def push_and_bin(chunk):
        y = np.asarray(eval_map(map_def, chunk), dtype=float)
        clamped = int((y < g_min).sum() + (y > g_max).sum())
        counts, _ = np.histogram(np.clip(y, g_min, g_max), bins=edges)
        return counts, clamped

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(push_and_bin, chunks))
    else:
        results = [push_and_bin(c) for c in chunks]

    counts = np.zeros(cfg.n_bins, dtype=np.int64)
    clamped = 0
    for c, cl in results:
        counts += c
        clamped += cl

    width = (g_max - g_min) / cfg.n_bins
    heights = counts / (cfg.n_samples * width)
    return Histogram(
        edges=edges,
        heights=heights,
        n_samples=cfg.n_samples,
        mass=float(counts.sum() / cfg.n_samples),
        clamped_fraction=float(clamped / cfg.n_samples),
    )


@dataclass(frozen=True)
class ComparisonMetrics:
    l1: float
    sup: float


def compare(curve, hist: Histogram) -> ComparisonMetrics:
    """Distance between a density curve and a histogram, per bin.

    The curve is averaged over the points falling inside each bin (a
    bin without curve points borrows the nearest point's value); l1 is
    the width-weighted sum of absolute differences to the bin heights,
    sup their maximum.
    """
    edges, heights = hist.edges, hist.heights
    if curve.ys.max() < edges[0] or curve.ys.min() > edges[-1]:
        raise ValueError("curve and histogram supports are disjoint")
    nb = len(heights)
    idx = np.clip(np.searchsorted(edges, curve.ys, side="right") - 1, 0, nb - 1)
    sums = np.bincount(idx, weights=curve.mu_ys, minlength=nb)
    counts = np.bincount(idx, minlength=nb)
    means = np.empty(nb)
    filled = counts > 0
    means[filled] = sums[filled] / counts[filled]
    for i in np.nonzero(~filled)[0]:
        center = 0.5 * (edges[i] + edges[i + 1])
        means[i] = curve.mu_ys[np.argmin(np.abs(curve.ys - center))]
    diff = np.abs(means - heights)
    widths = np.diff(edges)
    return ComparisonMetrics(l1=float((diff * widths).sum()), sup=float(diff.max()))
