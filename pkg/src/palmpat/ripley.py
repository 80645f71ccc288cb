"""Single-scale nearest-neighbor statistics on point patterns.

Implements the empirical G (nearest-neighbor), F (empty-space) and
J = (1 - G) / (1 - F) functions evaluated on an explicit distance grid,
plus per-point k-nearest-neighbor summary statistics.

Conventions, applied consistently so that observed and simulated patterns
are always compared with the same estimator:

* G(d) is the fraction of points whose nearest-neighbor distance is
  *strictly* less than d; F(d) is the analogous fraction over reference
  points dropped uniformly in the window. No edge correction is applied.
* F draws its reference points from a seeded stream, generated up front
  in one call (``rng.uniform(window.lo, window.hi, (n_ref, 2))``), so the
  curve is bit-reproducible for a fixed seed.
* J is left undefined (NaN) wherever F(d) == 1.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import InvalidInputError
from .geometry import PointPattern, Window, nearest_neighbor_distances
from .seeding import DEFAULT_SEED, rng_from_seed

DEFAULT_GRID_STEPS = 100


@dataclass(frozen=True)
class DistanceGrid:
    """Strictly increasing evaluation distances, first entry >= 0."""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True)
        if values.ndim != 1 or values.size == 0:
            raise InvalidInputError("distance grid must be a nonempty 1-D sequence")
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("distance grid must be finite")
        if values[0] < 0.0:
            raise InvalidInputError(f"distances must be nonnegative, got {values[0]}")
        if values.size > 1 and not np.all(np.diff(values) > 0.0):
            raise InvalidInputError("distance grid must be strictly increasing")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size

    @classmethod
    def default(cls, window: Window, steps: int = DEFAULT_GRID_STEPS) -> "DistanceGrid":
        """Evenly spaced grid from 0 to half the shorter window side."""
        if steps < 2:
            raise InvalidInputError(f"grid needs at least 2 steps, got {steps}")
        return cls(np.linspace(0.0, window.shorter_side / 2.0, steps))

    def same_as(self, other: "DistanceGrid") -> bool:
        return np.array_equal(self.values, other.values)


@dataclass(frozen=True)
class RipleyCurve:
    """Statistic values over a distance grid; NaN marks undefined entries."""

    grid: DistanceGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True)
        if values.shape != (len(self.grid),):
            raise InvalidInputError(
                f"curve has {values.shape} values for a {len(self.grid)}-point grid"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def defined(self) -> np.ndarray:
        return ~np.isnan(self.values)


@dataclass(frozen=True)
class NeighborStats:
    """Summary of per-point mean k-nearest-neighbor distances."""

    mean: float
    median: float
    std: float
    bin_edges: np.ndarray
    counts: np.ndarray


def _empirical_cdf(sorted_samples: np.ndarray, grid: DistanceGrid) -> np.ndarray:
    # strict inequality: count of samples < d
    counts = np.searchsorted(sorted_samples, grid.values, side="left")
    return counts / sorted_samples.size


def g_function(pattern: PointPattern, grid: DistanceGrid) -> RipleyCurve:
    """Fraction of points with nearest-neighbor distance strictly below d."""
    nnd = nearest_neighbor_distances(pattern, k=1)[:, 0]
    nnd.sort()
    return RipleyCurve(grid, _empirical_cdf(nnd, grid))


def f_function(
    pattern: PointPattern,
    grid: DistanceGrid,
    n_ref: int | None = None,
    seed: int = DEFAULT_SEED,
) -> RipleyCurve:
    """Empty-space function from seeded uniform reference points.

    ``n_ref`` defaults to max(1000, n) so that the Monte Carlo noise in F
    stays well below the discrepancies it is used to measure.
    """
    n = len(pattern)
    if n == 0:
        raise InvalidInputError("F function needs a nonempty pattern")
    if n_ref is None:
        n_ref = max(1000, n)
    if n_ref < 1:
        raise InvalidInputError(f"n_ref must be positive, got {n_ref}")
    rng = rng_from_seed(seed)
    refs = rng.uniform(pattern.window.lo, pattern.window.hi, size=(n_ref, 2))
    dist, _ = cKDTree(pattern.coords).query(refs, k=1)
    dist.sort()
    return RipleyCurve(grid, _empirical_cdf(dist, grid))


def j_function(g: RipleyCurve, f: RipleyCurve) -> RipleyCurve:
    """Pointwise (1 - G) / (1 - F); NaN where F reaches 1."""
    if not g.grid.same_as(f.grid):
        raise InvalidInputError("G and F curves must share the same distance grid")
    denom = 1.0 - f.values
    values = np.full_like(denom, np.nan)
    ok = denom > 0.0
    values[ok] = (1.0 - g.values[ok]) / denom[ok]
    return RipleyCurve(g.grid, values)


def nn_stats(pattern: PointPattern, k: int = 5, bins: int = 30) -> NeighborStats:
    """Distribution of each point's mean distance to its k nearest neighbors.

    k=1 summarizes plain nearest-neighbor spacing; k=5 the average of the
    five nearest. Standard deviation uses the n-1 denominator.
    """
    if bins < 1:
        raise InvalidInputError(f"bins must be positive, got {bins}")
    per_point = nearest_neighbor_distances(pattern, k).mean(axis=1)
    counts, edges = np.histogram(per_point, bins=bins)
    return NeighborStats(
        mean=float(per_point.mean()),
        median=float(np.median(per_point)),
        std=float(per_point.std(ddof=1)),
        bin_edges=edges,
        counts=counts,
    )
