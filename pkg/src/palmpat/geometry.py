"""Planar geometry primitives: points, windows, patterns, boxes.

Coordinates are plain floats in working units (meters once any pixel
scaling has been applied upstream). Containment is boundary-inclusive
everywhere. All functions are pure and safe to call concurrently.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.spatial import cKDTree

from .errors import InvalidInputError


@dataclass(frozen=True)
class Point:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise InvalidInputError(f"point coordinates must be finite, got ({self.x}, {self.y})")


@dataclass(frozen=True)
class Window:
    """Axis-aligned rectangle with strictly positive area."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        bounds = (self.x_min, self.y_min, self.x_max, self.y_max)
        if not all(math.isfinite(v) for v in bounds):
            raise InvalidInputError(f"window bounds must be finite, got {bounds}")
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise InvalidInputError(f"window must have positive area, got {bounds}")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def shorter_side(self) -> float:
        return min(self.width, self.height)

    @property
    def diagonal(self) -> float:
        return math.hypot(self.width, self.height)

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def lo(self) -> tuple[float, float]:
        return (self.x_min, self.y_min)

    @property
    def hi(self) -> tuple[float, float]:
        return (self.x_max, self.y_max)

    def contains(self, x, y):
        """Boundary-inclusive containment test; accepts scalars or arrays."""
        return (
            (self.x_min <= x) & (x <= self.x_max)
            & (self.y_min <= y) & (y <= self.y_max)
        )


@dataclass(frozen=True)
class PointPattern:
    """A finite set of events inside an observation window.

    ``coords`` is an immutable float array of shape (n, 2); column 0 is x.
    Points on the window boundary count as inside.
    """

    window: Window
    coords: np.ndarray

    def __post_init__(self):
        coords = np.array(self.coords, dtype=float, copy=True)
        if coords.size == 0:
            coords = coords.reshape(0, 2)
        if coords.ndim != 2 or coords.shape[1] != 2:
            raise InvalidInputError(f"coords must have shape (n, 2), got {coords.shape}")
        if not np.all(np.isfinite(coords)):
            raise InvalidInputError("coords must be finite")
        inside = self.window.contains(coords[:, 0], coords[:, 1])
        if not np.all(inside):
            bad = coords[~inside][0]
            raise InvalidInputError(
                f"point ({bad[0]}, {bad[1]}) lies outside window {self.window}"
            )
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)

    def __len__(self) -> int:
        return self.coords.shape[0]

    @property
    def points(self) -> list[Point]:
        return [Point(float(x), float(y)) for x, y in self.coords]

    @classmethod
    def from_points(cls, window: Window, points: Iterable[Point]) -> "PointPattern":
        coords = np.array([(p.x, p.y) for p in points], dtype=float).reshape(-1, 2)
        return cls(window, coords)


@dataclass(frozen=True)
class Box:
    """Axis-aligned bounding box with a detection confidence in [0, 1]."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float
    confidence: float = 1.0

    def __post_init__(self):
        bounds = (self.x_min, self.y_min, self.x_max, self.y_max)
        if not all(math.isfinite(v) for v in bounds):
            raise InvalidInputError(f"box bounds must be finite, got {bounds}")
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise InvalidInputError(f"box must have positive area, got {bounds}")
        if not (math.isfinite(self.confidence) and 0.0 <= self.confidence <= 1.0):
            raise InvalidInputError(f"confidence must be in [0, 1], got {self.confidence}")

    @property
    def area(self) -> float:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)

    @property
    def center(self) -> Point:
        return Point((self.x_min + self.x_max) / 2.0, (self.y_min + self.y_max) / 2.0)

    def translate(self, dx: float, dy: float) -> "Box":
        return Box(self.x_min + dx, self.y_min + dy, self.x_max + dx, self.y_max + dy,
                   self.confidence)


def euclidean_distance(a: Point, b: Point) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)


def iou(a: Box, b: Box) -> float:
    """Intersection over union; 0 when the interiors are disjoint."""
    iw = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    ih = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    return inter / (a.area + b.area - inter)


def nearest_neighbor_distances(pattern: PointPattern, k: int = 1) -> np.ndarray:
    """Per-point distances to the k nearest other points, ascending.

    Returns an (n, k) array; row i holds the k smallest distances from
    point i to the remaining points. Exact: the k-d tree is only an
    accelerator and matches the all-pairs answer. Coincident points yield
    zero distances.
    """
    n = len(pattern)
    if n < 2:
        raise InvalidInputError(f"nearest-neighbor query needs at least 2 points, got {n}")
    if not 1 <= k <= n - 1:
        raise InvalidInputError(f"k must be in [1, {n - 1}], got {k}")
    tree = cKDTree(pattern.coords)
    dist, idx = tree.query(pattern.coords, k=k + 1)
    out = dist[:, 1:].copy()
    # With coincident points the self-match may land anywhere in the row
    # (distance ties); drop exactly one self entry per row.
    odd_rows = np.nonzero(idx[:, 0] != np.arange(n))[0]
    for i in odd_rows:
        self_pos = np.nonzero(idx[i] == i)[0]
        drop = int(self_pos[0]) if self_pos.size else k
        out[i] = np.delete(dist[i], drop)
    return out
