"""Postprocessing for tiled detector output: patch-to-global coordinates,
duplicate removal across overlapping tiles, and count scoring against
labeled centers."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import InvalidInputError
from .geometry import Box, Point, euclidean_distance, iou

DEFAULT_PATCH_SIZE = 800
DEFAULT_STRIDE = 400
DEFAULT_IOU_THRESHOLD = 0.5
DEFAULT_MATCH_RADIUS = 5.0


@dataclass(frozen=True)
class TileLayout:
    """Sliding-window tiling: tile (r, c) starts at origin + (c, r) * stride."""

    patch_size: int = DEFAULT_PATCH_SIZE
    stride: int = DEFAULT_STRIDE
    origin: Point = field(default_factory=lambda: Point(0.0, 0.0))

    def __post_init__(self):
        if self.patch_size <= 0:
            raise InvalidInputError(f"patch_size must be positive, got {self.patch_size}")
        if not 0 < self.stride <= self.patch_size:
            raise InvalidInputError(
                f"stride must be in (0, patch_size={self.patch_size}], got {self.stride}"
            )


@dataclass(frozen=True)
class DetectionSet:
    """Boxes tagged with their tile of origin; ``layout=None`` means the
    coordinates are already global."""

    layout: TileLayout | None
    boxes: tuple[tuple[int, int, Box], ...]

    def __post_init__(self):
        boxes = tuple((int(r), int(c), b) for r, c, b in self.boxes)
        for r, c, b in boxes:
            if r < 0 or c < 0:
                raise InvalidInputError(f"tile indices must be nonnegative, got ({r}, {c})")
            if self.layout is not None:
                s = self.layout.patch_size
                if not (0.0 <= b.x_min and b.x_max <= s and 0.0 <= b.y_min and b.y_max <= s):
                    raise InvalidInputError(
                        f"box {b} exceeds the {s}x{s} patch extent of tile ({r}, {c})"
                    )
        object.__setattr__(self, "boxes", boxes)

    def global_boxes(self) -> list[Box]:
        if self.layout is None:
            return [b for _, _, b in self.boxes]
        return [to_global(self.layout, r, c, b) for r, c, b in self.boxes]


def to_global(layout: TileLayout, tile_row: int, tile_col: int, box: Box) -> Box:
    """Translate a patch-local box into global coordinates."""
    if tile_row < 0 or tile_col < 0:
        raise InvalidInputError(f"tile indices must be nonnegative, got ({tile_row}, {tile_col})")
    return box.translate(
        layout.origin.x + tile_col * layout.stride,
        layout.origin.y + tile_row * layout.stride,
    )


def merge_nms(boxes, iou_threshold: float = DEFAULT_IOU_THRESHOLD) -> list[Box]:
    """Greedy non-maximum suppression.

    Boxes are visited by descending confidence (input order breaks ties);
    a box is kept iff its IoU with every already-kept box stays below the
    threshold. Returns kept boxes in visit order.
    """
    if not 0.0 < iou_threshold <= 1.0:
        raise InvalidInputError(f"iou_threshold must be in (0, 1], got {iou_threshold}")
    boxes = list(boxes)
    order = sorted(range(len(boxes)), key=lambda i: (-boxes[i].confidence, i))
    kept: list[Box] = []
    for i in order:
        candidate = boxes[i]
        if all(iou(candidate, k) < iou_threshold for k in kept):
            kept.append(candidate)
    return kept


def centers(boxes) -> list[Point]:
    return [b.center for b in boxes]


@dataclass(frozen=True)
class Match:
    detected: Point
    labeled: Point
    distance: float


@dataclass(frozen=True)
class MatchReport:
    """One-to-one matching of detections to labels within a radius.

    ``accuracy`` divides by the labeled count (recall-style) and is NaN
    when there are no labels; ``detected_rate`` divides by the detected
    count. Shift statistics are over matched distances; std uses the n-1
    denominator and is NaN below 2 matches.
    """

    matched: tuple[Match, ...]
    n_labeled: int
    n_detected: int
    accuracy: float
    detected_rate: float
    shift_mean: float
    shift_median: float
    shift_std: float


def _as_points(seq) -> list[Point]:
    out = []
    for p in seq:
        if isinstance(p, Point):
            out.append(p)
        else:
            x, y = p
            out.append(Point(float(x), float(y)))
    return out


def match_counts(detected, labeled, radius: float = DEFAULT_MATCH_RADIUS) -> MatchReport:
    """Greedily pair detections with labels, nearest pairs first.

    Candidate pairs are those within ``radius``; they are matched in
    ascending distance order (ties: lower labeled index, then lower
    detected index), each point used at most once.
    """
    if not (math.isfinite(radius) and radius > 0.0):
        raise InvalidInputError(f"radius must be positive, got {radius}")
    detected = _as_points(detected)
    labeled = _as_points(labeled)

    pairs: list[tuple[float, int, int]] = []
    if detected and labeled:
        det_arr = np.array([(p.x, p.y) for p in detected])
        tree = cKDTree(det_arr)
        # Query a hair wide, then gate on the recomputed distance so the
        # "<= radius" rule is exact under one distance definition.
        ball = radius * (1.0 + 1e-12) + 1e-12
        for li, lab in enumerate(labeled):
            for di in tree.query_ball_point((lab.x, lab.y), ball):
                dist = euclidean_distance(detected[di], lab)
                if dist <= radius:
                    pairs.append((dist, li, di))
    pairs.sort()

    used_labeled: set[int] = set()
    used_detected: set[int] = set()
    matched: list[Match] = []
    for dist, li, di in pairs:
        if li in used_labeled or di in used_detected:
            continue
        used_labeled.add(li)
        used_detected.add(di)
        matched.append(Match(detected[di], labeled[li], dist))

    shifts = np.array([m.distance for m in matched])
    n_matched = len(matched)
    return MatchReport(
        matched=tuple(matched),
        n_labeled=len(labeled),
        n_detected=len(detected),
        accuracy=n_matched / len(labeled) if labeled else float("nan"),
        detected_rate=n_matched / len(detected) if detected else float("nan"),
        shift_mean=float(shifts.mean()) if n_matched else float("nan"),
        shift_median=float(np.median(shifts)) if n_matched else float("nan"),
        shift_std=float(shifts.std(ddof=1)) if n_matched >= 2 else float("nan"),
    )
