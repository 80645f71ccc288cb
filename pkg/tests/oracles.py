"""Independent brute-force references used to validate the fast paths.

Everything here is deliberately naive (full distance matrices, quadratic
loops, per-segment antiderivatives) and shares no code with the package
implementations it checks.
"""
import numpy as np


def all_pairs_distances(coords):
    diff = coords[:, None, :] - coords[None, :, :]
    return np.sqrt((diff ** 2).sum(axis=-1))


def brute_knn_distances(coords, k):
    """k smallest distances from each point to the others, ascending."""
    d = all_pairs_distances(np.asarray(coords, dtype=float))
    np.fill_diagonal(d, np.inf)
    d.sort(axis=1)
    return d[:, :k]


def brute_g_values(coords, grid_values):
    nnd = brute_knn_distances(coords, 1)[:, 0]
    return np.array([float((nnd < d).mean()) for d in grid_values])


def brute_f_values(coords, refs, grid_values):
    coords = np.asarray(coords, dtype=float)
    refs = np.asarray(refs, dtype=float)
    diff = refs[:, None, :] - coords[None, :, :]
    dmin = np.sqrt((diff ** 2).sum(axis=-1)).min(axis=1)
    return np.array([float((dmin < d).mean()) for d in grid_values])


def uniform_reference_stream(window, n_ref, seed):
    """Replicates the documented reference-point draw used by the F function."""
    rng = np.random.default_rng(seed)
    return rng.uniform((window.x_min, window.y_min), (window.x_max, window.y_max),
                       size=(n_ref, 2))


def brute_iou(a, b):
    wx = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    wy = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    inter = max(0.0, wx) * max(0.0, wy)
    area_a = (a.x_max - a.x_min) * (a.y_max - a.y_min)
    area_b = (b.x_max - b.x_min) * (b.y_max - b.y_min)
    if inter == 0.0:
        return 0.0
    return inter / (area_a + area_b - inter)


def brute_nms(boxes, threshold):
    """Quadratic greedy suppression with explicit suppressed-flag bookkeeping."""
    boxes = list(boxes)
    order = sorted(range(len(boxes)), key=lambda i: (-boxes[i].confidence, i))
    suppressed = [False] * len(boxes)
    kept = []
    for pos, i in enumerate(order):
        if suppressed[i]:
            continue
        kept.append(boxes[i])
        for j in order[pos + 1:]:
            if not suppressed[j] and brute_iou(boxes[i], boxes[j]) >= threshold:
                suppressed[j] = True
    return kept


def piecewise_linear_integral(xs, ys):
    """Exact integral of the linear interpolant via the midpoint rule, which
    is also exact for degree-1 segments but uses different arithmetic."""
    total = 0.0
    for (x0, x1, y0, y1) in zip(xs[:-1], xs[1:], ys[:-1], ys[1:]):
        xm = 0.5 * (x0 + x1)
        t = (xm - x0) / (x1 - x0)
        total += (x1 - x0) * (y0 + t * (y1 - y0))
    return total


# Fixed-scale CSR rejection rule used by the calibration checks. The rank
# p-values are exactly valid pointwise, so testing at three pre-chosen grid
# positions with a Bonferroni split keeps the overall level at or below 5%
# regardless of the dependence between grid points. The positions sit at
# 4%, 8% and 12% of the grid, the short-distance range where
# nearest-neighbor statistics discriminate.
REJECTION_GRID_FRACTIONS = (0.04, 0.08, 0.12)


def rejects_csr_at_5pct(result) -> bool:
    n = len(result.p_values)
    alpha_each = 0.05 / len(REJECTION_GRID_FRACTIONS)
    for frac in REJECTION_GRID_FRACTIONS:
        idx = int(round(frac * n))
        p = result.p_values[idx]
        if np.isfinite(p) and p <= alpha_each:
            return True
    return False
