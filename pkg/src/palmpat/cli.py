"""Command-line front end: CSV in, CSV (and optional SVG) out.

Subcommands map one-to-one onto library operations; multi-step analyses
compose through files so every intermediate stays auditable:

    ripley     G/F/J curve for a points file      -> ripley_<stat>.csv
    envelope   Monte Carlo CSR envelope test      -> envelope_<stat>.csv
    simulate   CSR or bimodal pattern generator   -> simulated_points.csv
    fit        grid-search (p, sigma) estimation  -> fit_table.csv
    merge      tile-to-global mapping + NMS       -> merged_boxes.csv, merged_centers.csv
    count      match detected vs labeled centers  -> count_report.csv
    nn-stats   k-nearest-neighbor distance stats  -> nn_stats.csv, nn_histogram.csv

File schemas (UTF-8, '.' decimal separator, LF line endings):
points ``x,y``; detections ``tile_row,tile_col,x_min,y_min,x_max,y_max,confidence``
(plain ``x_min,...,confidence`` with --global); curves ``d,value``; envelopes
``d,observed,mean,lo95,hi95,p``; fit table ``p,sigma,d_total,d_1..d_N``.

Every subcommand takes --seed (default 0, never wall-clock). Identical
invocations produce byte-identical outputs; PALMPAT_THREADS caps the
worker count used by fit and envelope (0 or unset = auto).

Exit codes: 0 success, 2 usage error, 3 data error.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .detections import (
    DEFAULT_IOU_THRESHOLD,
    DEFAULT_MATCH_RADIUS,
    DEFAULT_PATCH_SIZE,
    DEFAULT_STRIDE,
    DetectionSet,
    TileLayout,
    centers,
    match_counts,
    merge_nms,
)
from .envelope import DEFAULT_SIMULATIONS, envelope, simulate_csr
from .errors import InvalidInputError
from .geometry import Box, Point, PointPattern, Window
from .reproduction import DEFAULT_TRIALS, ReproductionParams, fit, simulate_reproduction
from .ripley import (
    DEFAULT_GRID_STEPS,
    DistanceGrid,
    f_function,
    g_function,
    j_function,
    nn_stats,
)
from .seeding import DEFAULT_SEED

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3


@dataclass
class RunConfig:
    """Aggregated experiment settings shared across subcommands."""

    seed: int = DEFAULT_SEED
    units_per_meter: float = 1.0
    grid_max: float | None = None  # None = half the shorter window side
    grid_steps: int = DEFAULT_GRID_STEPS
    n_ref: int | None = None       # None = max(1000, n)
    envelope_m: int = DEFAULT_SIMULATIONS
    n_trials: int = DEFAULT_TRIALS
    p_candidates: list[float] = field(default_factory=list)
    sigma_candidates: list[float] = field(default_factory=list)
    iou_threshold: float = DEFAULT_IOU_THRESHOLD
    match_radius: float = DEFAULT_MATCH_RADIUS

    def make_grid(self, window: Window) -> DistanceGrid:
        if self.grid_steps < 2:
            raise InvalidInputError(f"--grid-steps must be >= 2, got {self.grid_steps}")
        if self.grid_max is None:
            return DistanceGrid.default(window, self.grid_steps)
        if self.grid_max <= 0:
            raise InvalidInputError(f"--grid-max must be positive, got {self.grid_max}")
        return DistanceGrid(np.linspace(0.0, self.grid_max, self.grid_steps))


# ---------------------------------------------------------------- parsing


def parse_range(text: str) -> list[float]:
    """``start:stop:step`` inclusive of both endpoints (1e-9 tolerance),
    or a single value."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return [float(parts[0])]
        if len(parts) == 3:
            start, stop, step = (float(p) for p in parts)
        else:
            raise ValueError
    except ValueError:
        raise InvalidInputError(f"expected NUMBER or START:STOP:STEP, got {text!r}")
    if step <= 0:
        raise InvalidInputError(f"range step must be positive, got {step}")
    if stop < start:
        raise InvalidInputError(f"range stop {stop} is below start {start}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(count)]


def _read_rows(path, expected_header: str):
    try:
        text = Path(path).read_text(encoding="utf-8-sig")
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc}")
    lines = text.splitlines()
    if not lines:
        raise InvalidInputError(f"{path}: empty file")
    header = lines[0].strip()
    if header != expected_header:
        raise InvalidInputError(
            f"{path}: expected header {expected_header!r}, got {header!r}"
        )
    rows = []
    n_fields = expected_header.count(",") + 1
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = [f.strip() for f in line.split(",")]
        if len(fields) != n_fields:
            raise InvalidInputError(
                f"{path}:{lineno}: expected {n_fields} fields, got {len(fields)}"
            )
        try:
            values = [float(f) for f in fields]
        except ValueError:
            raise InvalidInputError(f"{path}:{lineno}: non-numeric field in {line!r}")
        if not all(math.isfinite(v) for v in values):
            raise InvalidInputError(f"{path}:{lineno}: non-finite value in {line!r}")
        rows.append(values)
    if not rows:
        raise InvalidInputError(f"{path}: no data rows")
    return rows


def parse_points_csv(
    path,
    units_per_meter: float = 1.0,
    window: Window | None = None,
) -> PointPattern:
    """Load an ``x,y`` file, scale into meters, and attach a window.

    Coordinates (and any explicit window bounds) are divided by
    ``units_per_meter``. Without an explicit window the points' bounding
    box is used and a notice is logged.
    """
    if units_per_meter <= 0:
        raise InvalidInputError(f"units_per_meter must be positive, got {units_per_meter}")
    coords = np.array(_read_rows(path, "x,y")) / units_per_meter
    if window is None:
        x_min, y_min = coords.min(axis=0)
        x_max, y_max = coords.max(axis=0)
        if not (x_min < x_max and y_min < y_max):
            raise InvalidInputError(
                f"{path}: degenerate bounding box; pass an explicit --window"
            )
        window = Window(float(x_min), float(y_min), float(x_max), float(y_max))
        logger.info("no --window given; using the points' bounding box %s", window)
    return PointPattern(window, coords)


def parse_detections_csv(path, global_coords: bool, layout: TileLayout | None) -> DetectionSet:
    if global_coords:
        rows = _read_rows(path, "x_min,y_min,x_max,y_max,confidence")
        boxes = tuple((0, 0, Box(*row)) for row in rows)
        return DetectionSet(None, boxes)
    rows = _read_rows(path, "tile_row,tile_col,x_min,y_min,x_max,y_max,confidence")
    boxes = []
    for row in rows:
        r, c = row[0], row[1]
        if r != int(r) or c != int(c):
            raise InvalidInputError(f"{path}: tile indices must be integers, got ({r}, {c})")
        boxes.append((int(r), int(c), Box(*row[2:])))
    return DetectionSet(layout, tuple(boxes))


# ---------------------------------------------------------------- output


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_curve_svg(path, x, series, band=None, width=640, height=400) -> None:
    """Minimal deterministic line chart: optional band polygon + polylines.

    ``series`` is a list of (label, values) pairs; NaN entries break the line.
    """
    x = np.asarray(x, dtype=float)
    ys = [np.asarray(v, dtype=float) for _, v in series]
    stack = [v[np.isfinite(v)] for v in ys if np.isfinite(v).any()]
    if band is not None:
        stack += [np.asarray(b)[np.isfinite(b)] for b in band]
    y_all = np.concatenate(stack) if stack else np.array([0.0, 1.0])
    y_lo, y_hi = float(y_all.min()), float(y_all.max())
    if y_hi <= y_lo:
        y_hi = y_lo + 1.0
    x_lo, x_hi = float(x.min()), float(x.max())
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0
    pad = 40.0

    def sx(v):
        return pad + (v - x_lo) / (x_hi - x_lo) * (width - 2 * pad)

    def sy(v):
        return height - pad - (v - y_lo) / (y_hi - y_lo) * (height - 2 * pad)

    def pts(xv, yv):
        return " ".join(
            f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(xv, yv) if math.isfinite(b)
        )

    colors = ("#c0392b", "#2c3e50", "#2980b9", "#27ae60")
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    if band is not None:
        lo, hi = (np.asarray(b, dtype=float) for b in band)
        ok = np.isfinite(lo) & np.isfinite(hi)
        if ok.any():
            ring = pts(x[ok], hi[ok]) + " " + pts(x[ok][::-1], lo[ok][::-1])
            parts.append(f'<polygon points="{ring}" fill="#aed6f1" stroke="none"/>')
    for i, (label, yv) in enumerate(series):
        color = colors[i % len(colors)]
        parts.append(
            f'<polyline points="{pts(x, np.asarray(yv, dtype=float))}" fill="none" '
            f'stroke="{color}" stroke-width="1.5"><title>{label}</title></polyline>'
        )
    parts.append(
        f'<text x="{pad}" y="{height - 10:.0f}" font-size="11" fill="#333">'
        f"x: {x_lo:.6g} to {x_hi:.6g}; y: {y_lo:.6g} to {y_hi:.6g}</text>"
    )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(parts) + "\n")


def _out_path(args, name: str) -> Path:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir / name


# ---------------------------------------------------------------- commands


def _config_from(args) -> RunConfig:
    cfg = RunConfig()
    for name in vars(cfg):
        cli_name = name
        if hasattr(args, cli_name) and getattr(args, cli_name) is not None:
            setattr(cfg, name, getattr(args, cli_name))
    if getattr(args, "grid_max", None) is not None:
        if args.grid_max == "auto":
            cfg.grid_max = None
        else:
            try:
                cfg.grid_max = float(args.grid_max)
            except ValueError:
                raise InvalidInputError(
                    f"--grid-max must be a number or 'auto', got {args.grid_max!r}"
                )
    return cfg


def _load_pattern(args, cfg: RunConfig) -> PointPattern:
    window = None
    if getattr(args, "window", None) is not None:
        w = [v / cfg.units_per_meter for v in args.window]
        window = Window(*w)
    return parse_points_csv(args.points, cfg.units_per_meter, window)


def cmd_ripley(args) -> int:
    cfg = _config_from(args)
    pattern = _load_pattern(args, cfg)
    grid = cfg.make_grid(pattern.window)
    stat = args.stat.upper()
    if stat == "G":
        curve = g_function(pattern, grid)
    elif stat == "F":
        curve = f_function(pattern, grid, cfg.n_ref, cfg.seed)
    else:
        g = g_function(pattern, grid)
        f = f_function(pattern, grid, cfg.n_ref, cfg.seed)
        curve = j_function(g, f)
    path = _out_path(args, f"ripley_{args.stat.lower()}.csv")
    write_csv(path, ["d", "value"], zip(grid.values, curve.values))
    if args.svg:
        svg = _out_path(args, f"ripley_{args.stat.lower()}.svg")
        write_curve_svg(svg, grid.values, [(stat, curve.values)])
        print(f"wrote {svg}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_envelope(args) -> int:
    cfg = _config_from(args)
    pattern = _load_pattern(args, cfg)
    grid = cfg.make_grid(pattern.window)
    result = envelope(pattern, grid, args.stat.upper(), cfg.envelope_m, cfg.seed, cfg.n_ref)
    path = _out_path(args, f"envelope_{args.stat.lower()}.csv")
    write_csv(
        path,
        ["d", "observed", "mean", "lo95", "hi95", "p"],
        zip(grid.values, result.observed, result.sim_mean, result.lo95,
            result.hi95, result.p_values),
    )
    if args.svg:
        svg = _out_path(args, f"envelope_{args.stat.lower()}.svg")
        write_curve_svg(
            svg, grid.values,
            [("observed", result.observed), ("sim mean", result.sim_mean)],
            band=(result.lo95, result.hi95),
        )
        print(f"wrote {svg}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _config_from(args)
    window = Window(*args.window)
    if (args.p is None) != (args.sigma is None):
        raise InvalidInputError("--p and --sigma must be given together (or neither, for CSR)")
    if args.p is None:
        pattern = simulate_csr(window, args.n, cfg.seed)
    else:
        pattern = simulate_reproduction(
            window, args.n, ReproductionParams(args.p, args.sigma), cfg.seed
        )
    path = _out_path(args, "simulated_points.csv")
    write_csv(path, ["x", "y"], pattern.coords)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_fit(args) -> int:
    cfg = _config_from(args)
    cfg.p_candidates = parse_range(args.p)
    cfg.sigma_candidates = parse_range(args.sigma)
    pattern = _load_pattern(args, cfg)
    grid = cfg.make_grid(pattern.window)
    result = fit(
        pattern, cfg.p_candidates, cfg.sigma_candidates,
        n_trials=cfg.n_trials, grid=grid, n_ref=cfg.n_ref, seed=cfg.seed,
    )
    header = ["p", "sigma", "d_total"] + [f"d_{i}" for i in range(1, cfg.n_trials + 1)]
    rows = [[c.p, c.sigma, c.d_total, *c.d_trials] for c in result.table]
    path = _out_path(args, "fit_table.csv")
    write_csv(path, header, rows)
    print(f"wrote {path}")
    print(f"p*={_fmt(result.best.p)} sigma*={_fmt(result.best.sigma)} d_min={_fmt(result.d_min)}")
    return EXIT_OK


def cmd_merge(args) -> int:
    cfg = _config_from(args)
    if args.global_coords:
        detset = parse_detections_csv(args.detections, True, None)
    else:
        layout = TileLayout(args.patch_size, args.stride, Point(*args.origin))
        detset = parse_detections_csv(args.detections, False, layout)
    merged = merge_nms(detset.global_boxes(), cfg.iou_threshold)
    boxes_path = _out_path(args, "merged_boxes.csv")
    write_csv(
        boxes_path,
        ["x_min", "y_min", "x_max", "y_max", "confidence"],
        ([b.x_min, b.y_min, b.x_max, b.y_max, b.confidence] for b in merged),
    )
    centers_path = _out_path(args, "merged_centers.csv")
    write_csv(centers_path, ["x", "y"], ([c.x, c.y] for c in centers(merged)))
    print(f"wrote {boxes_path}")
    print(f"wrote {centers_path}")
    print(f"kept {len(merged)} of {len(detset.boxes)} boxes")
    return EXIT_OK


def cmd_count(args) -> int:
    cfg = _config_from(args)
    detected = np.array(_read_rows(args.detected, "x,y")) / cfg.units_per_meter
    labeled = np.array(_read_rows(args.labeled, "x,y")) / cfg.units_per_meter
    report = match_counts(detected, labeled, cfg.match_radius)
    path = _out_path(args, "count_report.csv")
    write_csv(
        path,
        ["metric", "value"],
        [
            ["n_labeled", report.n_labeled],
            ["n_detected", report.n_detected],
            ["n_matched", len(report.matched)],
            ["accuracy", report.accuracy],
            ["detected_rate", report.detected_rate],
            ["shift_mean", report.shift_mean],
            ["shift_median", report.shift_median],
            ["shift_std", report.shift_std],
        ],
    )
    print(f"wrote {path}")
    print(
        f"accuracy={_fmt(report.accuracy)} matched={len(report.matched)}/{report.n_labeled} "
        f"shift_mean={_fmt(report.shift_mean)}"
    )
    return EXIT_OK


def cmd_nn_stats(args) -> int:
    cfg = _config_from(args)
    pattern = _load_pattern(args, cfg)
    stats = nn_stats(pattern, args.k, args.bins)
    stats_path = _out_path(args, "nn_stats.csv")
    write_csv(
        stats_path,
        ["metric", "value"],
        [["k", args.k], ["n", len(pattern)], ["mean", stats.mean],
         ["median", stats.median], ["std", stats.std]],
    )
    hist_path = _out_path(args, "nn_histogram.csv")
    write_csv(
        hist_path,
        ["bin_lo", "bin_hi", "count"],
        ([stats.bin_edges[i], stats.bin_edges[i + 1], int(stats.counts[i])]
         for i in range(len(stats.counts))),
    )
    print(f"wrote {stats_path}")
    print(f"wrote {hist_path}")
    print(f"mean={_fmt(stats.mean)} median={_fmt(stats.median)} std={_fmt(stats.std)}")
    return EXIT_OK


# ---------------------------------------------------------------- wiring


def _add_common(sub, points=True):
    sub.add_argument("--seed", type=int, default=None,
                     help=f"master RNG seed (default {DEFAULT_SEED})")
    sub.add_argument("--out-dir", default=".", help="output directory (default .)")
    if points:
        sub.add_argument("--points", required=True, help="points CSV with header x,y")
        sub.add_argument("--units-per-meter", type=float, default=None, dest="units_per_meter",
                         help="input units per meter; coordinates are divided by this (default 1)")
        sub.add_argument("--window", type=float, nargs=4, default=None,
                         metavar=("X_MIN", "Y_MIN", "X_MAX", "Y_MAX"),
                         help="observation window in input units (default: points' bounding box)")


def _add_grid(sub):
    sub.add_argument("--grid-max", default=None,
                     help="largest grid distance, or 'auto' for half the shorter window side")
    sub.add_argument("--grid-steps", type=int, default=None, dest="grid_steps",
                     help=f"number of grid distances (default {DEFAULT_GRID_STEPS})")
    sub.add_argument("--n-ref", type=int, default=None, dest="n_ref",
                     help="reference points for F (default max(1000, n))")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="palmpat",
        description="Spatial point-pattern statistics and detection postprocessing.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    s = subs.add_parser("ripley", help="compute a G, F or J curve")
    _add_common(s)
    _add_grid(s)
    s.add_argument("--stat", choices=["g", "f", "j"], required=True)
    s.add_argument("--svg", action="store_true", help="also write an SVG line chart")
    s.set_defaults(func=cmd_ripley)

    s = subs.add_parser("envelope", help="Monte Carlo CSR envelope test")
    _add_common(s)
    _add_grid(s)
    s.add_argument("--stat", choices=["g", "f", "j"], required=True)
    s.add_argument("--m", type=int, default=None, dest="envelope_m",
                   help=f"number of CSR simulations (default {DEFAULT_SIMULATIONS})")
    s.add_argument("--svg", action="store_true", help="also write an SVG line chart")
    s.set_defaults(func=cmd_envelope)

    s = subs.add_parser("simulate", help="generate a CSR or bimodal pattern")
    _add_common(s, points=False)
    s.add_argument("--n", type=int, required=True, help="number of points")
    s.add_argument("--window", type=float, nargs=4, required=True,
                   metavar=("X_MIN", "Y_MIN", "X_MAX", "Y_MAX"))
    s.add_argument("--p", type=float, default=None,
                   help="clustering probability (omit for CSR)")
    s.add_argument("--sigma", type=float, default=None,
                   help="Gaussian offspring spread (omit for CSR)")
    s.set_defaults(func=cmd_simulate)

    s = subs.add_parser("fit", help="grid-search (p, sigma) for a points file")
    _add_common(s)
    _add_grid(s)
    s.add_argument("--p", required=True, help="candidates, NUMBER or START:STOP:STEP")
    s.add_argument("--sigma", required=True, help="candidates, NUMBER or START:STOP:STEP")
    s.add_argument("--trials", type=int, default=None, dest="n_trials",
                   help=f"simulations per candidate pair (default {DEFAULT_TRIALS})")
    s.set_defaults(func=cmd_fit)

    s = subs.add_parser("merge", help="map tiled detections to global coordinates and run NMS")
    _add_common(s, points=False)
    s.add_argument("--detections", required=True, help="detections CSV")
    s.add_argument("--global", action="store_true", dest="global_coords",
                   help="detections are already in global coordinates")
    s.add_argument("--patch-size", type=int, default=DEFAULT_PATCH_SIZE, dest="patch_size")
    s.add_argument("--stride", type=int, default=DEFAULT_STRIDE)
    s.add_argument("--origin", type=float, nargs=2, default=(0.0, 0.0), metavar=("X", "Y"))
    s.add_argument("--iou", type=float, default=None, dest="iou_threshold",
                   help=f"NMS IoU threshold (default {DEFAULT_IOU_THRESHOLD})")
    s.set_defaults(func=cmd_merge)

    s = subs.add_parser("count", help="score detected centers against labeled centers")
    _add_common(s, points=False)
    s.add_argument("--detected", required=True, help="detected centers CSV (x,y)")
    s.add_argument("--labeled", required=True, help="labeled centers CSV (x,y)")
    s.add_argument("--radius", type=float, default=None, dest="match_radius",
                   help=f"match radius in meters (default {DEFAULT_MATCH_RADIUS})")
    s.add_argument("--units-per-meter", type=float, default=None, dest="units_per_meter")
    s.set_defaults(func=cmd_count)

    s = subs.add_parser("nn-stats", help="k-nearest-neighbor distance statistics")
    _add_common(s)
    s.add_argument("--k", type=int, default=5, help="neighbors per point (default 5)")
    s.add_argument("--bins", type=int, default=30, help="histogram bins (default 30)")
    s.set_defaults(func=cmd_nn_stats)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse prints its own message
        return int(exc.code or 0)
    try:
        return args.func(args)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
