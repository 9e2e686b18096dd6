"""Reference-path representation and Cartesian <-> Frenet conversion.

A reference path is a resampled polyline; s runs along it, d is the signed
lateral offset (positive to the left of the local tangent). Conversions in
both directions use the same per-segment frames, so round trips are exact up
to floating-point noise for points whose projection falls inside a segment.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Maximum waypoint spacing after resampling [m].
WAYPOINT_SPACING = 1.0
# Half-width of the lateral corridor in which projection is accepted [m].
LATERAL_CORRIDOR = 20.0
# Waypoint window searched around a warm-start hint before falling back
# to a full scan.
_HINT_WINDOW = 30


class PathConstructionError(ValueError):
    """Raised when a reference path cannot be built from the given points."""


class OutOfCorridorError(ValueError):
    """Raised when a point lies outside the lateral corridor of the path."""


@dataclass(frozen=True)
class FrenetPoint:
    """State in path coordinates: arclength s, lateral offset d, derivatives."""

    s: float
    d: float
    s_dot: float = 0.0
    d_dot: float = 0.0
    s_ddot: float = 0.0
    d_ddot: float = 0.0


@dataclass(frozen=True)
class CartesianState:
    """Pose produced by frenet_to_cartesian."""

    position: np.ndarray  # (2,)
    heading: float
    velocity: np.ndarray  # (2,)


class ReferencePath:
    """Immutable resampled polyline with cached arclength and tangent frames.

    Do not construct directly; use build_reference_path / load_reference_path.
    """

    def __init__(self, waypoints: np.ndarray, cumulative_arclength: np.ndarray):
        self.waypoints = waypoints
        self.cumulative_arclength = cumulative_arclength
        seg = np.diff(waypoints, axis=0)
        seg_len = np.hypot(seg[:, 0], seg[:, 1])
        self._seg_vec = seg
        self._seg_len = seg_len
        self._seg_ds = np.diff(cumulative_arclength)
        tang = seg / seg_len[:, None]
        self._tangent = tang
        self._normal = np.column_stack([-tang[:, 1], tang[:, 0]])
        seg_heading = np.unwrap(np.arctan2(seg[:, 1], seg[:, 0]))
        self._seg_heading = seg_heading
        # Per-waypoint headings: heading of the following segment, last
        # waypoint inherits the final segment.
        self.headings = np.append(seg_heading, seg_heading[-1])
        self.waypoints.setflags(write=False)
        self.cumulative_arclength.setflags(write=False)

    @property
    def length(self) -> float:
        return float(self.cumulative_arclength[-1])

    def segment_of(self, s):
        """Index of the segment containing arclength s (clamped)."""
        idx = np.searchsorted(self.cumulative_arclength, s, side="right") - 1
        return np.clip(idx, 0, len(self._seg_len) - 1)

    def heading_at(self, s):
        return self._seg_heading[self.segment_of(s)]


def build_reference_path(raw_points) -> ReferencePath:
    """Resample a polyline to uniform <= 1 m spacing and cache path frames.

    Arclength is measured along the input polyline, so resampling does not
    shorten the path.
    """
    pts = np.asarray(raw_points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise PathConstructionError("need at least 2 two-dimensional points")
    step = np.diff(pts, axis=0)
    step_len = np.hypot(step[:, 0], step[:, 1])
    if np.any(step_len < 1e-12):
        raise PathConstructionError("duplicate consecutive points")
    raw_cum = np.concatenate([[0.0], np.cumsum(step_len)])
    total = raw_cum[-1]
    n_seg = int(np.ceil(total / WAYPOINT_SPACING))
    ticks = np.linspace(0.0, total, n_seg + 1)
    xs = np.interp(ticks, raw_cum, pts[:, 0])
    ys = np.interp(ticks, raw_cum, pts[:, 1])
    return ReferencePath(np.column_stack([xs, ys]), ticks)


def load_reference_path(filename) -> ReferencePath:
    """Read a path from a text file with one whitespace-separated x y per line."""
    pts = []
    with open(filename, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            fields = line.split()
            if len(fields) != 2:
                raise PathConstructionError(
                    f"{filename}:{lineno}: expected 'x y', got {line!r}"
                )
            pts.append((float(fields[0]), float(fields[1])))
    return build_reference_path(pts)


def _project(path: ReferencePath, point, hint_s=None):
    """Project a point onto the path.

    Returns (s, d, seg_index). Nearest waypoint found by local search around
    hint_s when given, with full-scan fallback if the local minimum sits on
    the window edge. Of the two segments meeting at the nearest waypoint, the
    point is assigned by the tangent-bisector plane at that waypoint; unlike
    a raw distance comparison this keeps s nondecreasing along traversals and
    round trips exact.
    """
    wp = path.waypoints
    n = len(wp)
    p = np.asarray(point, dtype=float)

    idx = None
    if hint_s is not None:
        center = int(path.segment_of(hint_s))
        lo = max(0, center - _HINT_WINDOW)
        hi = min(n, center + _HINT_WINDOW + 1)
        d2 = np.sum((wp[lo:hi] - p) ** 2, axis=1)
        local = int(np.argmin(d2))
        if (local > 0 or lo == 0) and (local < hi - lo - 1 or hi == n):
            idx = lo + local
    if idx is None:
        d2 = np.sum((wp - p) ** 2, axis=1)
        idx = int(np.argmin(d2))

    if idx == 0:
        j = 0
    elif idx == n - 1:
        j = n - 2
    else:
        bisector = path._tangent[idx - 1] + path._tangent[idx]
        j = idx - 1 if float(np.dot(p - wp[idx], bisector)) < 0.0 else idx

    rel = p - wp[j]
    t = float(np.dot(rel, path._seg_vec[j])) / (path._seg_len[j] ** 2)
    t = min(max(t, 0.0), 1.0)
    foot = wp[j] + t * path._seg_vec[j]
    s = path.cumulative_arclength[j] + t * path._seg_ds[j]
    off = p - foot
    tx, ty = path._tangent[j]
    d = float(tx * off[1] - ty * off[0])
    return float(s), d, j


def cartesian_to_frenet(
    path: ReferencePath,
    position,
    velocity=(0.0, 0.0),
    acceleration=(0.0, 0.0),
    hint_s=None,
) -> FrenetPoint:
    """Convert a Cartesian state to path coordinates.

    Derivatives are rotated into the segment tangent/normal frame (small
    curvature form, no d*kappa coupling). Raises OutOfCorridorError when the
    lateral offset exceeds the corridor half-width.
    """
    s, d, j = _project(path, position, hint_s=hint_s)
    if abs(d) > LATERAL_CORRIDOR:
        raise OutOfCorridorError(f"lateral offset {d:.2f} m exceeds corridor")
    t_hat = path._tangent[j]
    n_hat = path._normal[j]
    v = np.asarray(velocity, dtype=float)
    a = np.asarray(acceleration, dtype=float)
    return FrenetPoint(
        s=s,
        d=d,
        s_dot=float(np.dot(v, t_hat)),
        d_dot=float(np.dot(v, n_hat)),
        s_ddot=float(np.dot(a, t_hat)),
        d_ddot=float(np.dot(a, n_hat)),
    )


def frenet_to_cartesian(path: ReferencePath, fp: FrenetPoint) -> CartesianState:
    """Inverse conversion; s must lie within [0, path.length]."""
    if fp.s < -1e-9 or fp.s > path.length + 1e-9:
        raise ValueError(f"s={fp.s} outside [0, {path.length}]")
    j = int(path.segment_of(fp.s))
    t = (fp.s - path.cumulative_arclength[j]) / path._seg_ds[j]
    base = path.waypoints[j] + t * path._seg_vec[j]
    t_hat = path._tangent[j]
    n_hat = path._normal[j]
    position = base + fp.d * n_hat
    velocity = fp.s_dot * t_hat + fp.d_dot * n_hat
    heading = path._seg_heading[j]
    if abs(fp.s_dot) > 1e-12 or abs(fp.d_dot) > 1e-12:
        heading = heading + np.arctan2(fp.d_dot, fp.s_dot)
    return CartesianState(position=position, heading=float(heading), velocity=velocity)


def frenet_to_cartesian_batch(path: ReferencePath, s, d, s_dot=None, d_dot=None):
    """Vectorized frenet_to_cartesian over arrays of samples.

    Returns (positions (N,2), headings (N,)). Used on trajectory sample
    arrays where per-point object construction would dominate.
    """
    s = np.asarray(s, dtype=float)
    d = np.asarray(d, dtype=float)
    if np.any(s < -1e-9) or np.any(s > path.length + 1e-9):
        raise ValueError("s outside path range")
    j = path.segment_of(s)
    t = (s - path.cumulative_arclength[j]) / path._seg_ds[j]
    base = path.waypoints[j] + t[:, None] * path._seg_vec[j]
    positions = base + d[:, None] * path._normal[j]
    headings = path._seg_heading[j].copy()
    if s_dot is not None:
        s_dot = np.asarray(s_dot, dtype=float)
        d_dot = np.asarray(d_dot, dtype=float)
        moving = (np.abs(s_dot) > 1e-12) | (np.abs(d_dot) > 1e-12)
        headings = np.where(
            moving, headings + np.arctan2(d_dot, s_dot), headings
        )
    return positions, headings
