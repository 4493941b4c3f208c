"""Continuous 2D geometry: ray casts, FOV depth sweeps, visibility.

Screen convention used by every consumer (readouts, renderer, web client):
column 0 is the leftmost screen column and carries the largest bearing
(viewer-left); bearings decrease monotonically left to right. Column j of a
K-column sweep is cast at ``theta + fov * (0.5 - (j + 0.5) / K)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import _kernels
from .mapdata import WorldMap

DEFAULT_FOV = math.pi / 2
DEFAULT_COLUMNS = 320
DEFAULT_MAX_RANGE = 64.0

# Disparity clamp: 1 / max(distance, this), so a pose touching a wall cannot
# produce an infinite readout.
DISPARITY_MIN_DISTANCE = 1e-3

_EPS = 1e-9


def wrap_angle(theta: float) -> float:
    """Wrap an angle to the canonical range [-pi, pi)."""
    if not math.isfinite(theta):
        raise ValueError(f"cannot wrap non-finite angle {theta!r}")
    r = math.remainder(theta, math.tau)
    if r >= math.pi:
        r -= math.tau
    return r


@dataclass(frozen=True)
class Pose:
    """Player position and yaw; theta is wrapped at construction."""

    x: float
    y: float
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", wrap_angle(self.theta))

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)

    def forward(self) -> tuple[float, float]:
        return (math.cos(self.theta), math.sin(self.theta))


@dataclass(frozen=True)
class Ray:
    origin: tuple[float, float]
    direction: tuple[float, float]

    def __post_init__(self):
        norm = math.sqrt(self.direction[0] ** 2 + self.direction[1] ** 2)
        if abs(norm - 1.0) > _EPS:
            raise ValueError(f"ray direction must be unit length, got |d| = {norm}")

    @classmethod
    def from_angle(cls, origin: tuple[float, float], angle: float) -> "Ray":
        return cls(origin, (math.cos(angle), math.sin(angle)))


@dataclass(frozen=True)
class Hit:
    """Result of a depth cast; edge_index is None for a miss at max range."""

    distance: float
    edge_index: int | None
    point: tuple[float, float]


def ray_segment_intersection(
    ray: Ray, a: tuple[float, float], b: tuple[float, float]
) -> float | None:
    """Distance along the ray to segment [a, b], or None if it misses."""
    length = math.sqrt((b[0] - a[0]) ** 2 + (b[1] - a[1]) ** 2)
    if length < _EPS:
        raise ValueError("degenerate segment")
    t = _kernels.active.ray_segment(
        ray.origin[0],
        ray.origin[1],
        ray.direction[0],
        ray.direction[1],
        a[0],
        a[1],
        b[0],
        b[1],
        _EPS / length,
    )
    return None if t < 0.0 else t


def cast_depth(world_map: WorldMap, ray: Ray, max_range: float = DEFAULT_MAX_RANGE) -> Hit:
    """Nearest wall hit along the ray, clipped to max_range."""
    if max_range <= 0.0:
        raise ValueError("max_range must be positive")
    dist, idx = _kernels.active.cast_ray(
        world_map.segments,
        world_map.edge_eps,
        ray.origin[0],
        ray.origin[1],
        ray.direction[0],
        ray.direction[1],
        max_range,
    )
    point = (ray.origin[0] + dist * ray.direction[0], ray.origin[1] + dist * ray.direction[1])
    return Hit(dist, idx if idx >= 0 else None, point)


@dataclass(frozen=True)
class DepthReadout:
    """Per-column depth/disparity across the field of view."""

    pose: Pose
    fov: float
    max_range: float
    distances: np.ndarray  # float64[K]
    edge_indices: np.ndarray  # int32[K], -1 for a miss
    disparities: np.ndarray  # float64[K]

    @property
    def columns(self) -> int:
        return len(self.distances)

    def column_bearing(self, j: int) -> float:
        """Bearing of column j relative to the view axis (positive = left)."""
        return self.fov * (0.5 - (j + 0.5) / self.columns)

    def hit(self, j: int) -> Hit:
        ang = self.pose.theta + self.column_bearing(j)
        d = float(self.distances[j])
        point = (self.pose.x + d * math.cos(ang), self.pose.y + d * math.sin(ang))
        idx = int(self.edge_indices[j])
        return Hit(d, idx if idx >= 0 else None, point)

    def __len__(self) -> int:
        return self.columns

    def __iter__(self) -> Iterator[Hit]:
        return (self.hit(j) for j in range(self.columns))


def depth_readout(
    world_map: WorldMap,
    pose: Pose,
    fov: float = DEFAULT_FOV,
    columns: int = DEFAULT_COLUMNS,
    max_range: float = DEFAULT_MAX_RANGE,
) -> DepthReadout:
    """Sweep the FOV with `columns` rays and convert distances to disparity."""
    if not (0.0 < fov < math.pi):
        raise ValueError("fov must be in (0, pi)")
    if columns < 1:
        raise ValueError("need at least one column")
    if max_range <= 0.0:
        raise ValueError("max_range must be positive")
    dists, idxs = _kernels.active.depth_sweep(
        world_map.segments,
        world_map.edge_eps,
        pose.x,
        pose.y,
        column_directions(pose.theta, fov, columns),
        max_range,
    )
    disparities = 1.0 / np.maximum(dists, DISPARITY_MIN_DISTANCE)
    return DepthReadout(pose, fov, max_range, dists, idxs, disparities)


def column_directions(theta: float, fov: float, columns: int) -> np.ndarray:
    """Unit ray directions for each screen column, left to right.

    Computed once here (math.cos/math.sin) so every kernel backend consumes
    identical doubles.
    """
    dirs = np.empty((columns, 2), dtype=np.float64)
    for j in range(columns):
        ang = theta + fov * (0.5 - (j + 0.5) / columns)
        dirs[j, 0] = math.cos(ang)
        dirs[j, 1] = math.sin(ang)
    return dirs


def line_of_sight(world_map: WorldMap, p: tuple[float, float], q: tuple[float, float]) -> bool:
    """True iff the open segment (p, q) crosses no wall edge."""
    if (p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2 < _EPS * _EPS:
        raise ValueError("line_of_sight endpoints coincide")
    return not _kernels.active.segment_blocked(
        world_map.segments, world_map.edge_eps, p[0], p[1], q[0], q[1]
    )


def is_visible(
    world_map: WorldMap,
    viewer: Pose,
    target: tuple[float, float],
    fov: float = DEFAULT_FOV,
    max_range: float = DEFAULT_MAX_RANGE,
) -> bool:
    """Range, FOV-cone and line-of-sight check from a viewer pose to a point."""
    dx = target[0] - viewer.x
    dy = target[1] - viewer.y
    dist = math.sqrt(dx * dx + dy * dy)
    if dist > max_range:
        return False
    if dist < _EPS:
        return True
    bearing = wrap_angle(math.atan2(dy, dx) - viewer.theta)
    if abs(bearing) > fov / 2.0:
        return False
    return line_of_sight(world_map, (viewer.x, viewer.y), target)


def circle_segment_distance(
    center: tuple[float, float],
    radius: float,
    a: tuple[float, float],
    b: tuple[float, float],
) -> float:
    """Signed clearance between a disc and a segment; negative = penetration."""
    if (b[0] - a[0]) ** 2 + (b[1] - a[1]) ** 2 < _EPS * _EPS:
        raise ValueError("degenerate segment")
    return (
        _kernels.active.point_segment_distance(center[0], center[1], a[0], a[1], b[0], b[1])
        - radius
    )


def clearance(world_map: WorldMap, x: float, y: float) -> float:
    """Distance from (x, y) to the nearest wall, inf on an empty map."""
    return _kernels.active.min_clearance(world_map.segments, x, y)
