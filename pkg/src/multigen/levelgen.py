"""Level pipeline: procedural rooms-and-corridors maps, validation, minimaps.

The generator carves rooms and L-shaped corridors into a coarse boolean grid
(0.5 world units per cell) and emits the walkable/blocked boundary as merged
wall segments, so doorway gaps, non-crossing edges and closed outlines come
out by construction. Everything is seed-deterministic via splitmix64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .frames import MINIMAP_BG, MINIMAP_WALL, Frame, palette_color
from .geometry import Pose, wrap_angle
from .mapdata import PLAYER_RADIUS, WorldMap, structural_violations
from .rng import Rng

CELL = 0.5

# Connectivity is validated on this fine occupancy grid; results are only
# reproducible at this documented resolution.
CONNECTIVITY_STEP = 0.1

_SPAWN_YAWS = (0.0, math.pi / 2, math.pi, -math.pi / 2)


class LevelGenError(RuntimeError):
    """Level generation could not satisfy the spec within the retry budget."""


@dataclass(frozen=True)
class LevelSpec:
    seed: int
    room_count: int = 8
    room_size_range: tuple[float, float] = (4.0, 9.0)
    corridor_width: float = 1.5
    grid_extent: float = 48.0

    def __post_init__(self):
        lo, hi = self.room_size_range
        if lo > hi:
            raise ValueError("room_size_range min must be <= max")
        if lo < 2 * CELL:
            raise ValueError(f"rooms must be at least {2 * CELL} world units")
        if self.corridor_width < 2 * PLAYER_RADIUS + 0.1:
            raise ValueError("corridor_width too narrow for the player disc")
        if self.room_count < 1:
            raise ValueError("room_count must be at least 1")
        if self.grid_extent < hi + 8 * CELL:
            raise ValueError("grid_extent too small for the largest room")


def _carve_rect(walk: np.ndarray, i0: int, j0: int, wi: int, wj: int) -> None:
    n = walk.shape[0]
    i0 = max(2, i0)
    j0 = max(2, j0)
    i1 = min(n - 2, i0 + wi)
    j1 = min(n - 2, j0 + wj)
    walk[i0:i1, j0:j1] = True


def _fill_diagonal_pinches(walk: np.ndarray) -> None:
    """Open one cell of every checkerboard 2x2 block.

    Diagonal-only contact would make the extracted boundary runs cross at an
    interior point; filling keeps every edge crossing at shared endpoints.
    """
    while True:
        a = walk[:-1, :-1]
        b = walk[1:, 1:]
        c = walk[1:, :-1]
        d = walk[:-1, 1:]
        pattern1 = a & b & ~c & ~d
        pattern2 = c & d & ~a & ~b
        if not (pattern1.any() or pattern2.any()):
            return
        i, j = np.nonzero(pattern1)
        walk[i + 1, j] = True
        i, j = np.nonzero(pattern2)
        walk[i, j] = True


def _boundary_segments(walk: np.ndarray, origin: float) -> list[tuple[float, float, float, float]]:
    """Merged wall runs along the walkable/blocked boundary of the cell grid."""
    n = walk.shape[0]
    padded = np.zeros((n + 2, n + 2), dtype=bool)
    padded[1:-1, 1:-1] = walk
    segments: list[tuple[float, float, float, float]] = []

    # Horizontal runs on lines y = j * CELL: boundary where the cells below
    # and above the line differ.
    hdiff = padded[1:-1, :-1] != padded[1:-1, 1:]  # (n, n+1): x-cell i, line j
    for j in range(n + 1):
        i = 0
        while i < n:
            if hdiff[i, j]:
                start = i
                while i < n and hdiff[i, j]:
                    i += 1
                segments.append(
                    (start * CELL + origin, j * CELL + origin, i * CELL + origin, j * CELL + origin)
                )
            else:
                i += 1
    vdiff = padded[:-1, 1:-1] != padded[1:, 1:-1]  # (n+1, n): line i, y-cell j
    for i in range(n + 1):
        j = 0
        while j < n:
            if vdiff[i, j]:
                start = j
                while j < n and vdiff[i, j]:
                    j += 1
                segments.append(
                    (i * CELL + origin, start * CELL + origin, i * CELL + origin, j * CELL + origin)
                )
            else:
                j += 1
    return segments


def generate_map(spec: LevelSpec) -> WorldMap:
    """Deterministic rooms-and-corridors map; output passes validate_map."""
    rng = Rng(spec.seed)
    n = int(round(spec.grid_extent / CELL))
    origin = -spec.grid_extent / 2
    walk = np.zeros((n, n), dtype=bool)

    lo_cells = max(2, int(math.ceil(spec.room_size_range[0] / CELL)))
    hi_cells = max(lo_cells, int(spec.room_size_range[1] / CELL))

    rooms: list[tuple[int, int, int, int]] = []
    attempts = 0
    budget = 60 * spec.room_count
    while len(rooms) < spec.room_count and attempts < budget:
        attempts += 1
        wi = rng.randint(lo_cells, hi_cells)
        wj = rng.randint(lo_cells, hi_cells)
        if n - wi - 2 < 2 or n - wj - 2 < 2:
            continue
        i0 = rng.randint(2, n - wi - 2)
        j0 = rng.randint(2, n - wj - 2)
        # 2-cell gap so separate rooms never share a wall line.
        clash = any(
            i0 < ri + rw + 2 and ri < i0 + wi + 2 and j0 < rj + rh + 2 and rj < j0 + wj + 2
            for ri, rj, rw, rh in rooms
        )
        if clash:
            continue
        rooms.append((i0, j0, wi, wj))
        _carve_rect(walk, i0, j0, wi, wj)
    if len(rooms) < spec.room_count:
        raise LevelGenError(
            f"spec infeasible: placed {len(rooms)}/{spec.room_count} rooms in {attempts} attempts"
        )

    centers = [(ri + rw // 2, rj + rh // 2) for ri, rj, rw, rh in rooms]
    corridor_cells = max(1, int(round(spec.corridor_width / CELL)))
    half = corridor_cells // 2
    for k in range(1, len(rooms)):
        ci, cj = centers[k]
        nearest = min(
            range(k), key=lambda m: (centers[m][0] - ci) ** 2 + (centers[m][1] - cj) ** 2
        )
        di, dj = centers[nearest]
        i_lo, i_hi = sorted((ci, di))
        _carve_rect(walk, i_lo - half, cj - half, i_hi - i_lo + corridor_cells, corridor_cells)
        j_lo, j_hi = sorted((cj, dj))
        _carve_rect(walk, di - half, j_lo - half, corridor_cells, j_hi - j_lo + corridor_cells)

    _fill_diagonal_pinches(walk)

    vertices: list[tuple[float, float]] = []
    vertex_index: dict[tuple[float, float], int] = {}
    edges: list[tuple[int, int]] = []

    def vid(point: tuple[float, float]) -> int:
        if point not in vertex_index:
            vertex_index[point] = len(vertices)
            vertices.append(point)
        return vertex_index[point]

    for ax, ay, bx, by in _boundary_segments(walk, origin):
        edges.append((vid((ax, ay)), vid((bx, by))))

    spawns = []
    for (ri, rj, rw, rh) in rooms:
        sx = (ri + rw / 2) * CELL + origin
        sy = (rj + rh / 2) * CELL + origin
        spawns.append(((sx, sy), wrap_angle(rng.choice(_SPAWN_YAWS))))

    return WorldMap(
        name=f"gen-{spec.seed}",
        vertices=tuple(vertices),
        edges=tuple(edges),
        spawn_points=tuple(spawns),
    )


def occupancy_grid(
    world_map: WorldMap,
    collision_radius: float = PLAYER_RADIUS,
    step: float = CONNECTIVITY_STEP,
) -> tuple[np.ndarray, float, float]:
    """Boolean grid of positions where the player disc fits; plus grid origin."""
    min_x, min_y, max_x, max_y = world_map.bounds
    margin = collision_radius + 2 * step
    x0 = min_x - margin
    y0 = min_y - margin
    nx = int(math.ceil((max_x + margin - x0) / step))
    ny = int(math.ceil((max_y + margin - y0) / step))
    open_cells = np.ones((nx, ny), dtype=bool)
    cx = x0 + (np.arange(nx) + 0.5) * step
    cy = y0 + (np.arange(ny) + 0.5) * step
    r2 = collision_radius * collision_radius
    reach = collision_radius + step
    for ax, ay, bx, by in world_map.segments:
        i0 = max(0, int((min(ax, bx) - reach - x0) / step))
        i1 = min(nx, int((max(ax, bx) + reach - x0) / step) + 1)
        j0 = max(0, int((min(ay, by) - reach - y0) / step))
        j1 = min(ny, int((max(ay, by) + reach - y0) / step) + 1)
        if i0 >= i1 or j0 >= j1:
            continue
        x = cx[i0:i1][:, None]
        y = cy[j0:j1][None, :]
        ex = bx - ax
        ey = by - ay
        t = np.clip(((x - ax) * ex + (y - ay) * ey) / (ex * ex + ey * ey), 0.0, 1.0)
        d2 = (x - (ax + t * ex)) ** 2 + (y - (ay + t * ey)) ** 2
        open_cells[i0:i1, j0:j1] &= d2 >= r2
    return open_cells, x0, y0


def _spawn_cell(
    open_cells: np.ndarray, x0: float, y0: float, sx: float, sy: float, step: float
) -> tuple[int, int] | None:
    ci = int((sx - x0) / step)
    cj = int((sy - y0) / step)
    nx, ny = open_cells.shape
    best = None
    for di in range(-2, 3):
        for dj in range(-2, 3):
            i, j = ci + di, cj + dj
            if 0 <= i < nx and 0 <= j < ny and open_cells[i, j]:
                d = di * di + dj * dj
                if best is None or d < best[0]:
                    best = (d, i, j)
    return None if best is None else (best[1], best[2])


def validate_map(world_map: WorldMap, collision_radius: float = PLAYER_RADIUS) -> list[str]:
    """Full validation report: structure plus spawn connectivity. Empty = valid."""
    report = structural_violations(world_map, collision_radius)
    if report:
        return report
    open_cells, x0, y0 = occupancy_grid(world_map, collision_radius)
    labels, _ = ndimage.label(open_cells, structure=np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]]))
    spawn_labels = []
    for idx, ((sx, sy), _) in enumerate(world_map.spawn_points):
        cell = _spawn_cell(open_cells, x0, y0, sx, sy, CONNECTIVITY_STEP)
        if cell is None:
            report.append(f"spawn {idx} has no walkable cell at grid resolution")
            continue
        spawn_labels.append((idx, labels[cell]))
    if not report:
        base = spawn_labels[0][1]
        for idx, lab in spawn_labels[1:]:
            if lab != base:
                report.append(f"spawn {idx} not reachable from spawn 0")
    return report


@dataclass(frozen=True)
class MinimapImage:
    frame: Frame
    scale: float
    origin: tuple[float, float]  # world coords of pixel (0, top)

    def to_pixel(self, x: float, y: float) -> tuple[int, int]:
        return (
            int(math.floor((x - self.origin[0]) * self.scale)),
            int(math.floor((self.origin[1] - y) * self.scale)),
        )


_ARROW_TEMPLATE = ((0, 0), (1, 0), (2, 0), (1, 1), (1, -1))


def rasterize_minimap(
    world_map: WorldMap,
    poses: tuple[tuple[str, Pose], ...] = (),
    scale: float = 8.0,
) -> MinimapImage:
    """Top-down orthographic map image: walls, background, pose arrows."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    min_x, min_y, max_x, max_y = world_map.bounds
    margin = 1.0
    width = max(1, int(math.ceil((max_x - min_x + 2 * margin) * scale)))
    height = max(1, int(math.ceil((max_y - min_y + 2 * margin) * scale)))
    pixels = np.empty((height, width, 3), dtype=np.uint8)
    pixels[:, :] = MINIMAP_BG
    image = MinimapImage(Frame(width, height, pixels), scale, (min_x - margin, max_y + margin))

    for ax, ay, bx, by in world_map.segments:
        length = math.hypot(bx - ax, by - ay)
        steps = max(1, int(math.ceil(length * scale * 4)))
        for s in range(steps):
            t = s / steps
            px, py = image.to_pixel(ax + t * (bx - ax), ay + t * (by - ay))
            if 0 <= px < width and 0 <= py < height:
                pixels[py, px] = MINIMAP_WALL

    for player_id, pose in poses:
        color = palette_color(player_id)
        cpx, cpy = image.to_pixel(pose.x, pose.y)
        cos_t = math.cos(pose.theta)
        sin_t = math.sin(pose.theta)
        for u, v in _ARROW_TEMPLATE:
            wx = u * cos_t - v * sin_t
            wy = u * sin_t + v * cos_t
            px = cpx + int(math.floor(wx + 0.5))
            py = cpy + int(math.floor(-wy + 0.5))
            if 0 <= px < width and 0 <= py < height:
                pixels[py, px] = color
    return image
