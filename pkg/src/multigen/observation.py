"""Per-viewpoint observation: readout extraction and the raycast renderer.

The backend interface carries (context, readout, sprites, action) so a
learned frame generator can drop in later; the reference raycast backend
deliberately ignores context and action and renders purely from the shared
state readout, which makes it an exact oracle for multiplayer-consistency
checks.

Rasterization uses floor(x + 0.5) for every float-to-pixel conversion; the
browser client mirrors the same arithmetic so both produce identical frames.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .dynamics import Action
from .frames import CEILING_COLOR, FLOOR_COLOR, Frame, palette_color
from .geometry import (
    DEFAULT_COLUMNS,
    DEFAULT_FOV,
    DEFAULT_MAX_RANGE,
    DISPARITY_MIN_DISTANCE,
    DepthReadout,
    Pose,
    depth_readout,
    is_visible,
    wrap_angle,
)
from .world import WorldError, WorldState, active_players

WALL_WORLD_HEIGHT = 1.0
SPRITE_WORLD_HEIGHT = 0.7
WALL_BASE_GRAY = 210
WALL_SHADE_FLOOR = 0.25
DEFAULT_FRAME_WIDTH = 320
DEFAULT_FRAME_HEIGHT = 200


@dataclass(frozen=True)
class ViewConfig:
    fov: float = DEFAULT_FOV
    columns: int = DEFAULT_COLUMNS
    max_range: float = DEFAULT_MAX_RANGE
    width: int = DEFAULT_FRAME_WIDTH
    height: int = DEFAULT_FRAME_HEIGHT

    @property
    def focal(self) -> float:
        """Focal length in pixels, derived from fov and frame width."""
        return (self.width / 2.0) / math.tan(self.fov / 2.0)

    def to_wire(self) -> dict:
        return {
            "fov": self.fov,
            "columns": self.columns,
            "max_range": self.max_range,
            "width": self.width,
            "height": self.height,
        }

    @classmethod
    def from_wire(cls, doc: dict) -> "ViewConfig":
        return cls(
            fov=float(doc["fov"]),
            columns=int(doc["columns"]),
            max_range=float(doc["max_range"]),
            width=int(doc["width"]),
            height=int(doc["height"]),
        )


@dataclass(frozen=True)
class SpriteProjection:
    """A visible player projected onto the screen.

    center_clear records that the emitter verified line of sight to the
    target center; the renderer then draws the center column regardless of
    the quantized z-buffer, so geometric visibility and rendered presence
    agree exactly. Hand-built projections default to False and get the plain
    per-column z-test.
    """

    player_id: str
    screen_column: float
    distance: float
    scale: float
    center_clear: bool = False

    def to_wire(self) -> dict:
        return {
            "player_id": self.player_id,
            "screen_column": self.screen_column,
            "distance": self.distance,
            "scale": self.scale,
        }


def viewpoint_readout(
    state: WorldState, viewer: str, view: ViewConfig = ViewConfig()
) -> tuple[DepthReadout, list[SpriteProjection]]:
    """Depth sweep plus sprite projections for every visible other player."""
    p = state.players.get(viewer)
    if p is None:
        raise WorldError(f"unknown viewer {viewer!r}")
    if not p.active:
        raise WorldError(f"viewer {viewer!r} is dead")
    readout = depth_readout(
        state.map, p.pose, fov=view.fov, columns=view.columns, max_range=view.max_range
    )
    sprites: list[SpriteProjection] = []
    for other in active_players(state):
        if other.id == viewer:
            continue
        target = (other.pose.x, other.pose.y)
        if not is_visible(state.map, p.pose, target, fov=view.fov, max_range=view.max_range):
            continue
        dx = target[0] - p.pose.x
        dy = target[1] - p.pose.y
        distance = math.sqrt(dx * dx + dy * dy)
        bearing = 0.0 if distance < 1e-9 else wrap_angle(math.atan2(dy, dx) - p.pose.theta)
        column = view.columns * (0.5 - bearing / view.fov)
        column = min(max(column, 0.0), view.columns - 1e-6)
        perp = distance * math.cos(bearing)
        scale = SPRITE_WORLD_HEIGHT * view.focal / max(perp, DISPARITY_MIN_DISTANCE)
        sprites.append(
            SpriteProjection(
                player_id=other.id,
                screen_column=column,
                distance=distance,
                scale=scale,
                center_clear=True,
            )
        )
    return readout, sprites


def fisheye_correct(disparity: np.ndarray, fov: float, columns: int) -> np.ndarray:
    """Per-column perpendicular disparity (removes the fisheye bulge).

    Works in the distance domain: perp_distance = distance * cos(bearing),
    so perp_disparity = disparity / cos(bearing). The center column is
    unchanged and a single column is the identity.
    """
    if len(disparity) != columns:
        raise ValueError("disparity length does not match column count")
    j = np.arange(columns)
    bearings = fov * (0.5 - (j + 0.5) / columns)
    return np.asarray(disparity) / np.cos(bearings)


def _px(value: float) -> int:
    """Half-up float-to-pixel rounding, identical to the client's."""
    return int(math.floor(value + 0.5))


def render_frame(
    readout: DepthReadout,
    sprites: list[SpriteProjection],
    width: int,
    height: int,
    view: ViewConfig | None = None,
) -> Frame:
    """Deterministic column renderer: equal inputs give byte-identical frames.

    When the readout column count differs from the frame width, columns are
    resampled nearest-neighbor and sprite coordinates scaled by width / K.
    """
    if width <= 0 or height <= 0:
        raise ValueError("frame dimensions must be positive")
    if view is None:
        view = ViewConfig(fov=readout.fov, columns=readout.columns, max_range=readout.max_range, width=width)
    k = readout.columns
    focal = (width / 2.0) / math.tan(readout.fov / 2.0)

    j = np.arange(k)
    bearings = readout.fov * (0.5 - (j + 0.5) / k)
    perp = np.asarray(readout.distances) * np.cos(bearings)
    miss = np.asarray(readout.edge_indices) < 0

    if k != width:
        src = np.minimum((np.arange(width) * k) // width, k - 1)
        perp = perp[src]
        miss = miss[src]
    col_scale = width / k

    perp_clamped = np.maximum(perp, DISPARITY_MIN_DISTANCE)
    slice_h = np.floor(focal * WALL_WORLD_HEIGHT / perp_clamped + 0.5).astype(np.int64)
    slice_h = np.minimum(slice_h, 4 * height)
    top = (height - slice_h) // 2
    bottom = top + slice_h
    top = np.clip(top, 0, height)
    bottom = np.clip(bottom, 0, height)

    shade = np.maximum(WALL_SHADE_FLOOR, 1.0 - perp / readout.max_range)
    gray = np.floor(WALL_BASE_GRAY * shade + 0.5).astype(np.uint8)

    pixels = np.empty((height, width, 3), dtype=np.uint8)
    half = height // 2
    pixels[:half, :] = CEILING_COLOR
    pixels[half:, :] = FLOOR_COLOR
    rows = np.arange(height)[:, None]
    wall_mask = (rows >= top[None, :]) & (rows < bottom[None, :]) & ~miss[None, :]
    wall_rgb = np.stack([gray, gray, gray], axis=1)
    ys, xs = np.nonzero(wall_mask)
    pixels[ys, xs] = wall_rgb[xs]

    for sprite in sorted(sprites, key=lambda s: (-s.distance, len(s.player_id), s.player_id)):
        color = palette_color(sprite.player_id)
        bearing = readout.fov * (0.5 - sprite.screen_column / k)
        sprite_perp = sprite.distance * math.cos(bearing)
        center = min(max(_px(sprite.screen_column * col_scale), 0), width - 1)
        h_px = min(max(_px(sprite.scale * col_scale), 1), 4 * height)
        w_px = min(max(_px(sprite.scale * col_scale * 0.5), 1), width)
        s_top = max((height - h_px) // 2, 0)
        s_bottom = min(s_top + h_px, height)
        left = center - w_px // 2
        for col in range(max(left, 0), min(left + w_px, width)):
            if sprite_perp < perp[col] + 1e-9 or (col == center and sprite.center_clear):
                pixels[s_top:s_bottom, col] = color

    return Frame(width, height, pixels)


class ObservationContext:
    """Ring of the most recent frames for one viewpoint, oldest first."""

    def __init__(self, capacity: int, width: int, height: int):
        if capacity < 1:
            raise ValueError("context capacity must be at least 1")
        self.capacity = capacity
        self.width = width
        self.height = height
        self.frames: deque[Frame] = deque(maxlen=capacity)

    def __len__(self) -> int:
        return len(self.frames)


def push_context(ctx: ObservationContext, frame: Frame) -> ObservationContext:
    """Append a frame, evicting the oldest when the ring is full."""
    if frame.width != ctx.width or frame.height != ctx.height:
        raise ValueError(
            f"frame {frame.width}x{frame.height} does not match context "
            f"{ctx.width}x{ctx.height}"
        )
    ctx.frames.append(frame)
    return ctx


class RaycastBackend:
    """Reference observation backend: deterministic pure function of the
    readout and sprites; accepts but ignores context frames and action."""

    name = "reference"

    def render(
        self,
        context: ObservationContext | None,
        readout: DepthReadout,
        sprites: list[SpriteProjection],
        action: Action | None,
        width: int,
        height: int,
    ) -> Frame:
        return render_frame(readout, sprites, width, height)


def message_readout(
    disparity: list[float], view: ViewConfig, pose_theta: float = 0.0
) -> DepthReadout:
    """Rebuild a renderable readout from wire-format disparity columns.

    The wire carries disparity at 6 fractional digits; a column whose
    disparity is at (or below) 1 / max_range is treated as a miss. The web
    client applies the identical reconstruction, so frames rendered from the
    same message match byte-for-byte.
    """
    disp = np.asarray(disparity, dtype=np.float64)
    if len(disp) != view.columns:
        raise ValueError("disparity length does not match view columns")
    miss_level = math.floor(1.0 / view.max_range * 1e6 + 0.5) / 1e6
    miss = disp <= miss_level + 1e-12
    distances = np.where(miss, view.max_range, 1.0 / np.maximum(disp, 1e-12))
    return DepthReadout(
        pose=Pose(0.0, 0.0, pose_theta),
        fov=view.fov,
        max_range=view.max_range,
        distances=distances,
        edge_indices=np.where(miss, -1, 0).astype(np.int32),
        disparities=disp,
    )


def sprites_from_wire(docs: list[dict]) -> list[SpriteProjection]:
    """Sprites parsed from a tick message; the server only emits sprites with
    verified line of sight, so center_clear is implied on the wire."""
    return [
        SpriteProjection(
            player_id=d["player_id"],
            screen_column=float(d["screen_column"]),
            distance=float(d["distance"]),
            scale=float(d["scale"]),
            center_clear=True,
        )
        for d in docs
    ]
