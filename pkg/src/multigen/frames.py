"""RGB frame container, binary PPM export, and the shared player palette."""

from __future__ import annotations

import numpy as np

# One entry per player slot, cycled by join order. Sprites are drawn in these
# exact colors and the presence detector tests for exact equality, so no other
# renderer output (walls are gray, ceiling/floor below) may collide with them.
PLAYER_PALETTE: tuple[tuple[int, int, int], ...] = (
    (230, 40, 40),
    (40, 200, 70),
    (60, 120, 235),
    (225, 200, 40),
    (200, 60, 200),
    (40, 210, 210),
    (240, 130, 30),
    (130, 230, 130),
)

CEILING_COLOR = (25, 30, 40)
FLOOR_COLOR = (45, 40, 35)
MINIMAP_BG = (18, 18, 22)
MINIMAP_WALL = (210, 210, 210)


def palette_color(player_id: str) -> tuple[int, int, int]:
    """Deterministic color for a player id of the form p<N>."""
    if player_id.startswith("p") and player_id[1:].isdigit():
        slot = int(player_id[1:]) - 1
    else:
        slot = sum(player_id.encode())
    return PLAYER_PALETTE[slot % len(PLAYER_PALETTE)]


class Frame:
    """A width x height RGB image with 8-bit channels, row-major."""

    def __init__(self, width: int, height: int, pixels: np.ndarray | None = None):
        if width <= 0 or height <= 0:
            raise ValueError("frame dimensions must be positive")
        if pixels is None:
            pixels = np.zeros((height, width, 3), dtype=np.uint8)
        elif pixels.shape != (height, width, 3):
            raise ValueError(f"pixel buffer shape {pixels.shape} != {(height, width, 3)}")
        self.width = width
        self.height = height
        self.pixels = pixels

    def tobytes(self) -> bytes:
        return self.pixels.tobytes()

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Frame)
            and self.width == other.width
            and self.height == other.height
            and np.array_equal(self.pixels, other.pixels)
        )

    def to_ppm(self) -> bytes:
        """Binary PPM (P6), the golden-file format."""
        header = f"P6\n{self.width} {self.height}\n255\n".encode("ascii")
        return header + self.tobytes()

    @classmethod
    def from_ppm(cls, data: bytes) -> "Frame":
        if not data.startswith(b"P6"):
            raise ValueError("not a P6 PPM")
        parts = data.split(b"\n", 3)
        if len(parts) < 4 or parts[2] != b"255":
            raise ValueError("unsupported PPM header")
        width, height = (int(tok) for tok in parts[1].split())
        raw = parts[3]
        if len(raw) != width * height * 3:
            raise ValueError("PPM payload length mismatch")
        pixels = np.frombuffer(raw, dtype=np.uint8).reshape(height, width, 3).copy()
        return cls(width, height, pixels)


def save_ppm(frame: Frame, path) -> None:
    with open(path, "wb") as fh:
        fh.write(frame.to_ppm())


def load_ppm(path) -> Frame:
    with open(path, "rb") as fh:
        return Frame.from_ppm(fh.read())
