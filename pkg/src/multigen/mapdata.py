"""Static vector level geometry and its editable text file format.

A map is a set of 2D vertices plus undirected wall segments indexing into
them (zero-based), together with spawn points. Maps are immutable for the
lifetime of a session.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _kernels

MAP_FORMAT_VERSION = "multigen-map/1"

# Default player disc radius; spawn clearance is validated against it.
PLAYER_RADIUS = 0.4

MIN_EDGE_LENGTH = 1e-9


class MapFormatError(ValueError):
    """Malformed map document (parse or schema failure)."""


class MapValidationError(ValueError):
    """A structurally well-formed map that violates invariants."""

    def __init__(self, violations: list[str]):
        super().__init__("invalid map: " + "; ".join(violations))
        self.violations = violations


def _canon(value: float) -> float:
    """Quantize a coordinate to its 9-significant-digit document form."""
    return float(format(float(value), ".9g"))


@dataclass(frozen=True)
class WorldMap:
    name: str
    vertices: tuple[tuple[float, float], ...]
    edges: tuple[tuple[int, int], ...]
    spawn_points: tuple[tuple[tuple[float, float], float], ...]

    def __post_init__(self):
        # Coordinates are canonicalized at construction so that an in-memory
        # map and its serialized document are always the same geometry; live
        # sessions and their replays must agree bit-for-bit.
        object.__setattr__(
            self, "vertices", tuple((_canon(x), _canon(y)) for x, y in self.vertices)
        )
        object.__setattr__(self, "edges", tuple((int(u), int(w)) for u, w in self.edges))
        object.__setattr__(
            self,
            "spawn_points",
            tuple(((_canon(x), _canon(y)), _canon(yaw)) for (x, y), yaw in self.spawn_points),
        )

    @cached_property
    def bounds(self) -> tuple[float, float, float, float]:
        """(min_x, min_y, max_x, max_y) over all vertices."""
        if not self.vertices:
            return (0.0, 0.0, 0.0, 0.0)
        xs = [v[0] for v in self.vertices]
        ys = [v[1] for v in self.vertices]
        return (min(xs), min(ys), max(xs), max(ys))

    @cached_property
    def segments(self) -> np.ndarray:
        """(E, 4) float64 array of ax, ay, bx, by — the kernel input."""
        segs = np.empty((len(self.edges), 4), dtype=np.float64)
        for i, (u, w) in enumerate(self.edges):
            segs[i, 0], segs[i, 1] = self.vertices[u]
            segs[i, 2], segs[i, 3] = self.vertices[w]
        return segs

    @cached_property
    def edge_eps(self) -> np.ndarray:
        """Per-edge endpoint tolerance on the segment parameter (1e-9 / length)."""
        segs = self.segments
        lengths = np.sqrt((segs[:, 2] - segs[:, 0]) ** 2 + (segs[:, 3] - segs[:, 1]) ** 2)
        with np.errstate(divide="ignore"):
            return np.where(lengths > 0.0, 1e-9 / lengths, np.inf)


def structural_violations(world_map: WorldMap, collision_radius: float = PLAYER_RADIUS) -> list[str]:
    """Check the per-map invariants that need no reachability analysis."""
    violations: list[str] = []
    n_v = len(world_map.vertices)
    seen: set[tuple[int, int]] = set()
    for i, (u, w) in enumerate(world_map.edges):
        if not (0 <= u < n_v) or not (0 <= w < n_v):
            violations.append(f"edge {i} index out of range: ({u}, {w}) with {n_v} vertices")
            continue
        ax, ay = world_map.vertices[u]
        bx, by = world_map.vertices[w]
        if (bx - ax) ** 2 + (by - ay) ** 2 < MIN_EDGE_LENGTH**2:
            violations.append(f"degenerate edge {i}: endpoints closer than {MIN_EDGE_LENGTH}")
        key = (u, w) if u <= w else (w, u)
        if key in seen:
            violations.append(f"duplicate edge {i}: ({u}, {w})")
        seen.add(key)
    if not world_map.spawn_points:
        violations.append("no spawn points")
    if not violations:
        segs = world_map.segments
        for i, ((sx, sy), _) in enumerate(world_map.spawn_points):
            clearance = _kernels.active.min_clearance(segs, sx, sy)
            if clearance < collision_radius:
                violations.append(
                    f"spawn {i} clearance {clearance:.6f} below collision radius {collision_radius}"
                )
    return violations


def map_to_text(world_map: WorldMap) -> str:
    """Canonical editable document: fixed field order, <= 9 significant digits."""

    def num(v: float) -> str:
        return format(float(v), ".9g")

    lines = ["{"]
    lines.append(f'  "version": "{MAP_FORMAT_VERSION}",')
    lines.append(f'  "name": {json.dumps(world_map.name)},')
    lines.append('  "vertices": [')
    for i, (x, y) in enumerate(world_map.vertices):
        comma = "," if i < len(world_map.vertices) - 1 else ""
        lines.append(f"    [{num(x)}, {num(y)}]{comma}")
    lines.append("  ],")
    lines.append('  "edges": [')
    for i, (u, w) in enumerate(world_map.edges):
        comma = "," if i < len(world_map.edges) - 1 else ""
        lines.append(f"    [{u}, {w}]{comma}")
    lines.append("  ],")
    lines.append('  "spawns": [')
    for i, ((x, y), theta) in enumerate(world_map.spawn_points):
        comma = "," if i < len(world_map.spawn_points) - 1 else ""
        lines.append(f'    {{"x": {num(x)}, "y": {num(y)}, "theta": {num(theta)}}}{comma}')
    lines.append("  ]")
    lines.append("}")
    return "\n".join(lines) + "\n"


_SCHEMA_KEYS = {"version", "name", "vertices", "edges", "spawns"}
_SPAWN_KEYS = {"x", "y", "theta"}


def map_from_document(doc: dict) -> WorldMap:
    """Build a WorldMap from a parsed document, enforcing the strict schema."""
    if not isinstance(doc, dict):
        raise MapFormatError("map document must be an object")
    unknown = set(doc) - _SCHEMA_KEYS
    if unknown:
        raise MapFormatError(f"unknown map fields: {sorted(unknown)}")
    missing = _SCHEMA_KEYS - set(doc)
    if missing:
        raise MapFormatError(f"missing map fields: {sorted(missing)}")
    if doc["version"] != MAP_FORMAT_VERSION:
        raise MapFormatError(f'unsupported map version {doc["version"]!r}')
    if not isinstance(doc["name"], str):
        raise MapFormatError("field 'name' must be a string")

    vertices = []
    for i, v in enumerate(doc["vertices"]):
        if not (isinstance(v, list) and len(v) == 2):
            raise MapFormatError(f"vertex {i} must be [x, y]")
        vertices.append((float(v[0]), float(v[1])))
    edges = []
    for i, e in enumerate(doc["edges"]):
        if not (isinstance(e, list) and len(e) == 2 and all(isinstance(k, int) for k in e)):
            raise MapFormatError(f"edge {i} must be [u, w] with integer indices")
        edges.append((e[0], e[1]))
    spawns = []
    for i, s in enumerate(doc["spawns"]):
        if not isinstance(s, dict) or set(s) != _SPAWN_KEYS:
            raise MapFormatError(f"spawn {i} must be an object with keys x, y, theta")
        spawns.append(((float(s["x"]), float(s["y"])), float(s["theta"])))

    world_map = WorldMap(
        name=doc["name"],
        vertices=tuple(vertices),
        edges=tuple(edges),
        spawn_points=tuple(spawns),
    )
    violations = structural_violations(world_map)
    if violations:
        raise MapValidationError(violations)
    return world_map


def map_to_document(world_map: WorldMap) -> dict:
    """Parsed-document form of a map, equal to json.loads(map_to_text(m))."""
    return json.loads(map_to_text(world_map))


def loads_map(text: str) -> WorldMap:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MapFormatError(f"map parse error at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return map_from_document(doc)


def load_map(path) -> WorldMap:
    with open(path, "r", encoding="utf-8") as fh:
        return loads_map(fh.read())


def save_map(world_map: WorldMap, path) -> None:
    violations = structural_violations(world_map)
    if violations:
        raise MapValidationError(violations)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(map_to_text(world_map))
