"""Per-tick world dynamics: pose updates, collision, hitscan attacks.

The transition is a pure function of (state, actions, config); the server
serializes calls per world. Within a tick: respawns first, then movement in
ascending player order (turn applied before translation), then attacks in
ascending player order with kills taking effect immediately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .geometry import (
    DEFAULT_FOV,
    Pose,
    clearance,
    is_visible,
    wrap_angle,
)
from .mapdata import PLAYER_RADIUS, WorldMap
from .world import (
    WorldError,
    WorldState,
    active_players,
    kill_player,
    player_order,
    process_respawns,
)

CLEARANCE_SLACK = 1e-6

__all__ = [
    "Action",
    "MotionConfig",
    "PoseDelta",
    "NOOP_ACTION",
    "Moved",
    "Killed",
    "Respawned",
    "wrap_angle",
    "propose_delta",
    "resolve_collision",
    "resolve_attack",
    "advance_world",
    "fold_kill_counts",
]

_TRI = (-1, 0, 1)


@dataclass(frozen=True)
class Action:
    """Discrete per-tick control input.

    move: -1 back / +1 forward; strafe: -1 left / +1 right;
    turn: +1 increases theta (counter-clockwise); attack fires hitscan.
    """

    move: int = 0
    strafe: int = 0
    turn: int = 0
    attack: bool = False

    def __post_init__(self):
        if self.move not in _TRI or self.strafe not in _TRI or self.turn not in _TRI:
            raise ValueError(f"action components must be -1, 0 or +1: {self}")

    def to_wire(self) -> dict:
        return {"move": self.move, "strafe": self.strafe, "turn": self.turn, "attack": self.attack}

    @classmethod
    def from_wire(cls, doc: dict) -> "Action":
        return cls(
            move=int(doc.get("move", 0)),
            strafe=int(doc.get("strafe", 0)),
            turn=int(doc.get("turn", 0)),
            attack=bool(doc.get("attack", False)),
        )

    def to_list(self) -> list:
        return [self.move, self.strafe, self.turn, 1 if self.attack else 0]

    @classmethod
    def from_list(cls, items) -> "Action":
        return cls(int(items[0]), int(items[1]), int(items[2]), bool(items[3]))


NOOP_ACTION = Action()


@dataclass(frozen=True)
class MotionConfig:
    move_speed: float = 0.35
    strafe_speed: float = 0.3
    turn_rate: float = math.pi / 36
    collision_radius: float = PLAYER_RADIUS
    attack_range: float = 20.0
    attack_half_angle: float = math.pi / 60
    respawn_delay: int = 60

    def __post_init__(self):
        for name in (
            "move_speed",
            "strafe_speed",
            "turn_rate",
            "collision_radius",
            "attack_range",
            "attack_half_angle",
            "respawn_delay",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"MotionConfig.{name} must be strictly positive")
        if self.attack_half_angle >= DEFAULT_FOV / 2:
            raise ValueError("attack_half_angle must be narrower than half the FOV")

    def to_wire(self) -> dict:
        return {
            "move_speed": self.move_speed,
            "strafe_speed": self.strafe_speed,
            "turn_rate": self.turn_rate,
            "collision_radius": self.collision_radius,
            "attack_range": self.attack_range,
            "attack_half_angle": self.attack_half_angle,
            "respawn_delay": self.respawn_delay,
        }

    @classmethod
    def from_wire(cls, doc: dict) -> "MotionConfig":
        return cls(
            move_speed=float(doc["move_speed"]),
            strafe_speed=float(doc["strafe_speed"]),
            turn_rate=float(doc["turn_rate"]),
            collision_radius=float(doc["collision_radius"]),
            attack_range=float(doc["attack_range"]),
            attack_half_angle=float(doc["attack_half_angle"]),
            respawn_delay=int(doc["respawn_delay"]),
        )


@dataclass(frozen=True)
class PoseDelta:
    dx: float
    dy: float
    dtheta: float

    def __post_init__(self):
        if not (math.isfinite(self.dx) and math.isfinite(self.dy) and math.isfinite(self.dtheta)):
            raise ValueError(f"non-finite pose delta {self}")


@dataclass(frozen=True)
class Moved:
    player: str
    x: float
    y: float
    theta: float

    def to_wire(self) -> dict:
        return {"event": "moved", "player": self.player, "x": self.x, "y": self.y, "theta": self.theta}


@dataclass(frozen=True)
class Killed:
    victim: str
    killer: str

    def to_wire(self) -> dict:
        return {"event": "killed", "victim": self.victim, "killer": self.killer}


@dataclass(frozen=True)
class Respawned:
    player: str
    x: float
    y: float
    theta: float

    def to_wire(self) -> dict:
        return {"event": "respawned", "player": self.player, "x": self.x, "y": self.y, "theta": self.theta}


Event = Moved | Killed | Respawned


def propose_delta(pose: Pose, action: Action, cfg: MotionConfig) -> PoseDelta:
    """Intended pose increment for one tick; turning applies before moving."""
    dtheta = action.turn * cfg.turn_rate
    heading = wrap_angle(pose.theta + dtheta)
    fx = math.cos(heading)
    fy = math.sin(heading)
    # Right-hand basis vector: forward rotated by -pi/2.
    rx = fy
    ry = -fx
    dx = action.move * cfg.move_speed * fx + action.strafe * cfg.strafe_speed * rx
    dy = action.move * cfg.move_speed * fy + action.strafe * cfg.strafe_speed * ry
    return PoseDelta(dx, dy, dtheta)


def resolve_collision(
    world_map: WorldMap, pose: Pose, delta: PoseDelta, cfg: MotionConfig
) -> Pose:
    """Apply a delta with sliding collision against walls.

    Full move first; if blocked, axis attempts in the fixed order x then y,
    keeping each component only if its intermediate position is clear. The
    rotation component always applies.
    """
    theta = wrap_angle(pose.theta + delta.dtheta)
    limit = cfg.collision_radius - CLEARANCE_SLACK
    nx = pose.x + delta.dx
    ny = pose.y + delta.dy
    if clearance(world_map, nx, ny) >= limit:
        return Pose(nx, ny, theta)
    x = pose.x
    if clearance(world_map, nx, pose.y) >= limit:
        x = nx
    y = pose.y
    if clearance(world_map, x, pose.y + delta.dy) >= limit:
        y = pose.y + delta.dy
    return Pose(x, y, theta)


def resolve_attack(state: WorldState, attacker: str, cfg: MotionConfig) -> str | None:
    """Nearest Active player in the attack cone with clear line of sight.

    Ties break toward the smaller player id; None when nothing is hit.
    """
    shooter = state.players.get(attacker)
    if shooter is None or not shooter.active:
        raise WorldError(f"attacker {attacker!r} is not active")
    best: tuple[float, tuple[int, str]] | None = None
    victim = None
    for p in active_players(state):
        if p.id == attacker:
            continue
        if not is_visible(
            state.map,
            shooter.pose,
            (p.pose.x, p.pose.y),
            fov=2.0 * cfg.attack_half_angle,
            max_range=cfg.attack_range,
        ):
            continue
        dist = math.hypot(p.pose.x - shooter.pose.x, p.pose.y - shooter.pose.y)
        key = (dist, player_order(p.id))
        if best is None or key < best:
            best = key
            victim = p.id
    return victim


def advance_world(
    state: WorldState, actions: dict[str, Action], cfg: MotionConfig
) -> tuple[WorldState, list[Event]]:
    """One world tick: respawns, movement, attacks, tick increment."""
    unknown = set(actions) - set(state.players)
    if unknown:
        raise WorldError(f"actions for unknown players: {sorted(unknown)}")

    events: list[Event] = []

    dead_before = {p.id for p in state.players.values() if not p.active}
    state = process_respawns(state, cfg.collision_radius)
    for pid in sorted(dead_before, key=player_order):
        p = state.players[pid]
        if p.active:
            events.append(Respawned(pid, p.pose.x, p.pose.y, p.pose.theta))

    players = dict(state.players)
    for p in active_players(state):
        action = actions.get(p.id, NOOP_ACTION)
        delta = propose_delta(p.pose, action, cfg)
        new_pose = resolve_collision(state.map, p.pose, delta, cfg)
        if new_pose != p.pose:
            events.append(Moved(p.id, new_pose.x, new_pose.y, new_pose.theta))
        players[p.id] = replace(players[p.id], pose=new_pose)
    state = replace(state, players=players)

    for pid in sorted(actions, key=player_order):
        if not actions[pid].attack:
            continue
        attacker = state.players[pid]
        if not attacker.active:
            continue
        target = resolve_attack(state, pid, cfg)
        if target is not None:
            state = kill_player(state, target, pid, cfg.respawn_delay)
            events.append(Killed(victim=target, killer=pid))

    return replace(state, tick=state.tick + 1), events


def fold_kill_counts(events) -> dict[str, tuple[int, int]]:
    """Reduce an event stream to {player: (kills, deaths)}."""
    counts: dict[str, list[int]] = {}
    for ev in events:
        if isinstance(ev, Killed):
            counts.setdefault(ev.killer, [0, 0])[0] += 1
            counts.setdefault(ev.victim, [0, 0])[1] += 1
    return {pid: (k, d) for pid, (k, d) in counts.items()}
