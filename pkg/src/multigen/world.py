"""Shared world state: the explicit external memory.

States are immutable values; every operation returns a new WorldState and
never touches its input, so any snapshot handed to a reader stays frozen
while the server keeps advancing. All mutation happens in the server's
exclusive advance phase.

Player id ordering (used for every deterministic tie-break) is shortlex:
shorter ids first, then lexicographic — so p2 sorts before p10.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, replace

from .geometry import Pose
from .mapdata import PLAYER_RADIUS, MapValidationError, WorldMap
from .rng import MASK64

# Pose quantization step for hashing: robust to 9-significant-digit
# serialization round-trips while catching real divergence.
HASH_QUANTUM = 1e-6


class WorldError(ValueError):
    """Invalid player-set operation (duplicate id, dead victim, ...)."""


def player_order(player_id: str) -> tuple[int, str]:
    return (len(player_id), player_id)


@dataclass(frozen=True)
class PlayerState:
    id: str
    pose: Pose
    respawn_tick: int | None = None  # None = Active, else Dead until this tick
    kills: int = 0
    deaths: int = 0

    @property
    def active(self) -> bool:
        return self.respawn_tick is None


@dataclass(frozen=True)
class WorldState:
    map: WorldMap
    tick: int
    players: dict[str, PlayerState]
    rng_state: int
    # Spawn-point LRU bookkeeping: stamp of last use per spawn (0 = never)
    # and the monotonically increasing stamp clock.
    spawn_stamps: tuple[int, ...]
    spawn_clock: int


def new_world(world_map: WorldMap, seed: int, validated: bool = False) -> WorldState:
    """Fresh world at tick 0 with no players.

    Runs full map validation (structure + connectivity) unless the caller
    already did via ``validated=True``.
    """
    if not validated:
        from .levelgen import validate_map

        report = validate_map(world_map)
        if report:
            raise MapValidationError(report)
    return WorldState(
        map=world_map,
        tick=0,
        players={},
        rng_state=seed & MASK64,
        spawn_stamps=(0,) * len(world_map.spawn_points),
        spawn_clock=0,
    )


def _spawn_blocked(state: WorldState, spawn_idx: int, collision_radius: float) -> bool:
    (sx, sy), _ = state.map.spawn_points[spawn_idx]
    limit = 2.0 * collision_radius
    for p in state.players.values():
        if not p.active:
            continue
        if math.hypot(p.pose.x - sx, p.pose.y - sy) < limit:
            return True
    return False


def _select_spawn(state: WorldState, collision_radius: float) -> int | None:
    """Least-recently-used unblocked spawn point, ties by spawn index."""
    best = None
    best_stamp = None
    for i in range(len(state.map.spawn_points)):
        if _spawn_blocked(state, i, collision_radius):
            continue
        stamp = state.spawn_stamps[i]
        if best is None or stamp < best_stamp:
            best = i
            best_stamp = stamp
    return best


def _use_spawn(state: WorldState, spawn_idx: int) -> tuple[Pose, tuple[int, ...], int]:
    (sx, sy), yaw = state.map.spawn_points[spawn_idx]
    clock = state.spawn_clock + 1
    stamps = list(state.spawn_stamps)
    stamps[spawn_idx] = clock
    return Pose(sx, sy, yaw), tuple(stamps), clock


def add_player(
    state: WorldState, player_id: str, collision_radius: float = PLAYER_RADIUS
) -> WorldState:
    """Add a new Active player at the next spawn in the deterministic rotation."""
    if player_id in state.players:
        raise WorldError(f"duplicate player id {player_id!r}")
    spawn_idx = _select_spawn(state, collision_radius)
    if spawn_idx is None:
        raise WorldError("spawn blocked")
    pose, stamps, clock = _use_spawn(state, spawn_idx)
    players = dict(state.players)
    players[player_id] = PlayerState(id=player_id, pose=pose)
    return replace(state, players=players, spawn_stamps=stamps, spawn_clock=clock)


def remove_player(state: WorldState, player_id: str) -> WorldState:
    if player_id not in state.players:
        raise WorldError(f"unknown player id {player_id!r}")
    players = dict(state.players)
    del players[player_id]
    return replace(state, players=players)


def kill_player(
    state: WorldState, victim: str, killer: str, respawn_delay: int
) -> WorldState:
    """Mark the victim Dead and credit the killer; self-kills count on both."""
    if respawn_delay < 1:
        raise WorldError("respawn_delay must be at least one tick")
    v = state.players.get(victim)
    k = state.players.get(killer)
    if v is None or k is None:
        raise WorldError(f"unknown player in kill: {victim!r} by {killer!r}")
    if not v.active:
        raise WorldError(f"victim {victim!r} is not active")
    players = dict(state.players)
    players[victim] = replace(v, respawn_tick=state.tick + respawn_delay, deaths=v.deaths + 1)
    k = players[victim] if killer == victim else k
    players[killer] = replace(k, kills=k.kills + 1)
    return replace(state, players=players)


def process_respawns(state: WorldState, collision_radius: float = PLAYER_RADIUS) -> WorldState:
    """Reintroduce every Dead player whose respawn tick has arrived.

    A blocked spawn defers that player's respawn to a later tick.
    """
    due = [
        p.id
        for p in state.players.values()
        if not p.active and p.respawn_tick <= state.tick
    ]
    if not due:
        return state
    for player_id in sorted(due, key=player_order):
        spawn_idx = _select_spawn(state, collision_radius)
        if spawn_idx is None:
            continue
        pose, stamps, clock = _use_spawn(state, spawn_idx)
        players = dict(state.players)
        players[player_id] = replace(players[player_id], pose=pose, respawn_tick=None)
        state = replace(state, players=players, spawn_stamps=stamps, spawn_clock=clock)
    return state


def snapshot(state: WorldState) -> WorldState:
    """Immutable view of the state; operations never mutate, so this is it."""
    return state


def active_players(state: WorldState) -> list[PlayerState]:
    return sorted(
        (p for p in state.players.values() if p.active), key=lambda p: player_order(p.id)
    )


def _quantize(value: float) -> int:
    return round(value / HASH_QUANTUM)


def canonical_hash(state: WorldState) -> str:
    """64-bit hex digest over the quantized state; equal states hash equal."""
    parts = [f"t={state.tick}", f"rng={state.rng_state}", f"sc={state.spawn_clock}"]
    parts.append("ss=" + ",".join(str(s) for s in state.spawn_stamps))
    for pid in sorted(state.players, key=player_order):
        p = state.players[pid]
        rs = -1 if p.respawn_tick is None else p.respawn_tick
        parts.append(
            f"{pid}:{_quantize(p.pose.x)},{_quantize(p.pose.y)},"
            f"{_quantize(p.pose.theta)},{rs},{p.kills},{p.deaths}"
        )
    digest = hashlib.sha256(";".join(parts).encode("ascii")).hexdigest()
    return digest[:16]


def _num(value: float) -> str:
    return format(float(value), ".9g")


def canonical_state_document(state: WorldState) -> str:
    """Deterministic text document of the full state (sorted keys, 9 sig digits)."""
    player_docs = []
    for pid in sorted(state.players, key=player_order):
        p = state.players[pid]
        rs = "null" if p.respawn_tick is None else str(p.respawn_tick)
        player_docs.append(
            "{"
            + f'"deaths":{p.deaths},"id":"{pid}","kills":{p.kills},'
            + f'"respawn_tick":{rs},"theta":{_num(p.pose.theta)},'
            + f'"x":{_num(p.pose.x)},"y":{_num(p.pose.y)}'
            + "}"
        )
    stamps = ",".join(str(s) for s in state.spawn_stamps)
    return (
        "{"
        + f'"map":"{state.map.name}","players":[{",".join(player_docs)}],'
        + f'"rng":"{state.rng_state}","spawn_clock":{state.spawn_clock},'
        + f'"spawn_stamps":[{stamps}],"tick":{state.tick}'
        + "}"
    )
