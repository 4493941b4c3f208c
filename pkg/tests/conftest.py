"""Shared fixtures: small hand-built maps, a chase bot, a session recorder."""

import io
import math

import pytest

from multigen.dynamics import Action, MotionConfig, advance_world
from multigen.geometry import is_visible, line_of_sight, wrap_angle
from multigen.mapdata import WorldMap
from multigen.observation import ViewConfig
from multigen.replay import ReplayHeader, ReplayWriter
from multigen.world import add_player, new_world


def box_map(half: float = 6.0, spawns=None, extra_edges=(), extra_vertices=(), name="box") -> WorldMap:
    """Square arena with optional interior walls."""
    vertices = [(-half, -half), (half, -half), (half, half), (-half, half)]
    vertices.extend(extra_vertices)
    edges = [(0, 1), (1, 2), (2, 3), (3, 0)]
    edges.extend(extra_edges)
    if spawns is None:
        spawns = (((-half / 2, 0.0), 0.0), ((half / 2, 0.0), math.pi))
    return WorldMap(
        name=name,
        vertices=tuple(vertices),
        edges=tuple(edges),
        spawn_points=tuple(spawns),
    )


def divided_box_map(half: float = 6.0) -> WorldMap:
    """Arena split by a partial center wall; the two spawns face each other
    through it but can walk around the gap at the top."""
    return box_map(
        half=half,
        extra_vertices=((0.0, -half), (0.0, half / 3)),
        extra_edges=((4, 5),),
        spawns=(((-half / 2, 0.0), 0.0), ((half / 2, 0.0), math.pi)),
        name="divided-box",
    )


@pytest.fixture
def arena():
    return box_map()


@pytest.fixture
def divided_arena():
    return divided_box_map()


def record_headless_session(
    world_map: WorldMap,
    seed: int,
    motion: MotionConfig,
    ticks: int,
    policy,
    players=("p1", "p2"),
    view: ViewConfig | None = None,
) -> str:
    """Drive advance_world under ``policy(state) -> actions`` and return the
    recorded log text. The log format is identical to a live server's."""
    sink = io.StringIO()
    writer = ReplayWriter(sink)
    writer.header(
        ReplayHeader(
            map=world_map,
            seed=seed,
            motion=motion,
            view=view if view is not None else ViewConfig(),
            tick_rate=20.0,
        )
    )
    state = new_world(world_map, seed)
    for tick in range(ticks):
        joins = []
        if tick == 0:
            for pid in players:
                state = add_player(state, pid, motion.collision_radius)
                joins.append(pid)
        actions = policy(state)
        writer.tick(tick, actions, joins=joins)
        state, _ = advance_world(state, actions, motion)
        writer.maybe_checkpoint(state)
    writer.finish(state)
    return sink.getvalue()


def pillar_arena(half: float = 8.0) -> WorldMap:
    """Open arena with a central square pillar: spawns start mutually hidden
    and visibility flips as players round the corners."""
    # Spawn yaws deliberately do not mirror each other: symmetric starts keep
    # two identical bots point-symmetric forever, with the pillar eternally
    # blocking their sight line.
    return box_map(
        half=half,
        extra_vertices=((-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)),
        extra_edges=((4, 5), (5, 6), (6, 7), (7, 4)),
        spawns=(((-half + 3.0, 0.0), 0.0), ((half - 3.0, 0.0), math.pi / 2)),
        name="pillar-arena",
    )


def chase_action(state, pid: str, target_id: str, cfg: MotionConfig) -> Action:
    """Deterministic hunting policy used to script deathmatch rollouts.

    Hunts the target when there is line of sight, otherwise patrols in a
    turning arc (which also slides the bot around obstacles)."""
    me = state.players[pid]
    other = state.players.get(target_id)
    if other is None or not other.active or not me.active:
        return Action(move=1, turn=1)
    dx = other.pose.x - me.pose.x
    dy = other.pose.y - me.pose.y
    dist = math.hypot(dx, dy)
    if dist < 1e-9:
        return Action()
    sees_target = dist <= cfg.attack_range and line_of_sight(
        state.map, (me.pose.x, me.pose.y), (other.pose.x, other.pose.y)
    )
    if not sees_target:
        return Action(move=1, turn=1)
    bearing = wrap_angle(math.atan2(dy, dx) - me.pose.theta)
    if bearing > cfg.turn_rate / 2:
        turn = 1
    elif bearing < -cfg.turn_rate / 2:
        turn = -1
    else:
        turn = 0
    # Stop to aim once inside 6 units; a standing duel always converges on
    # the 3-degree attack cone, so scripted matches reliably produce kills.
    move = 1 if abs(bearing) < math.pi / 4 and dist > 6.0 else 0
    attack = (
        abs(bearing) <= cfg.attack_half_angle * 0.9
        and is_visible(state.map, me.pose, (other.pose.x, other.pose.y),
                       fov=2 * cfg.attack_half_angle, max_range=cfg.attack_range)
    )
    return Action(move=move, turn=turn, attack=attack)
