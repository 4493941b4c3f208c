"""Renderer golden fixtures, shared by the tests and the regen script."""

import math

from multigen.frames import Frame
from multigen.geometry import Pose, depth_readout
from multigen.mapdata import WorldMap
from multigen.observation import SpriteProjection, render_frame, viewpoint_readout
from multigen.world import add_player, new_world

from .conftest import box_map

WIDTH, HEIGHT = 320, 200


def empty_world_map() -> WorldMap:
    return WorldMap("void", ((0.0, 0.0),), (), (((0.0, 0.0), 0.0),))


def render_empty() -> Frame:
    readout = depth_readout(empty_world_map(), Pose(0.0, 0.0, 0.0))
    return render_frame(readout, [], WIDTH, HEIGHT)


def render_frontal_wall() -> Frame:
    arena = box_map(half=6.0)
    readout = depth_readout(arena, Pose(1.0, 0.0, 0.0))  # wall x=6 at distance 5
    return render_frame(readout, [], WIDTH, HEIGHT)


def render_corner() -> Frame:
    arena = box_map(half=6.0)
    readout = depth_readout(arena, Pose(2.0, 2.0, math.pi / 4))
    return render_frame(readout, [], WIDTH, HEIGHT)


def _two_player_state(world_map):
    state = new_world(world_map, seed=1)
    state = add_player(state, "p1")
    state = add_player(state, "p2")
    return state


def render_sprite_visible() -> Frame:
    from multigen.observation import ViewConfig

    state = _two_player_state(box_map(half=6.0))
    readout, sprites = viewpoint_readout(state, "p1", ViewConfig())
    assert sprites, "fixture requires a visible opponent"
    return render_frame(readout, sprites, WIDTH, HEIGHT)


def render_sprite_occluded() -> Frame:
    # Hand-built projection behind the wall at its column: the plain z-test
    # applies (center_clear=False) and must leave zero opponent pixels.
    arena = box_map(half=6.0)
    readout = depth_readout(arena, Pose(1.0, 0.0, 0.0))  # frontal wall at 5
    sprite = SpriteProjection(
        player_id="p2", screen_column=160.0, distance=5.8, scale=22.0, center_clear=False
    )
    return render_frame(readout, [sprite], WIDTH, HEIGHT)


GOLDEN_FRAMES = {
    "render_empty": render_empty,
    "render_frontal_wall": render_frontal_wall,
    "render_corner": render_corner,
    "render_sprite_visible": render_sprite_visible,
    "render_sprite_occluded": render_sprite_occluded,
}
