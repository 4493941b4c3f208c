#!/usr/bin/env python3
"""Regenerate every frozen golden artifact.

Run only when intentionally re-baselining: outputs are committed and the
test suite treats any byte difference as a regression. Also regenerates the
web client conformance fixtures under frontend/fixtures/.
"""

import io
import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT))
sys.path.insert(0, str(ROOT / "src"))

from multigen.dynamics import MotionConfig
from multigen.frames import save_ppm
from multigen.levelgen import LevelSpec, generate_map
from multigen.observation import (
    ViewConfig,
    message_readout,
    render_frame,
    sprites_from_wire,
)
from multigen.replay import ReplayHeader, ReplayWriter, replay_from_log
from multigen.server import GameServer, SessionConfig
from multigen.world import add_player, canonical_hash, new_world

from tests.conftest import chase_action, divided_box_map
from tests.fixtures import GOLDEN_FRAMES

GOLDEN = ROOT / "tests" / "golden"
FIXTURES = ROOT / "frontend" / "fixtures"


def scripted_session_log(ticks: int = 500) -> str:
    """Deterministic 2-player chase deathmatch recorded headlessly."""
    from multigen.dynamics import advance_world

    world_map = generate_map(LevelSpec(seed=12, room_count=5))
    motion = MotionConfig(respawn_delay=40)
    view = ViewConfig()
    sink = io.StringIO()
    writer = ReplayWriter(sink)
    writer.header(ReplayHeader(map=world_map, seed=12, motion=motion, view=view, tick_rate=20.0))
    state = new_world(world_map, 12)
    for tick in range(ticks):
        joins = []
        if tick == 0:
            for pid in ("p1", "p2"):
                state = add_player(state, pid, motion.collision_radius)
                joins.append(pid)
        actions = {}
        for pid, other in (("p1", "p2"), ("p2", "p1")):
            if state.players[pid].active:
                actions[pid] = chase_action(state, pid, other, motion)
        writer.tick(tick, actions, joins=joins)
        state, _ = advance_world(state, actions, motion)
        writer.maybe_checkpoint(state)
    writer.finish(state)
    return sink.getvalue()


def client_fixture() -> None:
    """Tick messages plus golden frames rendered from those exact messages."""
    FIXTURES.mkdir(parents=True, exist_ok=True)
    world_map = divided_box_map()
    view = ViewConfig()
    cfg = SessionConfig(map=world_map, seed=5, port=0)
    server = GameServer(cfg)

    state = new_world(world_map, 5)
    state = add_player(state, "p1")
    state = add_player(state, "p2")
    # Walk p2 to the doorway so one fixture tick has a visible sprite.
    from multigen.dynamics import Action, advance_world

    # Strafing right from p2's pi-facing spawn moves it +y, past the end of
    # the dividing wall and into p1's view cone.
    scripts = {
        "wall_only": [],
        "sprite_visible": [("p2", Action(strafe=1))] * 17,
    }
    records = []
    for name, moves in scripts.items():
        sim = state
        for step in moves:
            sim, _ = advance_world(sim, dict([step]), cfg.motion)
        server.state = sim
        line = server._tick_update_line(sim, "p1", canonical_hash(sim), "[]")
        if name == "sprite_visible":
            assert json.loads(line)["sprites"], "fixture requires a visible sprite"
        records.append({"name": name, "line": line})
        doc = json.loads(line)
        readout = message_readout(doc["disparity"], view, pose_theta=doc["pose"]["theta"])
        frame = render_frame(readout, sprites_from_wire(doc["sprites"]), view.width, view.height)
        save_ppm(frame, FIXTURES / f"golden_client_{name}.ppm")
    with open(FIXTURES / "tick_fixture.ndjson", "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")


def main() -> None:
    GOLDEN.mkdir(parents=True, exist_ok=True)

    for name, build in GOLDEN_FRAMES.items():
        save_ppm(build(), GOLDEN / f"{name}.ppm")
        print(f"wrote {name}.ppm")

    log_text = scripted_session_log()
    (GOLDEN / "session_500.log").write_text(log_text, encoding="utf-8")
    final = replay_from_log(log_text.splitlines())
    print(f"wrote session_500.log (final hash {canonical_hash(final)})")

    state = new_world(generate_map(LevelSpec(seed=42)), 42)
    constants = {
        "world_gen42_seed42_hash": canonical_hash(state),
        "session_500_final_hash": canonical_hash(final),
    }
    (GOLDEN / "constants.json").write_text(json.dumps(constants, indent=2) + "\n", encoding="utf-8")
    print("wrote constants.json:", constants)

    client_fixture()
    print("wrote frontend fixtures")


if __name__ == "__main__":
    main()
