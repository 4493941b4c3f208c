"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 validation or divergence failure.
Every subcommand's output is deterministic given its flags and input files.
"""

from __future__ import annotations

import argparse
import asyncio
import sys
from pathlib import Path

from .dynamics import Action, MotionConfig, advance_world
from .frames import save_ppm
from .levelgen import LevelGenError, LevelSpec, generate_map, rasterize_minimap, validate_map
from .mapdata import MapFormatError, MapValidationError, load_map, map_to_text
from .metrics import BACKENDS, evaluate_rollout, format_report
from .observation import ViewConfig, render_frame, viewpoint_readout
from .replay import DivergenceError, ReplayFormatError, replay_file
from .server import SessionConfig, run_server
from .world import add_player, canonical_hash, new_world

USAGE_ERROR = 1
FAILURE = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def _build_parser() -> _Parser:
    parser = _Parser(prog="multigen", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-map", help="generate a procedural map file")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--rooms", type=int, default=8)
    p.add_argument("--room-min", type=float, default=4.0)
    p.add_argument("--room-max", type=float, default=9.0)
    p.add_argument("--corridor-width", type=float, default=1.5)
    p.add_argument("--extent", type=float, default=48.0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("validate", help="validate a map file")
    p.add_argument("--map", required=True)

    p = sub.add_parser("minimap", help="render a top-down minimap PPM")
    p.add_argument("--map", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--scale", type=float, default=8.0)

    p = sub.add_parser("serve", help="run the authoritative game server")
    p.add_argument("--map", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=7777)
    p.add_argument("--tick-rate", type=float, default=20.0)
    p.add_argument("--max-players", type=int, default=8)
    p.add_argument("--record", default=None, metavar="PATH")
    p.add_argument("--render-mode", choices=("readout", "frames"), default="readout")
    p.add_argument("--static-dir", default=None, help="serve the web client from this directory")
    p.add_argument(
        "--motion",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a MotionConfig field (repeatable)",
    )

    p = sub.add_parser("replay", help="re-run a recorded log and verify its hash")
    p.add_argument("--log", required=True)

    p = sub.add_parser("eval-presence", help="score opponent presence over a log")
    p.add_argument("--log", required=True)
    p.add_argument("--backend", choices=sorted(BACKENDS), default="reference")
    p.add_argument("--out", default=None, metavar="PATH")

    p = sub.add_parser("render-rollout", help="render frames for a scripted rollout")
    p.add_argument("--map", required=True)
    p.add_argument("--actions", required=True, metavar="SCRIPT")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=0)

    return parser


def _load_map_or_fail(path: str):
    try:
        return load_map(path)
    except FileNotFoundError:
        print(f"error: map file not found: {path}", file=sys.stderr)
        raise SystemExit(FAILURE)
    except (MapFormatError, MapValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(FAILURE)


def _cmd_gen_map(args) -> int:
    spec = LevelSpec(
        seed=args.seed,
        room_count=args.rooms,
        room_size_range=(args.room_min, args.room_max),
        corridor_width=args.corridor_width,
        grid_extent=args.extent,
    )
    try:
        world_map = generate_map(spec)
    except (LevelGenError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FAILURE
    report = validate_map(world_map)
    if report:
        print("error: generated map failed validation:", file=sys.stderr)
        for item in report:
            print(f"  - {item}", file=sys.stderr)
        return FAILURE
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(map_to_text(world_map), encoding="utf-8")
    print(f"{args.out}: {len(world_map.vertices)} vertices, {len(world_map.edges)} edges, "
          f"{len(world_map.spawn_points)} spawns")
    return 0


def _cmd_validate(args) -> int:
    world_map = _load_map_or_fail(args.map)
    report = validate_map(world_map)
    if report:
        print(f"{args.map}: INVALID")
        for item in report:
            print(f"  - {item}")
        return FAILURE
    print(f"{args.map}: valid")
    return 0


def _cmd_minimap(args) -> int:
    world_map = _load_map_or_fail(args.map)
    if args.scale <= 0:
        print("error: --scale must be positive", file=sys.stderr)
        return USAGE_ERROR
    image = rasterize_minimap(world_map, (), scale=args.scale)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    save_ppm(image.frame, args.out)
    print(f"{args.out}: {image.frame.width}x{image.frame.height}")
    return 0


def _parse_motion_overrides(pairs: list[str]) -> MotionConfig:
    overrides = {}
    base = MotionConfig().to_wire()
    for pair in pairs:
        if "=" not in pair:
            raise SystemExit(USAGE_ERROR)
        key, value = pair.split("=", 1)
        if key not in base:
            print(f"error: unknown motion field {key!r}", file=sys.stderr)
            raise SystemExit(USAGE_ERROR)
        overrides[key] = float(value) if key != "respawn_delay" else int(value)
    base.update(overrides)
    return MotionConfig.from_wire(base)


def _cmd_serve(args) -> int:
    world_map = _load_map_or_fail(args.map)
    report = validate_map(world_map)
    if report:
        print("error: map failed validation:", file=sys.stderr)
        for item in report:
            print(f"  - {item}", file=sys.stderr)
        return FAILURE
    cfg = SessionConfig(
        map=world_map,
        seed=args.seed,
        host=args.host,
        port=args.port,
        tick_rate=args.tick_rate,
        max_players=args.max_players,
        motion=_parse_motion_overrides(args.motion),
        record_path=args.record,
        render_mode=args.render_mode,
        static_dir=args.static_dir,
    )
    print(f"serving {args.map} on {cfg.host}:{cfg.port} at {cfg.tick_rate} ticks/s")
    try:
        asyncio.run(run_server(cfg))
    except KeyboardInterrupt:
        print("shutting down")
    return 0


def _cmd_replay(args) -> int:
    try:
        final = replay_file(args.log)
    except FileNotFoundError:
        print(f"error: log not found: {args.log}", file=sys.stderr)
        return FAILURE
    except (ReplayFormatError, MapFormatError, MapValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FAILURE
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FAILURE
    print(f"final tick: {final.tick}")
    print(f"final hash: {canonical_hash(final)}")
    return 0


def _cmd_eval_presence(args) -> int:
    backend = BACKENDS[args.backend]
    try:
        with open(args.log, "r", encoding="utf-8") as fh:
            result = evaluate_rollout(fh, backend)
    except FileNotFoundError:
        print(f"error: log not found: {args.log}", file=sys.stderr)
        return FAILURE
    except (ReplayFormatError, DivergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FAILURE
    report = format_report(result)
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(report, encoding="utf-8")
    print(report, end="")
    return 0


def _parse_action_script(path: str) -> tuple[list[str], dict[int, dict[str, Action]]]:
    """Script lines are "tick player move strafe turn attack"."""
    players: list[str] = []
    by_tick: dict[int, dict[str, Action]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split()
            if len(parts) != 6:
                raise ValueError(f"{path}:{lineno}: expected 'tick player move strafe turn attack'")
            try:
                tick = int(parts[0])
                action = Action(int(parts[2]), int(parts[3]), int(parts[4]), bool(int(parts[5])))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
            if tick < 0:
                raise ValueError(f"{path}:{lineno}: tick must be non-negative")
            player = parts[1]
            if player not in players:
                players.append(player)
            slot = by_tick.setdefault(tick, {})
            if player in slot:
                raise ValueError(f"{path}:{lineno}: duplicate action for tick {tick} player {player}")
            slot[player] = action
    return players, by_tick


def _cmd_render_rollout(args) -> int:
    world_map = _load_map_or_fail(args.map)
    try:
        players, by_tick = _parse_action_script(args.actions)
    except FileNotFoundError:
        print(f"error: script not found: {args.actions}", file=sys.stderr)
        return FAILURE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FAILURE
    if not players:
        players = ["p1"]
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    try:
        state = new_world(world_map, args.seed)
    except MapValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FAILURE
    motion = MotionConfig()
    view = ViewConfig()
    for pid in players:
        state = add_player(state, pid, motion.collision_radius)

    def dump(state) -> None:
        tick = state.tick
        poses = tuple(
            (p.id, p.pose) for p in sorted(state.players.values(), key=lambda q: q.id)
            if p.active
        )
        image = rasterize_minimap(state.map, poses)
        save_ppm(image.frame, out_dir / f"minimap_{tick:04d}.ppm")
        for pid in players:
            player = state.players[pid]
            if not player.active:
                continue
            readout, sprites = viewpoint_readout(state, pid, view)
            frame = render_frame(readout, sprites, view.width, view.height)
            save_ppm(frame, out_dir / f"view_{tick:04d}_{pid}.ppm")

    dump(state)
    total_ticks = (max(by_tick) + 1) if by_tick else 0
    for tick in range(total_ticks):
        state, _ = advance_world(state, by_tick.get(tick, {}), motion)
        dump(state)
    print(f"{args.out_dir}: rendered ticks 0..{state.tick} for {len(players)} player(s)")
    return 0


_COMMANDS = {
    "gen-map": _cmd_gen_map,
    "validate": _cmd_validate,
    "minimap": _cmd_minimap,
    "serve": _cmd_serve,
    "replay": _cmd_replay,
    "eval-presence": _cmd_eval_presence,
    "render-rollout": _cmd_render_rollout,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    return _COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
