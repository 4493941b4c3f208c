#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Covers the three hot paths (FOV depth sweep, clearance scan, line-of-sight
scan) plus the full server tick cycle. Run after an editable install:

    python benchmarks/bench_kernels.py
"""

import math
import statistics
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

import numpy as np

from multigen import _kernels
from multigen.dynamics import Action, advance_world
from multigen.geometry import column_directions
from multigen.levelgen import LevelSpec, generate_map
from multigen.server import GameServer, SessionConfig
from multigen.world import add_player, canonical_hash, new_world


def timeit(fn, min_runs=5, min_seconds=0.3):
    times = []
    while len(times) < min_runs or sum(times) < min_seconds:
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
        if len(times) > 10_000:
            break
    return statistics.median(times)


def big_map():
    return generate_map(LevelSpec(seed=7, room_count=40, grid_extent=96.0))


def bench_backend(name: str) -> dict[str, float]:
    _kernels.use(name)
    world_map = big_map()
    segs = world_map.segments
    eps = world_map.edge_eps
    dirs = column_directions(0.3, math.pi / 2, 320)
    kern = _kernels.active

    results = {}
    results["depth_sweep 320x%d" % len(segs)] = timeit(
        lambda: kern.depth_sweep(segs, eps, 1.0, -2.0, dirs, 64.0)
    )
    results["min_clearance x100"] = timeit(
        lambda: [kern.min_clearance(segs, 0.5 * i, 1.0) for i in range(100)]
    )
    results["segment_blocked x100"] = timeit(
        lambda: [kern.segment_blocked(segs, eps, 0.0, 0.0, 0.3 * i, 8.0) for i in range(100)]
    )

    cfg = SessionConfig(map=world_map, seed=1, port=0)
    server = GameServer(cfg)
    state = new_world(world_map, 1, validated=True)
    players = ("p1", "p2", "p3", "p4")
    for pid in players:
        state = add_player(state, pid)
    rng = np.random.default_rng(0)
    holder = {"state": state}

    def tick_cycle():
        actions = {
            pid: Action(move=int(rng.integers(-1, 2)), turn=int(rng.integers(-1, 2)))
            for pid in players
        }
        s, _ = advance_world(holder["state"], actions, cfg.motion)
        holder["state"] = s
        server.state = s
        h = canonical_hash(s)
        for pid in players:
            server._tick_update_line(s, pid, h, "[]")

    results["full tick cycle (4 players)"] = timeit(tick_cycle)
    return results


def main() -> None:
    if _kernels.compiled is None:
        print("compiled kernels unavailable; benchmarking pure only")
        names = ["pure"]
    else:
        names = ["compiled", "pure"]
    table = {name: bench_backend(name) for name in names}
    _kernels.use("compiled" if _kernels.compiled is not None else "pure")

    rows = list(table[names[0]])
    width = max(len(r) for r in rows) + 2
    header = f"{'benchmark':<{width}}" + "".join(f"{n:>14}" for n in names)
    if len(names) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for row in rows:
        line = f"{row:<{width}}"
        for name in names:
            line += f"{table[name][row] * 1e3:>11.3f} ms"
        if len(names) == 2:
            line += f"{table['pure'][row] / table['compiled'][row]:>9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
