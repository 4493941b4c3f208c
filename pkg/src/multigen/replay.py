"""Replay logs: recording and bit-exact headless re-execution.

A log is newline-delimited JSON: a header embedding the map document, seed
and configs; one line per tick carrying joins, leaves and the collected
actions; a checkpoint hash every 100 ticks; and a trailer with the final
hash. Replaying re-runs advance_world over the logged inputs and must
reproduce every checkpoint and the trailer hash exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Iterable, TextIO

from .dynamics import Action, Event, MotionConfig, advance_world
from .mapdata import WorldMap, map_from_document, map_to_document
from .observation import ViewConfig
from .world import WorldState, add_player, canonical_hash, new_world, remove_player

CHECKPOINT_EVERY = 100


class ReplayFormatError(ValueError):
    """Structurally broken log (bad line, tick gap, missing header)."""


class DivergenceError(RuntimeError):
    """Replay hash mismatch against a recorded checkpoint or trailer."""

    def __init__(self, tick: int, expected: str, actual: str):
        window = max(0, tick - CHECKPOINT_EVERY + 1)
        super().__init__(
            f"replay diverged at checkpoint tick {tick} "
            f"(first differing tick in [{window}, {tick}]): "
            f"expected {expected}, got {actual}"
        )
        self.tick = tick
        self.expected = expected
        self.actual = actual


@dataclass
class ReplayHeader:
    map: WorldMap
    seed: int
    motion: MotionConfig
    view: ViewConfig
    tick_rate: float


class ReplayWriter:
    """Streams log lines; checkpoints and trailer are the caller's cue via
    ``checkpoint``/``finish``."""

    def __init__(self, sink: TextIO):
        self._sink = sink

    def header(self, header: ReplayHeader) -> None:
        doc = {
            "type": "header",
            "v": "multigen/1",
            "map": map_to_document(header.map),
            "seed": header.seed,
            "motion": header.motion.to_wire(),
            "view": header.view.to_wire(),
            "tick_rate": header.tick_rate,
        }
        self._sink.write(json.dumps(doc, sort_keys=True) + "\n")

    def tick(
        self,
        tick: int,
        actions: dict[str, Action],
        joins: list[str] | None = None,
        leaves: list[str] | None = None,
    ) -> None:
        doc: dict = {"type": "tick", "tick": tick}
        if joins:
            doc["joins"] = joins
        if leaves:
            doc["leaves"] = leaves
        doc["actions"] = {pid: a.to_list() for pid, a in sorted(actions.items())}
        self._sink.write(json.dumps(doc, sort_keys=True) + "\n")

    def maybe_checkpoint(self, state: WorldState) -> None:
        if state.tick > 0 and state.tick % CHECKPOINT_EVERY == 0:
            doc = {"type": "checkpoint", "tick": state.tick, "hash": canonical_hash(state)}
            self._sink.write(json.dumps(doc, sort_keys=True) + "\n")
            self._sink.flush()

    def finish(self, state: WorldState) -> None:
        doc = {"type": "end", "ticks": state.tick, "final_hash": canonical_hash(state)}
        self._sink.write(json.dumps(doc, sort_keys=True) + "\n")
        self._sink.flush()


def read_log_lines(lines: Iterable[str]) -> tuple[ReplayHeader, list[dict], str | None]:
    """Parse and structurally check a log: (header, tick docs, trailer hash)."""
    header: ReplayHeader | None = None
    ticks: list[dict] = []
    final_hash: str | None = None
    checkpoints: dict[int, str] = {}
    expected_tick = 0
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line:
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ReplayFormatError(f"log line {lineno}: {exc.msg}") from exc
        kind = doc.get("type")
        if kind == "header":
            if header is not None:
                raise ReplayFormatError(f"log line {lineno}: duplicate header")
            header = ReplayHeader(
                map=map_from_document(doc["map"]),
                seed=int(doc["seed"]),
                motion=MotionConfig.from_wire(doc["motion"]),
                view=ViewConfig.from_wire(doc["view"]),
                tick_rate=float(doc["tick_rate"]),
            )
        elif kind == "tick":
            if header is None:
                raise ReplayFormatError(f"log line {lineno}: tick before header")
            if doc["tick"] != expected_tick:
                raise ReplayFormatError(
                    f"log line {lineno}: tick {doc['tick']} breaks contiguity "
                    f"(expected {expected_tick})"
                )
            expected_tick += 1
            doc["checkpoint_after"] = None
            ticks.append(doc)
        elif kind == "checkpoint":
            if not ticks or doc["tick"] != expected_tick:
                raise ReplayFormatError(f"log line {lineno}: checkpoint out of place")
            ticks[-1]["checkpoint_after"] = doc["hash"]
            checkpoints[doc["tick"]] = doc["hash"]
        elif kind == "end":
            final_hash = doc["final_hash"]
        else:
            raise ReplayFormatError(f"log line {lineno}: unknown record type {kind!r}")
    if header is None:
        raise ReplayFormatError("log has no header")
    return header, ticks, final_hash


def replay_from_log(
    lines: Iterable[str],
    on_tick: Callable[[WorldState, list[Event]], None] | None = None,
) -> WorldState:
    """Re-run a recorded session; raises DivergenceError on hash mismatch."""
    header, ticks, final_hash = read_log_lines(lines)
    state = new_world(header.map, header.seed)
    for doc in ticks:
        for pid in doc.get("leaves", []):
            state = remove_player(state, pid)
        for pid in doc.get("joins", []):
            state = add_player(state, pid, header.motion.collision_radius)
        actions = {pid: Action.from_list(a) for pid, a in doc["actions"].items()}
        state, events = advance_world(state, actions, header.motion)
        if on_tick is not None:
            on_tick(state, events)
        expected = doc.get("checkpoint_after")
        if expected is not None:
            actual = canonical_hash(state)
            if actual != expected:
                raise DivergenceError(state.tick, expected, actual)
    if final_hash is not None:
        actual = canonical_hash(state)
        if actual != final_hash:
            raise DivergenceError(state.tick, final_hash, actual)
    return state


def replay_file(path, on_tick=None) -> WorldState:
    with open(path, "r", encoding="utf-8") as fh:
        return replay_from_log(fh, on_tick=on_tick)
