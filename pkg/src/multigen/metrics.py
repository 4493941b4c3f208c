"""Presence-metric harness: geometric ground truth vs rendered frames.

Ground truth for (tick, viewer, opponent) is the range + FOV-cone +
line-of-sight visibility test on the post-advance state; the predicted label
comes from exact palette-color detection on the rendered frame. With the
reference backend the two agree by construction, so its end-to-end accuracy
is exactly 1.0 and any deviation is a bug. Degraded backends exist to show
the metric discriminates.

Ground truth ignores player-player occlusion (walls only); with three or
more players a nearer sprite can fully cover a farther one, so exact
agreement is guaranteed for two-player rollouts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .frames import Frame, palette_color
from .geometry import is_visible, wrap_angle
from .observation import (
    SPRITE_WORLD_HEIGHT,
    ViewConfig,
    render_frame,
    viewpoint_readout,
)
from .replay import read_log_lines, replay_from_log
from .world import WorldState, active_players

PresenceKey = tuple[int, str, str]
PresenceLabels = dict[PresenceKey, bool]


@dataclass(frozen=True)
class PresenceScore:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def accuracy(self) -> float | None:
        return None if self.total == 0 else (self.tp + self.tn) / self.total

    @property
    def precision(self) -> float | None:
        denom = self.tp + self.fp
        return None if denom == 0 else self.tp / denom

    @property
    def recall(self) -> float | None:
        denom = self.tp + self.fn
        return None if denom == 0 else self.tp / denom


def presence_score(predicted: PresenceLabels, truth: PresenceLabels) -> PresenceScore:
    """Confusion counts of predicted against truth over identical key sets."""
    if set(predicted) != set(truth):
        raise ValueError("predicted and truth label streams cover different keys")
    tp = fp = tn = fn = 0
    for key, actual in truth.items():
        guess = predicted[key]
        if actual and guess:
            tp += 1
        elif actual and not guess:
            fn += 1
        elif not actual and guess:
            fp += 1
        else:
            tn += 1
    return PresenceScore(tp, fp, tn, fn)


def frame_presence_detector(frame: Frame, color: tuple[int, int, int]) -> bool:
    """True iff at least one pixel equals the opponent's palette color exactly."""
    return bool(np.all(frame.pixels == np.asarray(color, dtype=np.uint8), axis=2).any())


def _pair_truth(state: WorldState, view: ViewConfig) -> PresenceLabels:
    labels: PresenceLabels = {}
    active = active_players(state)
    for viewer in active:
        for opp in active:
            if opp.id == viewer.id:
                continue
            labels[(state.tick, viewer.id, opp.id)] = is_visible(
                state.map,
                viewer.pose,
                (opp.pose.x, opp.pose.y),
                fov=view.fov,
                max_range=view.max_range,
            )
    return labels


def ground_truth_labels(lines, view: ViewConfig | None = None) -> PresenceLabels:
    """Geometric visibility labels per (tick, viewer, opponent) from a log."""
    material = list(lines)
    header, _, _ = read_log_lines(material)
    use_view = view if view is not None else header.view
    labels: PresenceLabels = {}
    replay_from_log(material, on_tick=lambda state, _ev: labels.update(_pair_truth(state, use_view)))
    return labels


class ReferenceBackend:
    """The raycast pipeline exactly as the server renders it."""

    name = "reference"

    def render_player(self, state: WorldState, viewer: str, view: ViewConfig) -> Frame:
        readout, sprites = viewpoint_readout(state, viewer, view)
        return render_frame(readout, sprites, view.width, view.height)


class NoSpritesBackend:
    """Degraded: never draws opponents; recall must collapse to zero."""

    name = "no-sprites"

    def render_player(self, state: WorldState, viewer: str, view: ViewConfig) -> Frame:
        readout, _ = viewpoint_readout(state, viewer, view)
        return render_frame(readout, [], view.width, view.height)


class NoOcclusionBackend:
    """Degraded: draws every in-range, in-cone opponent through walls."""

    name = "no-occlusion"

    def render_player(self, state: WorldState, viewer: str, view: ViewConfig) -> Frame:
        readout, _ = viewpoint_readout(state, viewer, view)
        frame = render_frame(readout, [], view.width, view.height)
        p = state.players[viewer]
        for other in active_players(state):
            if other.id == viewer:
                continue
            dx = other.pose.x - p.pose.x
            dy = other.pose.y - p.pose.y
            distance = math.sqrt(dx * dx + dy * dy)
            if distance > view.max_range:
                continue
            bearing = 0.0 if distance < 1e-9 else wrap_angle(math.atan2(dy, dx) - p.pose.theta)
            if abs(bearing) > view.fov / 2.0:
                continue
            column = view.columns * (0.5 - bearing / view.fov)
            center = min(max(int(column * view.width / view.columns), 0), view.width - 1)
            perp = max(distance * math.cos(bearing), 1e-3)
            scale = SPRITE_WORLD_HEIGHT * view.focal / perp
            h_px = min(max(int(scale + 0.5), 1), view.height)
            w_px = min(max(int(scale * 0.5 + 0.5), 1), view.width)
            top = max((view.height - h_px) // 2, 0)
            left = max(center - w_px // 2, 0)
            frame.pixels[top : top + h_px, left : left + w_px] = palette_color(other.id)
        return frame


BACKENDS = {b.name: b for b in (ReferenceBackend(), NoSpritesBackend(), NoOcclusionBackend())}


@dataclass
class EvalResult:
    backend: str
    score: PresenceScore
    ticks: int
    disagreements: list[tuple[PresenceKey, bool, bool]]  # key, truth, predicted


def evaluate_rollout(lines, backend, view: ViewConfig | None = None) -> EvalResult:
    """Replay a log, render every (tick, viewer) frame, score presence."""
    material = list(lines)
    header, tick_docs, _ = read_log_lines(material)
    use_view = view if view is not None else header.view
    truth: PresenceLabels = {}
    predicted: PresenceLabels = {}

    def on_tick(state: WorldState, _events) -> None:
        active = active_players(state)
        for viewer in active:
            opponents = [o for o in active if o.id != viewer.id]
            if not opponents:
                continue
            frame = backend.render_player(state, viewer.id, use_view)
            for opp in opponents:
                key = (state.tick, viewer.id, opp.id)
                truth[key] = is_visible(
                    state.map,
                    viewer.pose,
                    (opp.pose.x, opp.pose.y),
                    fov=use_view.fov,
                    max_range=use_view.max_range,
                )
                predicted[key] = frame_presence_detector(frame, palette_color(opp.id))

    replay_from_log(material, on_tick=on_tick)
    score = presence_score(predicted, truth)
    disagreements = sorted(
        (key, truth[key], predicted[key]) for key in truth if truth[key] != predicted[key]
    )
    return EvalResult(backend.name, score, len(tick_docs), disagreements)


def format_report(result: EvalResult) -> str:
    def ratio(value: float | None) -> str:
        return "n/a" if value is None else f"{value:.6f}"

    s = result.score
    lines = [
        "presence evaluation",
        f"backend: {result.backend}",
        f"ticks: {result.ticks}  labeled pairs: {s.total}",
        f"tp={s.tp} fp={s.fp} tn={s.tn} fn={s.fn}",
        f"accuracy={ratio(s.accuracy)}",
        f"precision={ratio(s.precision)}",
        f"recall={ratio(s.recall)}",
    ]
    if result.disagreements:
        lines.append(f"disagreements ({len(result.disagreements)}):")
        for (tick, viewer, opp), actual, guess in result.disagreements[:200]:
            lines.append(f"  tick {tick}: {viewer} vs {opp}: truth={actual} predicted={guess}")
    else:
        lines.append("disagreements: none")
    return "\n".join(lines) + "\n"
