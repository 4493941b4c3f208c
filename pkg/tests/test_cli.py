import json
from pathlib import Path

from multigen.cli import main
from multigen.frames import load_ppm
from multigen.levelgen import validate_map
from multigen.mapdata import load_map, map_to_text, save_map

from .conftest import box_map, chase_action, record_headless_session
from multigen.dynamics import MotionConfig


def run(argv):
    try:
        return main(argv)
    except SystemExit as exc:
        return exc.code


class TestGenMap:
    def test_single_room(self, tmp_path):
        out = tmp_path / "one.json"
        assert run(["gen-map", "--seed", "1", "--rooms", "1", "--out", str(out)]) == 0
        world_map = load_map(out)
        assert len(world_map.edges) == 4
        assert len(world_map.spawn_points) == 1

    def test_byte_identical_regeneration(self, tmp_path):
        a = tmp_path / "a.json"
        b = tmp_path / "b.json"
        assert run(["gen-map", "--seed", "5", "--out", str(a)]) == 0
        assert run(["gen-map", "--seed", "5", "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_batch_seeds_valid(self, tmp_path):
        for seed in range(5):
            out = tmp_path / f"m{seed}.json"
            assert run(["gen-map", "--seed", str(seed), "--rooms", "4", "--out", str(out)]) == 0
            assert validate_map(load_map(out)) == []

    def test_infeasible_spec_exit_code(self, tmp_path):
        code = run(
            ["gen-map", "--seed", "1", "--rooms", "500", "--extent", "20", "--out", str(tmp_path / "x.json")]
        )
        assert code == 2


class TestValidate:
    def test_valid_map(self, tmp_path):
        path = tmp_path / "m.json"
        save_map(box_map(), path)
        assert run(["validate", "--map", str(path)]) == 0

    def test_invalid_map_exit_2(self, tmp_path):
        path = tmp_path / "bad.json"
        doc = json.loads(map_to_text(box_map()))
        doc["edges"].append(doc["edges"][0])  # duplicate edge
        path.write_text(json.dumps(doc))
        assert run(["validate", "--map", str(path)]) == 2

    def test_missing_file_exit_2(self):
        assert run(["validate", "--map", "/nonexistent/m.json"]) == 2


class TestUsageErrors:
    def test_unknown_flag_rejected(self, capsys):
        assert run(["gen-map", "--seed", "1", "--out", "/tmp/x", "--bogus"]) == 1

    def test_unknown_subcommand_rejected(self):
        assert run(["frobnicate"]) == 1

    def test_missing_required_flag(self):
        assert run(["gen-map"]) == 1


class TestMinimap:
    def test_render(self, tmp_path):
        map_path = tmp_path / "m.json"
        save_map(box_map(), map_path)
        out = tmp_path / "m.ppm"
        assert run(["minimap", "--map", str(map_path), "--out", str(out), "--scale", "4"]) == 0
        frame = load_ppm(out)
        assert frame.width > 0 and frame.height > 0


class TestReplayCommand:
    def make_log(self, tmp_path) -> Path:
        motion = MotionConfig(respawn_delay=10)

        def policy(state):
            return {
                pid: chase_action(state, pid, other, motion)
                for pid, other in (("p1", "p2"), ("p2", "p1"))
                if state.players[pid].active
            }

        log = record_headless_session(box_map(), 4, motion, 120, policy)
        path = tmp_path / "session.log"
        path.write_text(log)
        return path

    def test_fresh_log_exit_0(self, tmp_path, capsys):
        path = self.make_log(tmp_path)
        assert run(["replay", "--log", str(path)]) == 0
        out = capsys.readouterr().out
        assert "final hash:" in out

    def test_corrupted_log_exit_2_with_tick(self, tmp_path, capsys):
        path = self.make_log(tmp_path)
        lines = path.read_text().splitlines()
        for i, line in enumerate(lines):
            doc = json.loads(line)
            if doc.get("type") == "tick" and any(a[0] != 0 for a in doc["actions"].values()):
                pid = next(p for p, a in doc["actions"].items() if a[0] != 0)
                doc["actions"][pid][0] *= -1
                lines[i] = json.dumps(doc, sort_keys=True)
                break
        path.write_text("\n".join(lines) + "\n")
        assert run(["replay", "--log", str(path)]) == 2
        err = capsys.readouterr().err
        assert "first differing tick" in err

    def test_tick_gap_exit_2(self, tmp_path, capsys):
        path = self.make_log(tmp_path)
        lines = [l for l in path.read_text().splitlines() if json.loads(l).get("tick") != 7]
        path.write_text("\n".join(lines) + "\n")
        assert run(["replay", "--log", str(path)]) == 2
        assert "contiguity" in capsys.readouterr().err


class TestEvalPresence:
    def test_reference_report(self, tmp_path, capsys):
        log_path = TestReplayCommand().make_log(tmp_path)
        out = tmp_path / "report.txt"
        assert run(["eval-presence", "--log", str(log_path), "--backend", "reference", "--out", str(out)]) == 0
        text = out.read_text()
        assert "accuracy=1.000000" in text
        assert "disagreements: none" in text

    def test_degraded_backend_flag(self, tmp_path, capsys):
        log_path = TestReplayCommand().make_log(tmp_path)
        assert run(["eval-presence", "--log", str(log_path), "--backend", "no-sprites"]) == 0
        assert "recall=0.000000" in capsys.readouterr().out


class TestRenderRollout:
    def test_empty_script_renders_tick_zero(self, tmp_path):
        map_path = tmp_path / "m.json"
        save_map(box_map(), map_path)
        script = tmp_path / "script.txt"
        script.write_text("")
        out_dir = tmp_path / "frames"
        assert run(["render-rollout", "--map", str(map_path), "--actions", str(script), "--out-dir", str(out_dir)]) == 0
        files = sorted(p.name for p in out_dir.iterdir())
        assert files == ["minimap_0000.ppm", "view_0000_p1.ppm"]

    def test_forward_walk_wall_growth(self, tmp_path):
        map_path = tmp_path / "m.json"
        save_map(box_map(), map_path)
        script = tmp_path / "script.txt"
        script.write_text("".join(f"{t} p1 1 0 0 0\n" for t in range(16)))
        out_dir = tmp_path / "frames"
        assert run(["render-rollout", "--map", str(map_path), "--actions", str(script), "--out-dir", str(out_dir)]) == 0

        def center_wall_height(tick):
            frame = load_ppm(out_dir / f"view_{tick:04d}_p1.ppm")
            col = frame.pixels[:, frame.width // 2]
            gray = (col[:, 0] == col[:, 1]) & (col[:, 1] == col[:, 2])
            return int(gray.sum())

        heights = [center_wall_height(t) for t in range(17)]
        assert all(b >= a for a, b in zip(heights, heights[1:]))
        assert heights[-1] > heights[0]

    def test_rerun_byte_identical(self, tmp_path):
        map_path = tmp_path / "m.json"
        save_map(box_map(), map_path)
        script = tmp_path / "script.txt"
        script.write_text("0 p1 1 0 1 0\n1 p1 1 0 0 0\n")
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        for out in (out_a, out_b):
            assert run(["render-rollout", "--map", str(map_path), "--actions", str(script), "--out-dir", str(out)]) == 0
        for name in sorted(p.name for p in out_a.iterdir()):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    def test_bad_script_line_reported(self, tmp_path, capsys):
        map_path = tmp_path / "m.json"
        save_map(box_map(), map_path)
        script = tmp_path / "script.txt"
        script.write_text("0 p1 1 0 0\n")
        assert run(["render-rollout", "--map", str(map_path), "--actions", str(script), "--out-dir", str(tmp_path / "f")]) == 2
        assert ":1:" in capsys.readouterr().err
