"""CLI surface: exit codes, compile/replay determinism, eval commands."""

from __future__ import annotations

import json

import pytest

from stepcoach.cli import main

from conftest import DATA


def run_cli(capsys, *argv) -> tuple[int, str, str]:
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestCompile:
    def test_sample_compiles_to_committed_plan(self, tmp_path, capsys):
        out = tmp_path / "plan.json"
        code, _, _ = run_cli(
            capsys,
            "compile",
            "--backend", "mock",
            "--fixtures", str(DATA / "fixtures" / "sample_compile.json"),
            "--transcript", str(DATA / "sample" / "transcript.json"),
            "--metadata", str(DATA / "sample" / "metadata.json"),
            "--video", "data/sample/cookies.mp4",
            "--out", str(out),
        )
        assert code == 0
        assert out.read_text(encoding="utf-8") == (DATA / "sample" / "plan.json").read_text(
            encoding="utf-8"
        )

    def test_missing_transcript_exits_2(self, tmp_path, capsys):
        code, _, err = run_cli(
            capsys,
            "compile",
            "--transcript", str(tmp_path / "nope.json"),
            "--video", "v.mp4",
            "--out", str(tmp_path / "p.json"),
        )
        assert code == 2
        assert "not found" in err

    def test_unknown_flag_rejected(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["compile", "--frobnicate"])
        assert excinfo.value.code == 2


class TestReplay:
    def _replay(self, capsys):
        return run_cli(
            capsys,
            "replay",
            "--plan", str(DATA / "sample" / "plan_3step.json"),
            "--fixture", str(DATA / "fixtures" / "state_machine_replay.json"),
        )

    def test_stdout_matches_golden_log(self, capsys):
        code, out, _ = self._replay(capsys)
        assert code == 0
        golden = (DATA / "golden" / "state_machine_events.jsonl").read_text(encoding="utf-8")
        assert out == golden

    def test_two_replays_identical(self, capsys):
        _, first, _ = self._replay(capsys)
        _, second, _ = self._replay(capsys)
        assert first == second

    def test_missing_fixture_exits_2(self, tmp_path, capsys):
        code, _, err = run_cli(
            capsys,
            "replay",
            "--plan", str(DATA / "sample" / "plan_3step.json"),
            "--fixture", str(tmp_path / "missing.json"),
        )
        assert code == 2


class TestEval:
    def test_monitor_table_lists_present_action_types(self, tmp_path, capsys):
        code, out, _ = run_cli(
            capsys,
            "eval-monitor",
            "--labels", str(DATA / "eval" / "frame_labels.csv"),
            "--verdicts", str(DATA / "eval" / "toy_verdicts.json"),
            "--out-prefix", str(tmp_path / "monitor"),
        )
        assert code == 0
        assert "| Punctual |" in out
        assert "| Iterative |" in out
        assert "| Durative |" in out
        assert (tmp_path / "monitor.json").exists()
        assert (tmp_path / "monitor.md").exists()
        payload = json.loads((tmp_path / "monitor.json").read_text(encoding="utf-8"))
        assert payload["total_frames"] == 12

    def test_desc_summary_lines(self, tmp_path, capsys):
        code, out, _ = run_cli(
            capsys,
            "eval-desc",
            "--data", str(DATA / "eval" / "desc_cases.jsonl"),
            "--out-prefix", str(tmp_path / "desc"),
        )
        assert code == 0
        assert "case 0: new=1 missed=1" in out
        assert (tmp_path / "desc.json").exists()


class TestKbIngest:
    def test_cooking_manifest_builds_store(self, tmp_path, capsys):
        store = tmp_path / "cooking.jsonl"
        code, out, _ = run_cli(
            capsys,
            "kb-ingest",
            "--manifest", str(DATA / "corpora" / "cooking" / "manifest.txt"),
            "--store", str(store),
        )
        assert code == 0
        lines = [l for l in store.read_text(encoding="utf-8").splitlines() if l]
        assert len(lines) >= 4
        record = json.loads(lines[0])
        assert set(record) >= {"chunk_id", "source", "modality", "text", "embedding"}


class TestFixtureSync:
    """Committed data/ assets must match regeneration from fixturegen."""

    def test_sample_fixtures_in_sync(self, tmp_path):
        from stepcoach.compiler import compile_plan
        from stepcoach.config import Config
        from stepcoach.fixturegen import (
            SAMPLE_DURATION,
            SAMPLE_METADATA,
            SAMPLE_TITLE,
            SAMPLE_VIDEO_ID,
            recording_gateway,
            sample_transcript_payload,
            sample_words,
        )
        from stepcoach.frames import SyntheticFrameSource

        committed = json.loads((DATA / "fixtures" / "sample_compile.json").read_text())
        gateway, backend = recording_gateway()
        plan = compile_plan(
            sample_words(),
            gateway,
            SyntheticFrameSource(SAMPLE_VIDEO_ID, SAMPLE_DURATION),
            SAMPLE_TITLE,
            SAMPLE_METADATA,
            Config(),
        )
        assert backend.recorded == committed
        assert plan.dumps() == (DATA / "sample" / "plan.json").read_text(encoding="utf-8")
        transcript = json.loads((DATA / "sample" / "transcript.json").read_text())
        assert transcript == sample_transcript_payload()
