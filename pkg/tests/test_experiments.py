import json

import pytest

from phoneclass.errors import ConfigError, ContractError, PipelineError, TabulationError
from phoneclass.experiments.cli import main as cli_main
from phoneclass.experiments.config import config_from_dict, load_config, override_seed
from phoneclass.experiments.report import (
    load_report,
    render_table,
    render_text,
    tabulate_reports,
    validate_report,
    write_table_csv,
)
from phoneclass.experiments.runner import STAGES, RunPaths, run_experiment

SMALL_ENCODER = {
    "kind": "cnn",
    "conv_layers": [
        {"out_channels": 2, "kernel": [3, 3], "pool": [2, 2]},
        {"out_channels": 3, "kernel": [3, 3], "pool": [2, 2]},
    ],
}


def fast_config_dict(manifest, run_id="run1", **overrides):
    data = {
        "run_id": run_id,
        "manifest_path": str(manifest),
        "ratings_path": str(manifest.parent / "ratings.csv"),
        "encoder": SMALL_ENCODER,
        "training": {"epochs": 1, "batch_size": 64},
        "balancing": {"exclude_silence_from_minimum": True},
        "n_resamples": 25,
        "seed": 3,
    }
    data.update(overrides)
    return data


@pytest.fixture(scope="module")
def finished_run(tiny_corpus, tmp_path_factory):
    """One full pipeline run shared by the read-only assertions below."""
    out = tmp_path_factory.mktemp("finished_run")
    config = config_from_dict(fast_config_dict(tiny_corpus, out_dir=str(out)))
    run_dir = run_experiment(config)
    return config, run_dir


class TestConfigParsing:
    def test_unknown_key_rejected(self, tiny_corpus):
        with pytest.raises(ConfigError, match="epochz"):
            config_from_dict(fast_config_dict(tiny_corpus, epochz=3))

    def test_missing_required_keys(self):
        with pytest.raises(ConfigError, match="manifest_path"):
            config_from_dict({"run_id": "x"})

    def test_unsafe_run_id_rejected(self, tiny_corpus):
        with pytest.raises(ConfigError, match="run_id"):
            config_from_dict(fast_config_dict(tiny_corpus, run_id="../escape"))

    def test_bad_split_ratio(self, tiny_corpus):
        with pytest.raises(ConfigError, match="split_ratio"):
            config_from_dict(fast_config_dict(tiny_corpus, split_ratio=1.0))

    def test_bad_bootstrap_unit(self, tiny_corpus):
        with pytest.raises(ConfigError, match="bootstrap_unit"):
            config_from_dict(fast_config_dict(tiny_corpus, bootstrap_unit="utterance"))

    def test_relative_paths_resolve_against_config_dir(self, tiny_corpus, tmp_path):
        path = tmp_path / "config.json"
        data = fast_config_dict(tiny_corpus)
        data["manifest_path"] = "corpus/manifest.csv"
        path.write_text(json.dumps(data), encoding="utf-8")
        config = load_config(path)
        assert config.manifest_path == str(tmp_path / "corpus" / "manifest.csv")

    def test_run_seed_flows_into_subconfigs(self, tiny_corpus):
        config = config_from_dict(fast_config_dict(tiny_corpus, seed=42))
        assert config.training.seed == 42
        assert config.balancing.seed == 42

    def test_explicit_subconfig_seed_wins(self, tiny_corpus):
        data = fast_config_dict(tiny_corpus, seed=42)
        data["training"] = {"epochs": 1, "seed": 5}
        config = config_from_dict(data)
        assert config.training.seed == 5
        assert config.balancing.seed == 42

    def test_override_seed_reseeds_everything(self, tiny_corpus):
        config = config_from_dict(fast_config_dict(tiny_corpus, seed=1))
        reseeded = override_seed(config, 9)
        assert reseeded.seed == 9
        assert reseeded.training.seed == 9
        assert reseeded.balancing.seed == 9

    def test_sha_tracks_content(self, tiny_corpus):
        a = config_from_dict(fast_config_dict(tiny_corpus))
        b = config_from_dict(fast_config_dict(tiny_corpus))
        c = config_from_dict(fast_config_dict(tiny_corpus, seed=4))
        assert a.sha256() == b.sha256()
        assert a.sha256() != c.sha256()

    def test_invalid_json_named(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text("{broken", encoding="utf-8")
        with pytest.raises(ConfigError, match="line"):
            load_config(path)


class TestRunArtifacts:
    def test_every_stage_artifact_present(self, finished_run):
        _, run_dir = finished_run
        paths = RunPaths(run_dir=run_dir)
        for artifact in (
            paths.config_snapshot,
            paths.frames_all,
            paths.ingest_summary,
            paths.train_frames,
            paths.validation_frames,
            paths.balance_summary,
            paths.best_checkpoint,
            paths.train_summary,
            paths.predictions,
            paths.metrics,
            paths.correlations,
            paths.report_json,
            paths.report_text,
        ):
            assert artifact.exists(), artifact

    def test_state_lists_all_stages(self, finished_run):
        _, run_dir = finished_run
        state = json.loads((run_dir / "state.json").read_text(encoding="utf-8"))
        assert state["completed"] == list(STAGES)

    def test_lock_released(self, finished_run):
        _, run_dir = finished_run
        assert not (run_dir / "lock").exists()

    def test_metrics_content(self, finished_run):
        _, run_dir = finished_run
        metrics = json.loads(RunPaths(run_dir=run_dir).metrics.read_text(encoding="utf-8"))
        assert 0.0 <= metrics["micro_accuracy"] <= 1.0
        ci = metrics["balanced_accuracy"]
        assert ci["low"] <= ci["point"] <= ci["high"]
        assert set(metrics["confusion_groups"]) == {"obstruents", "oral_nasal"}

    def test_report_validates_and_renders(self, finished_run):
        _, run_dir = finished_run
        report = load_report(run_dir / "report.json")
        validate_report(report)
        text = render_text(report)
        assert "run1" in text
        assert "balanced accuracy" in text

    def test_report_schema_rejects_mutation(self, finished_run):
        _, run_dir = finished_run
        report = load_report(run_dir / "report.json")
        broken = json.loads(json.dumps(report))
        del broken["evaluation"]
        with pytest.raises(ContractError):
            validate_report(broken)

    def test_resume_skips_completed_stages(self, finished_run):
        config, run_dir = finished_run
        before = (run_dir / "report.json").stat().st_mtime_ns
        again = run_experiment(config)
        assert again == run_dir
        assert (run_dir / "report.json").stat().st_mtime_ns == before

    def test_changed_config_refused_without_force(self, finished_run, tiny_corpus):
        config, run_dir = finished_run
        changed = config_from_dict(
            fast_config_dict(tiny_corpus, out_dir=str(run_dir.parent), seed=99)
        )
        with pytest.raises(ConfigError, match="different config"):
            run_experiment(changed)

    def test_locked_run_refused(self, finished_run):
        config, run_dir = finished_run
        lock = run_dir / "lock"
        lock.write_text("12345", encoding="utf-8")
        try:
            with pytest.raises(PipelineError, match="locked"):
                run_experiment(config)
        finally:
            lock.unlink()

    def test_foreign_directory_refused(self, finished_run, tiny_corpus, tmp_path):
        not_a_run = tmp_path / "keep" / "precious"
        not_a_run.mkdir(parents=True)
        (not_a_run / "data.txt").write_text("do not delete", encoding="utf-8")
        config = config_from_dict(
            fast_config_dict(tiny_corpus, run_id="precious", out_dir=str(tmp_path / "keep"))
        )
        with pytest.raises(ConfigError, match="not a run directory"):
            run_experiment(config, force=True)
        assert (not_a_run / "data.txt").exists()


class TestPartialRuns:
    def test_through_stage_stops_early(self, tiny_corpus, tmp_path):
        config = config_from_dict(
            fast_config_dict(tiny_corpus, run_id="partial", out_dir=str(tmp_path))
        )
        run_dir = run_experiment(config, through_stage="balance")
        paths = RunPaths(run_dir=run_dir)
        assert paths.balance_summary.exists()
        assert not paths.best_checkpoint.exists()
        state = json.loads(paths.state.read_text(encoding="utf-8"))
        assert state["completed"] == ["ingest", "balance"]

    def test_unknown_stage_rejected(self, tiny_corpus, tmp_path):
        config = config_from_dict(fast_config_dict(tiny_corpus, out_dir=str(tmp_path)))
        with pytest.raises(ConfigError, match="stage"):
            run_experiment(config, through_stage="deploy")

    def test_correlate_skips_without_ratings(self, tiny_corpus, tmp_path):
        data = fast_config_dict(tiny_corpus, run_id="norate", out_dir=str(tmp_path))
        data.pop("ratings_path")
        run_dir = run_experiment(config_from_dict(data))
        correlations = json.loads(
            RunPaths(run_dir=run_dir).correlations.read_text(encoding="utf-8")
        )
        assert correlations["skipped"] is True
        report = load_report(run_dir / "report.json")
        validate_report(report)


class TestTabulate:
    def _fake_report(self, run_id, point, low, high):
        return {
            "run_id": run_id,
            "evaluation": {
                "balanced_accuracy": {
                    "point": point,
                    "low": low,
                    "high": high,
                    "half_width": (high - low) / 2,
                    "n_resamples": 100,
                    "alpha": 0.05,
                    "seed": 0,
                    "unit": "frame",
                },
            },
        }

    def test_rows_sorted_and_flagged(self):
        rows = tabulate_reports(
            [
                self._fake_report("low", 0.4, 0.35, 0.45),
                self._fake_report("high", 0.7, 0.65, 0.75),
            ]
        )
        assert [r.run_id for r in rows] == ["high", "low"]
        assert rows[0].significantly_best and not rows[1].significantly_best

    def test_overlap_clears_flag(self):
        rows = tabulate_reports(
            [
                self._fake_report("a", 0.50, 0.42, 0.58),
                self._fake_report("b", 0.52, 0.44, 0.60),
            ]
        )
        assert not any(r.significantly_best for r in rows)

    def test_duplicate_run_ids_rejected(self):
        r = self._fake_report("same", 0.5, 0.4, 0.6)
        with pytest.raises(TabulationError, match="run_id"):
            tabulate_reports([r, r])

    def test_needs_two_reports(self):
        with pytest.raises(TabulationError):
            tabulate_reports([self._fake_report("only", 0.5, 0.4, 0.6)])

    def test_render_and_csv(self, tmp_path):
        rows = tabulate_reports(
            [
                self._fake_report("low", 0.4, 0.35, 0.45),
                self._fake_report("high", 0.7, 0.65, 0.75),
            ]
        )
        table = render_table(rows)
        assert "high" in table and "*" in table
        csv_path = tmp_path / "summary.csv"
        write_table_csv(csv_path, rows)
        lines = csv_path.read_text(encoding="utf-8").strip().splitlines()
        assert len(lines) == 3


class TestCli:
    def test_report_command_prints_summary(self, tiny_corpus, tmp_path, capsys):
        config_path = tmp_path / "config.json"
        config_path.write_text(
            json.dumps(fast_config_dict(tiny_corpus, run_id="cli", out_dir=str(tmp_path / "runs"))),
            encoding="utf-8",
        )
        code = cli_main(["report", "--config", str(config_path)])
        captured = capsys.readouterr()
        assert code == 0
        assert "report: done" in captured.out
        assert "balanced accuracy" in captured.out

    def test_missing_config_exits_2(self, capsys):
        code = cli_main(["train", "--config", "/nonexistent/config.json"])
        assert code == 2
        assert "config error" in capsys.readouterr().err

    def test_bad_manifest_exits_3(self, tmp_path, capsys):
        config_path = tmp_path / "config.json"
        config_path.write_text(
            json.dumps(
                {
                    "run_id": "bad",
                    "manifest_path": str(tmp_path / "missing_manifest.csv"),
                    "out_dir": str(tmp_path / "runs"),
                }
            ),
            encoding="utf-8",
        )
        code = cli_main(["ingest", "--config", str(config_path)])
        assert code == 3
        assert "data error" in capsys.readouterr().err

    def test_seed_override_changes_run(self, tiny_corpus, tmp_path):
        config_path = tmp_path / "config.json"
        config_path.write_text(
            json.dumps(fast_config_dict(tiny_corpus, run_id="seeded", out_dir=str(tmp_path / "runs"))),
            encoding="utf-8",
        )
        assert cli_main(["balance", "--config", str(config_path), "--seed", "11"]) == 0
        snapshot = json.loads(
            (tmp_path / "runs" / "seeded" / "config.json").read_text(encoding="utf-8")
        )
        assert snapshot["seed"] == 11

    def test_out_flag_overrides_config_out_dir(self, tiny_corpus, tmp_path):
        config_path = tmp_path / "config.json"
        config_path.write_text(
            json.dumps(fast_config_dict(tiny_corpus, run_id="moved", out_dir=str(tmp_path / "runs"))),
            encoding="utf-8",
        )
        elsewhere = tmp_path / "elsewhere"
        assert cli_main(["ingest", "--config", str(config_path), "--out", str(elsewhere)]) == 0
        assert (elsewhere / "moved" / "frames_all.csv").exists()
        assert not (tmp_path / "runs").exists()

    def test_grid_runs_variants_and_tabulates(self, tiny_corpus, tmp_path, capsys):
        base = fast_config_dict(tiny_corpus, out_dir=str(tmp_path / "runs"))
        del base["run_id"]
        grid = {
            "base": base,
            "variants": [
                {"run_id": "g1"},
                {"run_id": "g2", "seed": 8, "training": {"epochs": 2}},
            ],
        }
        config_path = tmp_path / "grid.json"
        config_path.write_text(json.dumps(grid), encoding="utf-8")
        assert cli_main(["grid", "--config", str(config_path)]) == 0
        out = capsys.readouterr().out
        assert "grid: finished g1" in out and "grid: finished g2" in out
        assert (tmp_path / "runs" / "grid_summary.csv").exists()
        assert (tmp_path / "runs" / "grid_summary.txt").exists()
        # variant merge went one level deep: g2 kept the base batch size
        snapshot = json.loads((tmp_path / "runs" / "g2" / "config.json").read_text(encoding="utf-8"))
        assert snapshot["training"]["epochs"] == 2
        assert snapshot["training"]["batch_size"] == 64
        assert snapshot["seed"] == 8

    def test_grid_rejects_single_variant(self, tiny_corpus, tmp_path, capsys):
        base = fast_config_dict(tiny_corpus, out_dir=str(tmp_path / "runs"))
        del base["run_id"]
        config_path = tmp_path / "grid.json"
        config_path.write_text(
            json.dumps({"base": base, "variants": [{"run_id": "only"}]}), encoding="utf-8"
        )
        assert cli_main(["grid", "--config", str(config_path)]) == 2
        assert "two variants" in capsys.readouterr().err


class TestDeterminism:
    def test_report_json_byte_identical_across_reruns(self, tiny_corpus, tmp_path):
        config = config_from_dict(
            fast_config_dict(tiny_corpus, run_id="det", out_dir=str(tmp_path))
        )
        run_dir = run_experiment(config)
        first = (run_dir / "report.json").read_bytes()
        run_experiment(config, force=True)
        second = (run_dir / "report.json").read_bytes()
        assert first == second
