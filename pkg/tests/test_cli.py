import json

import pytest

from nessbench.cli import (
    EXIT_DATA,
    EXIT_NUMERICAL,
    EXIT_USAGE,
    load_config,
    load_matrix,
    main,
    parse_config_text,
)
from nessbench.trainer import ConfigError


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    data, split = root / "data", root / "split"
    assert main(["--seed", "2", "--out", str(data), "synth", "--blocks", "30,30", "--intra-p", "0.2",
                 "--inter-p", "0.01", "--feature-dim", "6", "--noise", "0.5"]) == 0
    assert main(["--seed", "2", "--out", str(split), "split", "--data", str(data), "--k", "2"]) == 0
    run = root / "run"
    assert main(["--out", str(run), "train", "--data", str(data), "--split", str(split / "split.json"),
                 "--set", "k=2", "--set", "max_epochs=15"]) == 0
    return root


def _common(ws):
    return ["--data", str(ws / "data"), "--split", str(ws / "split" / "split.json")]


class TestConfigFiles:
    def test_parse_types_and_comments(self):
        values = parse_config_text("mode = ness  # static\nk=8\nlr = 0.005\nbias = true\n\n# done\n")
        assert values == {"mode": "ness", "k": 8, "lr": 0.005, "bias": True}

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="lerning_rate"):
            parse_config_text("lerning_rate = 1")

    def test_bad_value_reports_line(self):
        with pytest.raises(ConfigError, match="k"):
            parse_config_text("mode = ness\nk = four\n")

    def test_missing_equals(self):
        with pytest.raises(ConfigError, match=":2:"):
            parse_config_text("mode = ness\nk 4\n")

    def test_overrides_win(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("k = 2\nencoder = lin\n")
        cfg = load_config(path, ["k=8"])
        assert (cfg.k, cfg.encoder) == (8, "lin")

    def test_matrix_sections(self, tmp_path):
        path = tmp_path / "m.ini"
        path.write_text("[sgae]\nmode = sgae\n\n[ness4]\nmode = ness\nk = 4\n")
        matrix = load_matrix(path)
        assert [(n, c.label) for n, c in matrix] == [("sgae", "SGAE"), ("ness4", "NESS4")]


class TestSplitCommand:
    def test_same_seed_same_bytes(self, workspace, tmp_path):
        args = ["--seed", "2", "--out", str(tmp_path), "split", "--data", str(workspace / "data"), "--k", "2"]
        assert main(args) == 0
        assert (tmp_path / "split.json").read_bytes() == (workspace / "split" / "split.json").read_bytes()

    def test_k1_single_block(self, workspace, tmp_path):
        assert main(["--out", str(tmp_path), "split", "--data", str(workspace / "data"), "--k", "1"]) == 0
        doc = json.loads((tmp_path / "split.json").read_text())
        assert len(doc["partition"]) == 1 and sorted(doc["partition"][0]) == sorted(doc["train"])

    def test_bad_ratios(self, workspace, tmp_path):
        rc = main(["--out", str(tmp_path), "split", "--data", str(workspace / "data"), "--ratios", "0.9,0.1"])
        assert rc == EXIT_USAGE


class TestTrainCommand:
    def test_artifacts(self, workspace):
        run = workspace / "run"
        assert {p.name for p in run.iterdir()} >= {"model.ckpt", "metrics.csv", "manifest.json", "training.png"}
        header = (run / "metrics.csv").read_text().splitlines()[0]
        assert header == "epoch,L_t,L_r,L_c,val_loss,val_auc,wall_ms"
        manifest = json.loads((run / "manifest.json").read_text())
        assert manifest["config"]["k"] == 2 and manifest["partition_source"] == "split"
        assert len(manifest["dataset"]["sha256"]) == 64

    def test_invalid_mode_is_usage_error(self, workspace, tmp_path):
        rc = main(["--out", str(tmp_path), "train", *_common(workspace), "--set", "mode=bogus"])
        assert rc == EXIT_USAGE

    def test_missing_subcommand(self, capsys):
        assert main([]) == EXIT_USAGE

    def test_missing_split_file(self, workspace, tmp_path):
        rc = main(["--out", str(tmp_path), "train", "--data", str(workspace / "data"), "--split", str(tmp_path / "x")])
        assert rc == EXIT_DATA

    def test_divergence_exit_code(self, workspace, tmp_path):
        rc = main(["--out", str(tmp_path), "train", *_common(workspace), "--set", "mode=sgae",
                   "--set", "encoder=lin", "--set", "lr=1e200", "--set", "max_epochs=5"])
        assert rc == EXIT_NUMERICAL

    def test_sgae_same_artifact_shapes(self, workspace, tmp_path):
        rc = main(["--out", str(tmp_path), "train", *_common(workspace), "--set", "mode=sgae",
                   "--set", "max_epochs=5", "--no-figures"])
        assert rc == 0
        assert {p.name for p in tmp_path.iterdir()} == {"model.ckpt", "metrics.csv", "manifest.json"}

    def test_seed_flag_overrides_config(self, workspace, tmp_path):
        rc = main(["--seed", "11", "--out", str(tmp_path), "train", *_common(workspace), "--set", "max_epochs=3",
                   "--set", "k=2", "--no-figures"])
        assert rc == 0
        assert json.loads((tmp_path / "manifest.json").read_text())["config"]["seed"] == 11

    def test_threads_env_fallback(self, workspace, tmp_path, monkeypatch):
        monkeypatch.setenv("NESSBENCH_THREADS", "zero")
        rc = main(["--out", str(tmp_path), "train", *_common(workspace), "--set", "max_epochs=2"])
        assert rc == EXIT_USAGE


class TestEvalCommand:
    def test_report_and_determinism(self, workspace, tmp_path):
        args = ["eval", *_common(workspace), "--checkpoint", str(workspace / "run" / "model.ckpt")]
        assert main(["--out", str(tmp_path / "a"), *args]) == 0
        assert main(["--out", str(tmp_path / "b"), *args]) == 0
        a = (tmp_path / "a" / "eval.json").read_bytes()
        assert a == (tmp_path / "b" / "eval.json").read_bytes()
        doc = json.loads(a)
        assert 0.0 <= doc["auc"] <= 1.0 and 0.0 <= doc["ap"] <= 1.0

    def test_tampered_checkpoint_rejected(self, workspace, tmp_path):
        ckpt = tmp_path / "model.ckpt"
        raw = bytearray((workspace / "run" / "model.ckpt").read_bytes())
        raw[-3] ^= 0x40
        ckpt.write_bytes(bytes(raw))
        rc = main(["--out", str(tmp_path), "eval", *_common(workspace), "--checkpoint", str(ckpt)])
        assert rc == EXIT_DATA

    def test_manifest_hash_checked(self, workspace, tmp_path):
        manifest = json.loads((workspace / "run" / "manifest.json").read_text())
        manifest["outputs"]["checkpoint"]["sha256"] = "0" * 64
        path = tmp_path / "manifest.json"
        path.write_text(json.dumps(manifest))
        rc = main(["--out", str(tmp_path), "eval", *_common(workspace), "--checkpoint",
                   str(workspace / "run" / "model.ckpt"), "--manifest", str(path)])
        assert rc == EXIT_DATA


class TestAnalyzeCommand:
    def test_outputs(self, workspace, tmp_path):
        args = ["analyze", *_common(workspace), "--checkpoint", str(workspace / "run" / "model.ckpt")]
        assert main(["--out", str(tmp_path / "a"), *args]) == 0
        assert main(["--out", str(tmp_path / "b"), *args, "--no-figures"]) == 0
        doc = json.loads((tmp_path / "a" / "analysis.json").read_text())
        assert set(doc) >= {"fig3a", "fig3b", "fig3c", "fig4a", "fig5"}
        assert (tmp_path / "a" / "analysis.png").stat().st_size > 0
        for name in ("analysis.json", "analysis.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_subset(self, workspace, tmp_path):
        rc = main(["--out", str(tmp_path), "analyze", *_common(workspace), "--checkpoint",
                   str(workspace / "run" / "model.ckpt"), "--analyses", "fig4a"])
        assert rc == 0
        doc = json.loads((tmp_path / "analysis.json").read_text())
        assert "fig4a" in doc and "fig3a" not in doc

    def test_unknown_analysis(self, workspace, tmp_path):
        rc = main(["--out", str(tmp_path), "analyze", *_common(workspace), "--checkpoint",
                   str(workspace / "run" / "model.ckpt"), "--analyses", "fig9"])
        assert rc == EXIT_USAGE


class TestCompareCommand:
    def test_counts_and_duplicates(self, workspace, tmp_path):
        matrix = tmp_path / "m.ini"
        matrix.write_text("[a]\nmode = ness\nk = 2\nmax_epochs = 6\n\n[b]\nmode = ness\nk = 2\nmax_epochs = 6\n")
        rc = main(["--out", str(tmp_path / "out"), "compare", "--data", str(workspace / "data"),
                   "--matrix", str(matrix), "--seeds", "0,1,2"])
        assert rc == 0
        runs = (tmp_path / "out" / "runs.csv").read_text().splitlines()
        summary = (tmp_path / "out" / "summary.csv").read_text().splitlines()
        assert len(runs) == 1 + 6 and len(summary) == 1 + 2
        assert summary[1].split(",")[1:] == summary[2].split(",")[1:]
        assert (tmp_path / "out" / "compare.png").exists()

    def test_worker_pool_matches_serial(self, workspace, tmp_path):
        matrix = tmp_path / "m.ini"
        matrix.write_text("[sgae]\nmode = sgae\nmax_epochs = 4\n[ness]\nmode = ness\nk = 2\nmax_epochs = 4\n")
        base = ["compare", "--data", str(workspace / "data"), "--matrix", str(matrix), "--seeds", "0,1", "--no-figures"]
        assert main(["--out", str(tmp_path / "serial"), *base]) == 0
        assert main(["--threads", "2", "--out", str(tmp_path / "pool"), *base]) == 0
        for name in ("runs.csv", "summary.csv"):
            assert (tmp_path / "serial" / name).read_bytes() == (tmp_path / "pool" / name).read_bytes()

    def test_empty_matrix(self, workspace, tmp_path):
        matrix = tmp_path / "m.ini"
        matrix.write_text("# nothing\n")
        rc = main(["--out", str(tmp_path), "compare", "--data", str(workspace / "data"), "--matrix", str(matrix)])
        assert rc == EXIT_USAGE
