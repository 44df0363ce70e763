import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from poegen.cli import main
from poegen.config import PRESETS, ConfigError, load_run_config
from poegen.toydata import data_path


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """Trained toy models plus data files copied into one directory."""
    root = tmp_path_factory.mktemp("cli")
    runner = CliRunner()
    result = runner.invoke(
        main,
        [
            "train",
            "--corpus", str(data_path("toy_corpus.txt")),
            "--labeled", str(data_path("toy_sentiment.tsv")),
            "--out", str(root / "models"),
        ],
    )
    assert result.exit_code == 0, result.output
    neg = [
        line.split("\t", 1)[1]
        for line in data_path("toy_sentiment.tsv").read_text().splitlines()
        if line.startswith("0\t")
    ]
    (root / "sources.txt").write_text("\n".join(neg[:10]) + "\n")
    return root


def write_config(root, name, payload):
    path = root / name
    payload = {"models_dir": str(root / "models"), "out_dir": str(root / name.replace(".json", "_out")), **payload}
    path.write_text(json.dumps(payload))
    return path


GEN_EXPERTS = [
    {"kind": "mlm", "weight": 1.0},
    {"kind": "discriminator", "weight": 40.0, "target": 1},
]
REV_EXPERTS = GEN_EXPERTS + [{"kind": "hamming", "weight": 50.0}]


def test_train_writes_three_model_files(workspace):
    models = workspace / "models"
    assert (models / "vocab.txt").is_file()
    assert (models / "neighbor_mlm.json").is_file()
    assert (models / "classifier.json").is_file()


def test_train_missing_file_exits_2_and_names_path():
    runner = CliRunner()
    result = runner.invoke(
        main,
        ["train", "--corpus", "/no/such/file.txt", "--labeled", "/also/missing.tsv", "--out", "/tmp/x"],
    )
    assert result.exit_code == 2
    assert "/no/such/file.txt" in result.output


def test_train_rejects_nonpositive_k(workspace):
    runner = CliRunner()
    result = runner.invoke(
        main,
        [
            "train",
            "--corpus", str(data_path("toy_corpus.txt")),
            "--labeled", str(data_path("toy_sentiment.tsv")),
            "--k", "0",
            "--out", str(workspace / "unused"),
        ],
    )
    assert result.exit_code == 2
    assert "k must be > 0" in result.output


def test_generate_writes_samples_and_report(workspace):
    config = write_config(
        workspace,
        "gen.json",
        {
            "task": "generate",
            "prompts": ["the food"],
            "length": 8,
            "samples_per_prompt": 4,
            "epochs": 5,
            "seed": 1,
            "target_class": 1,
            "experts": GEN_EXPERTS,
        },
    )
    runner = CliRunner()
    result = runner.invoke(main, ["generate", "--config", str(config), "--trace"])
    assert result.exit_code == 0, result.output
    out = workspace / "gen_out"
    samples = (out / "samples.txt").read_text().splitlines()
    assert len(samples) == 4
    assert all(s.startswith("the food ") for s in samples)
    report = json.loads((out / "report.json").read_text())
    assert 0.0 <= report["internal_classifier_rate"] <= 1.0
    assert report["mean_hamming_to_source"] is None
    traces = sorted((out / "traces").iterdir())
    assert len(traces) == 4
    header = traces[0].read_text().splitlines()[0]
    assert header == "step,position,old_id,new_id,delta_e,accept_prob,accepted,total_e"


def test_generate_deterministic_across_runs(workspace, tmp_path):
    config = write_config(
        workspace,
        "gen_det.json",
        {
            "task": "generate",
            "prompts": ["the service"],
            "length": 8,
            "samples_per_prompt": 3,
            "epochs": 4,
            "seed": 9,
            "target_class": 1,
            "experts": GEN_EXPERTS,
        },
    )
    runner = CliRunner()
    outs = []
    for run in range(2):
        out = tmp_path / f"run{run}"
        result = runner.invoke(
            main, ["generate", "--config", str(config), "--out", str(out), "--trace"]
        )
        assert result.exit_code == 0, result.output
        outs.append(out)
    a, b = outs
    assert (a / "samples.txt").read_bytes() == (b / "samples.txt").read_bytes()
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
    for f in sorted((a / "traces").iterdir()):
        assert f.read_bytes() == (b / "traces" / f.name).read_bytes()


def test_revise_reports_hamming_and_bleu(workspace):
    config = write_config(
        workspace,
        "rev.json",
        {
            "task": "revise",
            "source_file": str(workspace / "sources.txt"),
            "epochs": 6,
            "seed": 2,
            "target_class": 1,
            "experts": REV_EXPERTS,
        },
    )
    runner = CliRunner()
    result = runner.invoke(main, ["revise", "--config", str(config)])
    assert result.exit_code == 0, result.output
    report = json.loads((workspace / "rev_out" / "report.json").read_text())
    assert report["mean_hamming_to_source"] is not None
    assert 0.0 < report["corpus_bleu"] <= 1.0
    samples = (workspace / "rev_out" / "samples.txt").read_text().splitlines()
    assert len(samples) == 10


def test_revise_verb_replace_touches_at_most_one_position(workspace):
    config = write_config(
        workspace,
        "verb.json",
        {
            "task": "revise",
            "source_file": str(workspace / "sources.txt"),
            "epochs": 10,
            "seed": 3,
            "target_class": 1,
            "revisable_positions": [3],
            "experts": GEN_EXPERTS,
        },
    )
    runner = CliRunner()
    result = runner.invoke(main, ["revise", "--config", str(config)])
    assert result.exit_code == 0, result.output
    sources = (workspace / "sources.txt").read_text().splitlines()
    outputs = (workspace / "verb_out" / "samples.txt").read_text().splitlines()
    for src, out in zip(sources, outputs):
        diffs = sum(a != b for a, b in zip(src.split(), out.split()))
        assert diffs <= 1


def test_config_errors_enumerated_before_side_effects(workspace, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(
        json.dumps(
            {
                "task": "nonsense",
                "models_dir": str(tmp_path / "nope"),
                "epochs": 0,
                "experts": [{"kind": "alien", "weight": 1.0}, {"kind": "lexicon", "weight": 2.0}],
                "out_dir": str(tmp_path / "never"),
            }
        )
    )
    runner = CliRunner()
    result = runner.invoke(main, ["generate", "--config", str(bad)])
    assert result.exit_code == 2
    for fragment in ("task must be", "missing model file", "epochs must be", "unknown kind", "lexicon expert needs"):
        assert fragment in result.output
    assert not (tmp_path / "never").exists()


def test_missing_config_file_exits_2():
    runner = CliRunner()
    result = runner.invoke(main, ["generate", "--config", "/no/config.json"])
    assert result.exit_code == 2
    assert "not found" in result.output


def test_runtime_failure_exits_1(workspace, tmp_path):
    # config validates (files exist) but a model file is corrupt
    models = tmp_path / "models"
    models.mkdir()
    for f in ("vocab.txt", "neighbor_mlm.json", "classifier.json"):
        (models / f).write_text((workspace / "models" / f).read_text())
    (models / "neighbor_mlm.json").write_text('{"kind": "neighbor_mlm", "broken": true}')
    config = tmp_path / "gen.json"
    config.write_text(
        json.dumps(
            {
                "task": "generate",
                "models_dir": str(models),
                "out_dir": str(tmp_path / "out"),
                "prompts": ["the food"],
                "target_class": 1,
                "experts": GEN_EXPERTS,
            }
        )
    )
    runner = CliRunner()
    result = runner.invoke(main, ["generate", "--config", str(config)])
    assert result.exit_code == 1


def test_preset_fills_experts_and_epochs(workspace):
    config = write_config(
        workspace,
        "preset.json",
        {
            "task": "generate",
            "prompts": ["the pizza"],
            "length": 8,
            "samples_per_prompt": 2,
            "seed": 5,
            "target_class": 1,
        },
    )
    loaded = load_run_config(config, preset="prompted-sentiment")
    assert loaded.epochs == 15
    weights = {e.kind: e.weight for e in loaded.experts}
    assert weights == {"mlm": 1.0, "discriminator": 40.0}

    runner = CliRunner()
    result = runner.invoke(
        main, ["generate", "--config", str(config), "--preset", "prompted-sentiment"]
    )
    assert result.exit_code == 0, result.output


def test_config_overrides_preset_weight(workspace):
    config = write_config(
        workspace,
        "preset_override.json",
        {
            "task": "generate",
            "prompts": ["the pizza"],
            "samples_per_prompt": 2,
            "target_class": 1,
            "experts": [{"kind": "discriminator", "weight": 7.5}],
        },
    )
    loaded = load_run_config(config, preset="prompted-sentiment")
    weights = {e.kind: e.weight for e in loaded.experts}
    assert weights["discriminator"] == 7.5
    assert weights["mlm"] == 1.0


def test_unknown_preset_rejected(workspace):
    config = write_config(workspace, "p2.json", {"task": "generate", "prompts": ["the food"], "experts": GEN_EXPERTS})
    with pytest.raises(ConfigError, match="unknown preset"):
        load_run_config(config, preset="mystery")


def test_all_shipped_presets_have_positive_weights():
    for name, preset in PRESETS.items():
        assert preset["epochs"] >= 1
        for expert in preset["experts"]:
            assert expert["weight"] > 0, name


def test_remote_expert_flag_parsing(workspace):
    config = write_config(
        workspace,
        "remote_flag.json",
        {"task": "generate", "prompts": ["the food"], "target_class": 1, "experts": GEN_EXPERTS},
    )
    loaded = load_run_config(config, remote_experts=["http://localhost:8111:bert:2.5"])
    remote = [e for e in loaded.experts if e.kind == "remote"]
    assert len(remote) == 1
    assert remote[0].url == "http://localhost:8111"
    assert remote[0].name == "bert"
    assert remote[0].weight == 2.5

    with pytest.raises(ConfigError, match="url:name:weight"):
        load_run_config(config, remote_experts=["jibberish"])


def test_verify_tiny_passes():
    runner = CliRunner()
    result = runner.invoke(main, ["verify", "--scale", "tiny"])
    assert result.exit_code == 0, result.output
    lines = [l for l in result.output.splitlines() if l.startswith(("PASS", "FAIL"))]
    assert len(lines) == 5
    assert all(l.startswith("PASS") for l in lines)


def test_verify_rejects_unknown_scale():
    runner = CliRunner()
    result = runner.invoke(main, ["verify", "--scale", "galactic"])
    assert result.exit_code == 2
