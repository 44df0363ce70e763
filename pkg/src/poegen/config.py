"""Run configuration files, named presets, and total validation.

A run config is a JSON object naming the task, the trained model files, the
expert stack with weights, and the sampling parameters. Validation collects
every problem before anything is sampled or written.

Presets bundle the shipped weight sets; config keys always win over preset
keys, and command-line flags win over both.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

EXPERT_KINDS = {"mlm", "discriminator", "hamming", "fuzzy", "lexicon", "remote"}

# Named weight bundles. "disc"/"hamming"/"fuzzy"/"lexicon" are the weights on
# the matching experts; the masked-LM fluency term always carries weight 1
# unless a config overrides it.
PRESETS: dict[str, dict] = {
    "prompted-sentiment": {
        "task": "generate",
        "epochs": 15,
        "experts": [
            {"kind": "mlm", "weight": 1.0},
            {"kind": "discriminator", "weight": 40.0},
        ],
    },
    "sentiment-disc-up": {
        "task": "revise",
        "epochs": 8,
        "experts": [
            {"kind": "mlm", "weight": 1.0},
            {"kind": "discriminator", "weight": 100.0},
            {"kind": "hamming", "weight": 25.0},
        ],
    },
    "sentiment-hamming-up": {
        "task": "revise",
        "epochs": 8,
        "experts": [
            {"kind": "mlm", "weight": 1.0},
            {"kind": "discriminator", "weight": 100.0},
            {"kind": "hamming", "weight": 50.0},
        ],
    },
    "agency": {
        "task": "revise",
        "epochs": 8,
        "experts": [
            {"kind": "mlm", "weight": 1.0},
            {"kind": "discriminator", "weight": 100.0},
            {"kind": "hamming", "weight": 50.0},
            {"kind": "lexicon", "weight": 100.0},
        ],
    },
    "formality-disc-up": {
        "task": "revise",
        "epochs": 5,
        "experts": [
            {"kind": "mlm", "weight": 1.0},
            {"kind": "discriminator", "weight": 140.0},
            {"kind": "hamming", "weight": 15.0},
            {"kind": "fuzzy", "weight": 100.0},
        ],
    },
    "formality-fuzzy-up": {
        "task": "revise",
        "epochs": 5,
        "experts": [
            {"kind": "mlm", "weight": 1.0},
            {"kind": "discriminator", "weight": 140.0},
            {"kind": "hamming", "weight": 50.0},
            {"kind": "fuzzy", "weight": 300.0},
        ],
    },
}

DEFAULT_SAMPLES_PER_PROMPT = 20


class ConfigError(ValueError):
    """Invalid run configuration; message lists every problem found."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("invalid config:\n" + "\n".join(f"  - {p}" for p in self.problems))


@dataclass
class ExpertSpec:
    kind: str
    weight: float
    target: int | None = None
    lexicon: str | None = None
    embeddings: str | None = None
    url: str | None = None
    name: str | None = None


@dataclass
class RunConfig:
    task: str
    models_dir: str
    out_dir: str
    experts: list[ExpertSpec]
    epochs: int = 8
    seed: int = 0
    length: int = 8
    samples_per_prompt: int = DEFAULT_SAMPLES_PER_PROMPT
    prompts: list[str] = field(default_factory=list)
    source_file: str | None = None
    target_class: int | None = None
    revisable_positions: list[int] | None = None
    frozen_positions: list[int] | None = None
    position_order: str = "random-permutation"
    trace: bool = False
    remote_proposal: dict | None = None
    base_dir: Path = field(default_factory=Path)

    def resolve(self, p: str | Path) -> Path:
        """Paths in a config file are relative to the file's directory."""
        p = Path(p)
        return p if p.is_absolute() else self.base_dir / p


def _merge_preset(raw: dict, preset_name: str | None) -> dict:
    if preset_name is None:
        return raw
    if preset_name not in PRESETS:
        raise ConfigError(
            [f"unknown preset {preset_name!r}; available: {', '.join(sorted(PRESETS))}"]
        )
    merged = dict(PRESETS[preset_name])
    for key, value in raw.items():
        if key == "experts" and "experts" in merged:
            # Config expert entries override the preset entry of the same
            # kind; new kinds are appended.
            by_kind = {e["kind"]: dict(e) for e in merged["experts"]}
            for entry in value:
                if entry.get("kind") in by_kind:
                    by_kind[entry["kind"]].update(entry)
                else:
                    by_kind[entry.get("kind", f"_{len(by_kind)}")] = dict(entry)
            merged["experts"] = list(by_kind.values())
        else:
            merged[key] = value
    return merged


def load_run_config(
    path: str | Path,
    preset: str | None = None,
    seed: int | None = None,
    out_dir: str | None = None,
    trace: bool | None = None,
    remote_experts: list[str] = (),
    task_override: str | None = None,
) -> RunConfig:
    """Read, merge, and fully validate a run config. Raises ConfigError with
    every detected problem; nothing is touched on disk."""
    path = Path(path)
    problems: list[str] = []
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError([f"config file not found: {path}"]) from None
    except json.JSONDecodeError as exc:
        raise ConfigError([f"config file {path} is not valid JSON: {exc}"]) from None
    if not isinstance(raw, dict):
        raise ConfigError([f"config file {path} must hold a JSON object"])

    raw = _merge_preset(raw, preset)
    if task_override is not None:
        raw.setdefault("task", task_override)
    if seed is not None:
        raw["seed"] = seed
    if out_dir is not None:
        raw["out_dir"] = out_dir
    if trace:
        raw["trace"] = True

    for spec in remote_experts or ():
        parts = spec.rsplit(":", 2)
        if len(parts) != 3:
            problems.append(f"--remote-expert {spec!r} is not url:name:weight")
            continue
        url, name, weight = parts
        try:
            w = float(weight)
        except ValueError:
            problems.append(f"--remote-expert {spec!r}: weight {weight!r} is not a number")
            continue
        raw.setdefault("experts", []).append(
            {"kind": "remote", "weight": w, "url": url, "name": name}
        )

    config = _parse(raw, path.parent, problems)
    _validate(config, problems)
    if problems:
        raise ConfigError(problems)
    return config


def _parse(raw: dict, base_dir: Path, problems: list[str]) -> RunConfig:
    experts = []
    for idx, entry in enumerate(raw.get("experts", [])):
        if not isinstance(entry, dict) or "kind" not in entry:
            problems.append(f"experts[{idx}]: each expert needs a 'kind'")
            continue
        kind = entry["kind"]
        if kind not in EXPERT_KINDS:
            problems.append(
                f"experts[{idx}]: unknown kind {kind!r}; expected one of {sorted(EXPERT_KINDS)}"
            )
            continue
        try:
            weight = float(entry.get("weight", 1.0))
        except (TypeError, ValueError):
            problems.append(f"experts[{idx}]: weight {entry.get('weight')!r} is not a number")
            continue
        experts.append(
            ExpertSpec(
                kind=kind,
                weight=weight,
                target=entry.get("target"),
                lexicon=entry.get("lexicon"),
                embeddings=entry.get("embeddings"),
                url=entry.get("url"),
                name=entry.get("name"),
            )
        )

    def intval(key, default):
        v = raw.get(key, default)
        if not isinstance(v, int) or isinstance(v, bool):
            problems.append(f"{key} must be an integer, got {v!r}")
            return default
        return v

    return RunConfig(
        task=raw.get("task", ""),
        models_dir=raw.get("models_dir", ""),
        out_dir=raw.get("out_dir", "out"),
        experts=experts,
        epochs=intval("epochs", 8),
        seed=intval("seed", 0),
        length=intval("length", 8),
        samples_per_prompt=intval("samples_per_prompt", DEFAULT_SAMPLES_PER_PROMPT),
        prompts=list(raw.get("prompts", [])),
        source_file=raw.get("source_file"),
        target_class=raw.get("target_class"),
        revisable_positions=raw.get("revisable_positions"),
        frozen_positions=raw.get("frozen_positions"),
        position_order=raw.get("position_order", "random-permutation"),
        trace=bool(raw.get("trace", False)),
        remote_proposal=raw.get("remote_proposal"),
        base_dir=base_dir,
    )


def _validate(config: RunConfig, problems: list[str]) -> None:
    if config.task not in ("generate", "revise"):
        problems.append(f"task must be 'generate' or 'revise', got {config.task!r}")
    if not config.models_dir:
        problems.append("models_dir is required")
    else:
        models = config.resolve(config.models_dir)
        for f in ("vocab.txt", "neighbor_mlm.json"):
            if not (models / f).is_file():
                problems.append(f"missing model file: {models / f}")
        if any(e.kind == "discriminator" for e in config.experts) and not (
            models / "classifier.json"
        ).is_file():
            problems.append(f"missing model file: {models / 'classifier.json'}")

    if config.epochs < 1:
        problems.append(f"epochs must be >= 1, got {config.epochs}")
    if config.position_order not in ("random-permutation", "with-replacement"):
        problems.append(f"unknown position_order {config.position_order!r}")

    if not config.experts:
        problems.append("at least one expert is required")
    for idx, e in enumerate(config.experts):
        if not math.isfinite(e.weight):
            problems.append(f"experts[{idx}]: weight must be finite")
        if e.kind == "discriminator" and e.target is None and config.target_class is None:
            problems.append(f"experts[{idx}]: discriminator needs 'target' (or top-level target_class)")
        if e.kind == "lexicon":
            if not e.lexicon:
                problems.append(f"experts[{idx}]: lexicon expert needs a 'lexicon' file")
            elif not config.resolve(e.lexicon).is_file():
                problems.append(f"experts[{idx}]: lexicon file not found: {config.resolve(e.lexicon)}")
        if e.kind == "fuzzy":
            if not e.embeddings:
                problems.append(f"experts[{idx}]: fuzzy expert needs an 'embeddings' file")
            elif not config.resolve(e.embeddings).is_file():
                problems.append(
                    f"experts[{idx}]: embeddings file not found: {config.resolve(e.embeddings)}"
                )
        if e.kind in ("hamming", "fuzzy") and config.task == "generate":
            problems.append(
                f"experts[{idx}]: {e.kind} expert compares against a source line and"
                " only applies to task=revise"
            )
        if e.kind == "remote":
            if not e.url or not e.name:
                problems.append(f"experts[{idx}]: remote expert needs 'url' and 'name'")

    if config.task == "generate":
        if not config.prompts:
            problems.append("task=generate needs a nonempty 'prompts' list")
        if config.length < 1:
            problems.append(f"length must be >= 1, got {config.length}")
        for p in config.prompts:
            if len(p.split()) >= config.length:
                problems.append(f"prompt {p!r} has no room to generate at length {config.length}")
        if config.samples_per_prompt < 1:
            problems.append("samples_per_prompt must be >= 1")
        if config.revisable_positions is not None or config.frozen_positions is not None:
            problems.append("frozen/revisable positions only apply to task=revise")

    if config.task == "revise":
        if not config.source_file:
            problems.append("task=revise needs a 'source_file'")
        elif not config.resolve(config.source_file).is_file():
            problems.append(f"source file not found: {config.resolve(config.source_file)}")
        if config.revisable_positions is not None and config.frozen_positions is not None:
            problems.append("give either revisable_positions or frozen_positions, not both")

    if config.remote_proposal is not None:
        if not isinstance(config.remote_proposal, dict) or not (
            config.remote_proposal.get("url") and config.remote_proposal.get("name")
        ):
            problems.append("remote_proposal needs 'url' and 'name'")
