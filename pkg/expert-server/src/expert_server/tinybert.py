"""Deterministic desk-scale BERT models for demos and tests.

Real pretrained checkpoints drop in through the same config file (any model
directory or hub id transformers can load); these tiny randomly initialized
ones exist so the protocol stack can be exercised hermetically. The word
list splits "visited" into visit + ##ed on purpose, keeping the subword
alignment path honest.
"""

from __future__ import annotations

import json
from pathlib import Path

import torch
from transformers import (
    BertConfig,
    BertForMaskedLM,
    BertForSequenceClassification,
    BertTokenizerFast,
)

DEMO_WORDS = [
    "the", "a", "food", "service", "pizza", "coffee", "staff", "place", "room",
    "was", "is", "were", "and", "we", "when", "yesterday", "seemed", "rather",
    "quite", "visit", "##ed",
    "great", "tasty", "lovely", "wonderful", "pleasant", "charming", "cheerful",
    "delightful", "awful", "bland", "dreadful", "terrible", "gloomy", "shabby",
    "noisy", "dismal", "good", "bad",
]


def _write_tokenizer(out_dir: Path, words: list[str]) -> BertTokenizerFast:
    out_dir.mkdir(parents=True, exist_ok=True)
    vocab = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]", *words]
    (out_dir / "vocab.txt").write_text("\n".join(vocab) + "\n", encoding="utf-8")
    return BertTokenizerFast(str(out_dir / "vocab.txt"), do_lower_case=True)


def _tiny_config(vocab_size: int, **extra) -> BertConfig:
    return BertConfig(
        vocab_size=vocab_size,
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=128,
        **extra,
    )


def build_demo(out_dir: str | Path, words: list[str] | None = None, seed: int = 0) -> Path:
    """Materialize mlm/ and clf/ model directories plus a server config file.

    Returns the config path; serve it with
    `expert-server --config <path>`. Weights are randomly initialized from
    `seed`, so the demo is deterministic but knows nothing about language.
    """
    out = Path(out_dir)
    words = list(words) if words is not None else DEMO_WORDS

    torch.manual_seed(seed)
    tok = _write_tokenizer(out / "mlm", words)
    mlm = BertForMaskedLM(_tiny_config(len(tok)))
    mlm.save_pretrained(out / "mlm")
    tok.save_pretrained(out / "mlm")

    torch.manual_seed(seed + 1)
    tok2 = _write_tokenizer(out / "clf", words)
    clf = BertForSequenceClassification(_tiny_config(len(tok2), num_labels=2))
    clf.save_pretrained(out / "clf")
    tok2.save_pretrained(out / "clf")

    config = {
        "experts": [
            {"name": "echo", "kind": "echo"},
            {"name": "fluency", "kind": "mlm-energy", "model": "mlm"},
            {"name": "proposal", "kind": "conditional", "model": "mlm", "top_k": 50},
            {"name": "sentiment", "kind": "discriminator", "model": "clf", "target": 1},
        ]
    }
    config_path = out / "server_config.json"
    config_path.write_text(json.dumps(config, indent=1), encoding="utf-8")
    return config_path
