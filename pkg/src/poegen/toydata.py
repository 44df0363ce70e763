"""Accessors for the packaged toy sentiment data (class 0 negative, 1 positive).

Regenerate with scripts/make_toy_data.py; the files are committed so runs
and tests never depend on generation-time state.
"""

from __future__ import annotations

from pathlib import Path

from .models import NaiveBayesClassifier, NeighborMLM, fit_nb_classifier, fit_neighbor_mlm
from .text import Corpus, Vocabulary, build_vocab, load_corpus

NEGATIVE, POSITIVE = 0, 1

_DATA = Path(__file__).parent / "data"


def data_path(name: str) -> Path:
    p = _DATA / name
    if not p.is_file():
        raise FileNotFoundError(f"no packaged data file {name!r}")
    return p


def toy_vocab() -> Vocabulary:
    lines = data_path("toy_corpus.txt").read_text(encoding="utf-8").splitlines()
    return build_vocab(lines, min_count=1)


def toy_models(k: float = 0.1) -> tuple[Vocabulary, NeighborMLM, NaiveBayesClassifier, Corpus]:
    """Vocabulary, proposal model, classifier, and the labeled corpus."""
    vocab = toy_vocab()
    plain = load_corpus(data_path("toy_corpus.txt"), vocab)
    labeled = load_corpus(data_path("toy_sentiment.tsv"), vocab, labeled=True)
    return vocab, fit_neighbor_mlm(plain, vocab, k), fit_nb_classifier(labeled, vocab, k), labeled
