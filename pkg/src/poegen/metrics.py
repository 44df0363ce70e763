"""Corpus-level evaluation metrics for generated samples.

All pure functions over token-id sequences; nothing here touches models
except through the classifier's posterior.
"""

from __future__ import annotations

import json
import math
import warnings
from collections import Counter
from dataclasses import dataclass

from .experts import hamming_energy
from .models import NaiveBayesClassifier
from .text import Sequence

BLEU_EPSILON = 1e-9


@dataclass(frozen=True)
class EvalReport:
    mean_hamming_to_source: float | None
    internal_classifier_rate: float | None
    distinct_1: float
    distinct_2: float
    distinct_3: float
    corpus_bleu: float | None
    mean_total_energy: float
    acceptance_rate: float

    def to_json(self) -> str:
        def clean(v):
            return v if v is None or math.isfinite(v) else None

        return json.dumps(
            {
                "mean_hamming_to_source": clean(self.mean_hamming_to_source),
                "internal_classifier_rate": clean(self.internal_classifier_rate),
                "distinct_1": clean(self.distinct_1),
                "distinct_2": clean(self.distinct_2),
                "distinct_3": clean(self.distinct_3),
                "corpus_bleu": clean(self.corpus_bleu),
                "mean_total_energy": clean(self.mean_total_energy),
                "acceptance_rate": clean(self.acceptance_rate),
            },
            indent=1,
        )


def internal_accuracy(samples: list[Sequence], clf: NaiveBayesClassifier, target: int) -> float:
    """Fraction of samples the guiding classifier assigns to the target class."""
    if not samples:
        raise ValueError("no samples")
    hits = sum(clf.predict(s) == target for s in samples)
    return hits / len(samples)


def mean_hamming(samples: list[Sequence], sources: list[Sequence]) -> float:
    """Mean per-pair token disagreement count between samples and sources."""
    if len(samples) != len(sources):
        raise ValueError(f"{len(samples)} samples vs {len(sources)} sources")
    if not samples:
        raise ValueError("no samples")
    return sum(hamming_energy(s, r) for s, r in zip(samples, sources)) / len(samples)


def _ngrams(ids: tuple[int, ...], n: int):
    return (ids[i : i + n] for i in range(len(ids) - n + 1))


def distinct_n(samples: list[Sequence], n: int) -> float:
    """Unique n-grams across all samples divided by total n-gram tokens.

    Samples shorter than n are skipped with a warning; if everything is
    skipped there is nothing to measure and that is an error.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    seen = set()
    total = 0
    skipped = 0
    for s in samples:
        if len(s) < n:
            skipped += 1
            continue
        for g in _ngrams(s.ids, n):
            seen.add(g)
            total += 1
    if skipped:
        warnings.warn(f"distinct_{n}: skipped {skipped} samples shorter than {n}", stacklevel=2)
    if total == 0:
        raise ValueError(f"no samples of length >= {n}")
    return len(seen) / total


def corpus_bleu(hypotheses: list[Sequence], references: list[Sequence], max_n: int = 4) -> float:
    """Corpus BLEU with one reference per hypothesis.

    Geometric mean of modified n-gram precisions for n = 1..max_n, zero
    precisions replaced by 1e-9, times the brevity penalty
    min(1, exp(1 - r/c)).
    """
    if len(hypotheses) != len(references):
        raise ValueError(f"{len(hypotheses)} hypotheses vs {len(references)} references")
    if not hypotheses:
        raise ValueError("empty corpus")
    log_score = 0.0
    for n in range(1, max_n + 1):
        matches = 0
        total = 0
        for hyp, ref in zip(hypotheses, references):
            hyp_counts = Counter(_ngrams(hyp.ids, n))
            ref_counts = Counter(_ngrams(ref.ids, n))
            matches += sum(min(c, ref_counts[g]) for g, c in hyp_counts.items())
            total += sum(hyp_counts.values())
        precision = matches / total if total > 0 else 0.0
        if precision == 0.0:
            precision = BLEU_EPSILON
        log_score += math.log(precision) / max_n
    hyp_len = sum(len(h) for h in hypotheses)
    ref_len = sum(len(r) for r in references)
    if hyp_len == 0:
        raise ValueError("empty hypotheses")
    brevity = min(1.0, math.exp(1.0 - ref_len / hyp_len))
    return brevity * math.exp(log_score)
