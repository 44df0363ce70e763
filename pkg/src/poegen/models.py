"""Desk-scale trainable models: a neighbor-context masked conditional model,
an explicit tabular joint, and a Naive-Bayes bag-of-tokens classifier.

The neighbor model plays the proposal/fluency role a large masked LM plays at
full scale; the tabular joint exists so sampler correctness can be checked
against exact enumeration; the classifier is the attribute discriminator.
All three are immutable after fitting and safe for concurrent reads.
"""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .experts import EnergyExpert
from .text import Corpus, Sequence, Vocabulary

# Context id used for neighbor positions that fall off either sequence edge.
BOUNDARY_ID = -1

MODEL_FORMAT_VERSION = 1


def vocab_fingerprint(vocab: Vocabulary) -> str:
    """sha256 over the token list; ties a saved model to its vocabulary."""
    return hashlib.sha256("\n".join(vocab.tokens).encode("utf-8")).hexdigest()


def _check_fingerprint(payload: dict, vocab: Vocabulary, path) -> None:
    if payload.get("vocab_sha256") != vocab_fingerprint(vocab):
        raise ValueError(f"{path}: model was fit on a different vocabulary")


class NeighborMLM:
    """Count model of a token given its immediate left and right neighbors.

    Conditionals are add-k smoothed, so every token has probability at least
    k / (context_total + k*V) > 0 in every context; that strict positivity is
    what keeps the sampling chain ergodic.
    """

    def __init__(self, counts: dict[tuple[int, int], np.ndarray], k: float, vocab_size: int):
        if k <= 0:
            raise ValueError(f"smoothing k must be > 0, got {k}")
        self.k = float(k)
        self.vocab_size = int(vocab_size)
        self._counts = {ctx: np.asarray(c, dtype=float) for ctx, c in counts.items()}
        self._zeros = np.zeros(self.vocab_size)
        # Derived per-context tables, built lazily; pure caches of count math.
        self._probs: dict[tuple[int, int], np.ndarray] = {}
        self._cdf: dict[tuple[int, int], np.ndarray] = {}
        self._scores: dict[tuple[int, int], np.ndarray] = {}

    def _context(self, seq: Sequence, i: int) -> tuple[int, int]:
        left = seq.ids[i - 1] if i > 0 else BOUNDARY_ID
        right = seq.ids[i + 1] if i < len(seq) - 1 else BOUNDARY_ID
        return (left, right)

    def _context_counts(self, ctx: tuple[int, int]) -> np.ndarray:
        return self._counts.get(ctx, self._zeros)

    def conditional(self, seq: Sequence, i: int) -> np.ndarray:
        """Smoothed distribution over the vocabulary for position i of seq."""
        if not 0 <= i < len(seq):
            raise ValueError(f"position {i} out of range for length {len(seq)}")
        ctx = self._context(seq, i)
        probs = self._probs.get(ctx)
        if probs is None:
            counts = self._context_counts(ctx) + self.k
            probs = counts / counts.sum()
            probs.setflags(write=False)
            self._probs[ctx] = probs
        return probs

    def conditional_cdf(self, seq: Sequence, i: int) -> np.ndarray:
        ctx = self._context(seq, i)
        cdf = self._cdf.get(ctx)
        if cdf is None:
            cdf = np.cumsum(self.conditional(seq, i))
            cdf.setflags(write=False)
            self._cdf[ctx] = cdf
        return cdf

    def masked_score(self, seq: Sequence, i: int) -> float:
        """Unnormalized log-score of the token at i: log(count + k)."""
        ctx = self._context(seq, i)
        scores = self._scores.get(ctx)
        if scores is None:
            scores = np.log(self._context_counts(ctx) + self.k)
            scores.setflags(write=False)
            self._scores[ctx] = scores
        return float(scores[seq.ids[i]])

    # -- persistence --------------------------------------------------------

    def save(self, path: str | Path, vocab: Vocabulary) -> None:
        payload = {
            "version": MODEL_FORMAT_VERSION,
            "kind": "neighbor_mlm",
            "k": self.k,
            "vocab_size": self.vocab_size,
            "vocab_sha256": vocab_fingerprint(vocab),
            "counts": [
                [int(l), int(r), [[int(v), float(c)] for v, c in enumerate(vec) if c > 0]]
                for (l, r), vec in sorted(self._counts.items())
            ],
        }
        Path(path).write_text(json.dumps(payload, indent=1), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path, vocab: Vocabulary) -> "NeighborMLM":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        if payload.get("kind") != "neighbor_mlm":
            raise ValueError(f"{path}: not a neighbor model file")
        _check_fingerprint(payload, vocab, path)
        counts = {}
        for left, right, entries in payload["counts"]:
            vec = np.zeros(payload["vocab_size"])
            for v, c in entries:
                vec[v] = c
            counts[(left, right)] = vec
        return cls(counts, payload["k"], payload["vocab_size"])


def fit_neighbor_mlm(corpus: Corpus, vocab: Vocabulary, k: float = 0.1) -> NeighborMLM:
    """Tally (left, center, right) triples over the corpus, edges padded with
    a boundary sentinel. Deterministic and invariant to line order."""
    if len(corpus) == 0:
        raise ValueError("empty corpus")
    if k <= 0:
        raise ValueError(f"smoothing k must be > 0, got {k}")
    size = len(vocab)
    counts: dict[tuple[int, int], np.ndarray] = {}
    for line in corpus.lines:
        ids = line.ids
        for i, center in enumerate(ids):
            left = ids[i - 1] if i > 0 else BOUNDARY_ID
            right = ids[i + 1] if i < len(ids) - 1 else BOUNDARY_ID
            vec = counts.get((left, right))
            if vec is None:
                vec = counts.setdefault((left, right), np.zeros(size))
            vec[center] += 1.0
    return NeighborMLM(counts, k, size)


class TabularJoint:
    """Explicit probability table over all V^L sequences of a tiny space.

    The exact conditionals and log-probabilities it exposes are the ground
    truth the sampler is verified against.
    """

    def __init__(self, table: np.ndarray):
        table = np.asarray(table, dtype=float)
        if table.ndim < 1:
            raise ValueError("table must have at least one axis")
        if abs(float(table.sum()) - 1.0) > 1e-12:
            raise ValueError(f"joint table sums to {table.sum()}, expected 1")
        if not (table > 0).all():
            raise ValueError("joint table must be strictly positive")
        self.table = table
        self.vocab_size = table.shape[0]
        self.length = table.ndim

    @classmethod
    def uniform(cls, vocab_size: int, length: int) -> "TabularJoint":
        n = vocab_size**length
        return cls(np.full((vocab_size,) * length, 1.0 / n))

    @classmethod
    def random(cls, vocab_size: int, length: int, seed: int) -> "TabularJoint":
        """Strictly positive random joint drawn from a flat Dirichlet."""
        rng = np.random.default_rng(seed)
        flat = rng.dirichlet(np.ones(vocab_size**length))
        flat = np.maximum(flat, 1e-12)
        flat /= flat.sum()
        return cls(flat.reshape((vocab_size,) * length))

    def _slice(self, seq: Sequence, i: int) -> np.ndarray:
        index = tuple(seq.ids[:i]) + (slice(None),) + tuple(seq.ids[i + 1 :])
        return self.table[index]

    def conditional(self, seq: Sequence, i: int) -> np.ndarray:
        """Exact p(x_i = v | all other positions of seq)."""
        if not 0 <= i < len(seq):
            raise ValueError(f"position {i} out of range for length {len(seq)}")
        if len(seq) != self.length:
            raise ValueError(f"sequence length {len(seq)} != table order {self.length}")
        row = self._slice(seq, i)
        return row / row.sum()

    def conditional_cdf(self, seq: Sequence, i: int) -> np.ndarray:
        return np.cumsum(self.conditional(seq, i))

    def masked_score(self, seq: Sequence, i: int) -> float:
        """Unnormalized log-score at slot i: the log joint mass of the sequence
        with its actual token at i (normalizing over tokens recovers the
        conditional)."""
        return float(np.log(self._slice(seq, i)[seq.ids[i]]))

    def log_prob(self, seq: Sequence) -> float:
        if len(seq) != self.length:
            raise ValueError(f"sequence length {len(seq)} != table order {self.length}")
        return float(np.log(self.table[tuple(seq.ids)]))


def conditional(model, x: Sequence, i: int) -> np.ndarray:
    """Distribution over the vocabulary for position i of x under `model`
    (anything exposing conditional(seq, i): NeighborMLM, TabularJoint, or a
    remote proposal)."""
    return model.conditional(x, i)


class NaiveBayesClassifier:
    """Multinomial Naive Bayes over bags of token ids with add-k smoothing."""

    def __init__(self, class_ids, class_counts, token_counts, k: float, vocab_size: int):
        self.class_ids = tuple(int(c) for c in class_ids)
        self.class_counts = np.asarray(class_counts, dtype=float)
        self.token_counts = np.asarray(token_counts, dtype=float)
        self.k = float(k)
        self.vocab_size = int(vocab_size)
        self._log_prior = np.log(self.class_counts / self.class_counts.sum())
        smoothed = self.token_counts + self.k
        self._log_lik = np.log(smoothed / smoothed.sum(axis=1, keepdims=True))

    @property
    def num_classes(self) -> int:
        return len(self.class_ids)

    def class_index(self, class_id: int) -> int:
        try:
            return self.class_ids.index(class_id)
        except ValueError:
            raise ValueError(f"unknown class {class_id}; known classes {self.class_ids}") from None

    def posterior(self, seq: Sequence) -> np.ndarray:
        """Normalized class posteriors; an empty sequence returns the priors."""
        logp = self._log_prior.copy()
        for t in seq.ids:
            logp += self._log_lik[:, t]
        logp -= logp.max()
        p = np.exp(logp)
        return p / p.sum()

    def predict(self, seq: Sequence) -> int:
        """Argmax class id; ties break toward the lowest class id."""
        post = self.posterior(seq)
        best = int(np.argmax(post))  # argmax takes the first maximum
        return self.class_ids[best]

    def save(self, path: str | Path, vocab: Vocabulary) -> None:
        payload = {
            "version": MODEL_FORMAT_VERSION,
            "kind": "naive_bayes",
            "k": self.k,
            "vocab_size": self.vocab_size,
            "vocab_sha256": vocab_fingerprint(vocab),
            "class_ids": list(self.class_ids),
            "class_counts": self.class_counts.tolist(),
            "token_counts": self.token_counts.tolist(),
        }
        Path(path).write_text(json.dumps(payload, indent=1), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path, vocab: Vocabulary) -> "NaiveBayesClassifier":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        if payload.get("kind") != "naive_bayes":
            raise ValueError(f"{path}: not a classifier file")
        _check_fingerprint(payload, vocab, path)
        return cls(
            payload["class_ids"],
            payload["class_counts"],
            payload["token_counts"],
            payload["k"],
            payload["vocab_size"],
        )


def fit_nb_classifier(corpus: Corpus, vocab: Vocabulary, k: float = 0.1) -> NaiveBayesClassifier:
    """Fit the classifier on a labeled corpus; classes are sorted label ids."""
    if corpus.labels is None:
        raise ValueError("corpus has no labels")
    if k <= 0:
        raise ValueError(f"smoothing k must be > 0, got {k}")
    class_ids = sorted(set(corpus.labels))
    if len(class_ids) < 2:
        raise ValueError(f"need at least 2 classes, got {len(class_ids)}")
    index = {c: j for j, c in enumerate(class_ids)}
    class_counts = np.zeros(len(class_ids))
    token_counts = np.zeros((len(class_ids), len(vocab)))
    for line, label in zip(corpus.lines, corpus.labels):
        j = index[label]
        class_counts[j] += 1.0
        for t in line.ids:
            token_counts[j, t] += 1.0
    return NaiveBayesClassifier(class_ids, class_counts, token_counts, k, len(vocab))


def classify(clf: NaiveBayesClassifier, x: Sequence) -> np.ndarray:
    """Posterior vector over the classifier's classes for sequence x."""
    return clf.posterior(x)


class NegLogJointExpert(EnergyExpert):
    """Energy expert whose energy is -log p(x) under an explicit joint table.

    Paired with that joint's exact conditionals as the proposal, the chain's
    acceptance probability is identically 1; tests lean on that cancellation.
    """

    kind = "neg_log_joint"

    def __init__(self, joint: TabularJoint):
        self.joint = joint

    def energy(self, seq: Sequence) -> float:
        return -self.joint.log_prob(seq)

    def describe(self) -> str:
        return self.kind
