"""Energy experts and their weighted combination.

An expert maps a sequence to a scalar energy; lower energy means the expert
likes the sequence more. A weighted sum of experts defines the target
distribution p(X) ~ exp(-total(X)). All experts here are pure functions of
the sequence, so repeated evaluation is bit-identical and concurrent
read-only use is safe.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .text import Sequence, UNK_TOKEN, Vocabulary

# Floor applied to classifier posteriors before taking the log, keeping
# discriminator energies (and with them acceptance ratios) finite.
POSTERIOR_FLOOR = 1e-12


class EnergyExpert:
    """Base class; subclasses implement energy(seq) as a pure function."""

    kind = "abstract"

    def energy(self, seq: Sequence) -> float:
        raise NotImplementedError

    def describe(self) -> str:
        return self.kind


@dataclass(frozen=True)
class EnergyBreakdown:
    """Per-expert energies plus their weighted total for one sequence."""

    components: tuple[float, ...]
    weights: tuple[float, ...]
    total: float

    def as_dict(self, names: tuple[str, ...]) -> dict:
        return {
            "total": self.total,
            "components": [
                {"expert": n, "weight": w, "energy": e}
                for n, w, e in zip(names, self.weights, self.components)
            ],
        }


class EnergyModel:
    """Ordered list of (expert, weight) pairs; total energy is their dot product.

    Weights may be zero or negative (negative flips an expert into a repeller,
    which is legal but usually a config mistake, hence the warning).
    """

    def __init__(self, experts: list[tuple[EnergyExpert, float]]):
        for expert, weight in experts:
            if not math.isfinite(weight):
                raise ValueError(f"non-finite weight {weight} for expert {expert.describe()}")
            if weight < 0:
                warnings.warn(
                    f"negative weight {weight} for expert {expert.describe()}",
                    stacklevel=2,
                )
        self._pairs = tuple((e, float(w)) for e, w in experts)

    @property
    def pairs(self) -> tuple[tuple[EnergyExpert, float], ...]:
        return self._pairs

    def names(self) -> tuple[str, ...]:
        return tuple(e.describe() for e, _ in self._pairs)

    def breakdown(self, seq: Sequence) -> EnergyBreakdown:
        return combined_energy(seq, self)

    def total(self, seq: Sequence) -> float:
        total = 0.0
        for expert, weight in self._pairs:
            try:
                total += weight * expert.energy(seq)
            except Exception as exc:
                raise type(exc)(f"expert {expert.describe()}: {exc}") from exc
        return total

    def __add__(self, other: "EnergyModel") -> "EnergyModel":
        return EnergyModel(list(self._pairs) + list(other._pairs))


def combined_energy(seq: Sequence, model: EnergyModel) -> EnergyBreakdown:
    """Evaluate every expert on `seq` and sum with the model weights.

    The summation order is the expert order, so totals are reproducible
    bit-exactly for a fixed model.
    """
    components = []
    weights = []
    total = 0.0
    for expert, weight in model.pairs:
        try:
            e = expert.energy(seq)
        except Exception as exc:
            raise type(exc)(f"expert {expert.describe()}: {exc}") from exc
        components.append(e)
        weights.append(weight)
        total += weight * e
    return EnergyBreakdown(tuple(components), tuple(weights), total)


# ---------------------------------------------------------------------------
# hamming


def hamming_energy(x: Sequence, x_ref: Sequence) -> float:
    """Number of positions where the two sequences hold different ids."""
    if len(x) != len(x_ref):
        raise ValueError(f"length mismatch: {len(x)} vs {len(x_ref)}")
    return float(sum(a != b for a, b in zip(x.ids, x_ref.ids)))


class HammingExpert(EnergyExpert):
    kind = "hamming"

    def __init__(self, reference: Sequence):
        self.reference = reference

    def energy(self, seq: Sequence) -> float:
        return hamming_energy(seq, self.reference)


# ---------------------------------------------------------------------------
# fuzzy (embedding-similarity F1)


class EmbeddingTable:
    """Token -> unit-normalizable embedding vectors, with an UNK fallback.

    File format: one `token v1 v2 ... vd` line per token, space separated.
    """

    def __init__(self, vectors: dict[str, np.ndarray]):
        if UNK_TOKEN not in vectors:
            raise ValueError(f"embedding table must provide an {UNK_TOKEN} fallback vector")
        dims = {v.shape for v in vectors.values()}
        if len(dims) != 1:
            raise ValueError(f"inconsistent embedding dimensions: {sorted(dims)}")
        self._unit: dict[str, np.ndarray] = {}
        for token, vec in vectors.items():
            norm = float(np.linalg.norm(vec))
            if norm == 0.0:
                raise ValueError(f"zero-norm embedding for token {token!r}")
            self._unit[token] = np.asarray(vec, dtype=float) / norm

    def unit_vector(self, token: str) -> np.ndarray:
        return self._unit.get(token, self._unit[UNK_TOKEN])

    @classmethod
    def load(cls, path: str | Path) -> "EmbeddingTable":
        vectors = {}
        for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            if not raw.strip():
                continue
            parts = raw.split()
            try:
                vectors[parts[0]] = np.array([float(v) for v in parts[1:]])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: bad embedding line") from exc
        return cls(vectors)


def fuzzy_energy(x: Sequence, x_ref: Sequence, emb: EmbeddingTable, vocab: Vocabulary) -> float:
    """1 - F1 of greedy cosine matching between the two token sequences.

    Precision is the mean over tokens of x of the best cosine similarity to
    any token of x_ref; recall is symmetric; F1 is their harmonic mean.
    Identical sequences score 0; orthogonal ones score 1. Negative cosines
    can push the value above 1, bounded by 2.
    """
    if len(x) == 0 or len(x_ref) == 0:
        raise ValueError("fuzzy energy needs non-empty sequences")
    xv = np.stack([emb.unit_vector(vocab.token_of(i)) for i in x.ids])
    rv = np.stack([emb.unit_vector(vocab.token_of(i)) for i in x_ref.ids])
    sims = xv @ rv.T
    precision = float(np.mean(np.max(sims, axis=1)))
    recall = float(np.mean(np.max(sims, axis=0)))
    if abs(precision + recall) < 1e-12:
        f1 = 0.0  # orthogonal match: harmonic mean degenerates to 0
    else:
        f1 = 2.0 * precision * recall / (precision + recall)
    return 1.0 - f1


class FuzzyExpert(EnergyExpert):
    kind = "fuzzy"

    def __init__(self, reference: Sequence, emb: EmbeddingTable, vocab: Vocabulary):
        self.reference = reference
        self.emb = emb
        self.vocab = vocab

    def energy(self, seq: Sequence) -> float:
        return fuzzy_energy(seq, self.reference, self.emb, self.vocab)


# ---------------------------------------------------------------------------
# lexicon


def lexicon_energy(x: Sequence, lexicon: frozenset[int] | set[int]) -> float:
    """Negative count of positions whose token belongs to the lexicon."""
    return -float(sum(i in lexicon for i in x.ids))


class LexiconExpert(EnergyExpert):
    kind = "lexicon"

    def __init__(self, token_ids: set[int]):
        self.token_ids = frozenset(token_ids)

    def energy(self, seq: Sequence) -> float:
        return lexicon_energy(seq, self.token_ids)

    @classmethod
    def from_file(cls, path: str | Path, vocab: Vocabulary) -> "LexiconExpert":
        """Lexicon file: one token per line; out-of-vocab lines are dropped."""
        ids = set()
        for raw in Path(path).read_text(encoding="utf-8").splitlines():
            token = raw.strip()
            if token and token in vocab:
                ids.add(vocab.id_of(token))
        return cls(ids)


# ---------------------------------------------------------------------------
# discriminator


def disc_energy(x: Sequence, clf, target: int) -> float:
    """Negative log posterior of the target class, floored at 1e-12.

    `clf` must expose posterior(seq) -> vector over classes; `target` is a
    class id when the classifier can map ids (class_index), else an index.
    The floor bounds the energy by -ln(1e-12) ~ 27.63 so acceptance ratios
    stay finite.
    """
    posterior = clf.posterior(x)
    idx = clf.class_index(target) if hasattr(clf, "class_index") else target
    if not 0 <= idx < len(posterior):
        raise ValueError(f"unknown class {target}; classifier has {len(posterior)} classes")
    return -math.log(max(float(posterior[idx]), POSTERIOR_FLOOR))


class DiscriminatorExpert(EnergyExpert):
    kind = "discriminator"

    def __init__(self, clf, target: int):
        self.clf = clf
        self.target = target

    def energy(self, seq: Sequence) -> float:
        return disc_energy(seq, self.clf, self.target)

    def describe(self) -> str:
        return f"discriminator(target={self.target})"


# ---------------------------------------------------------------------------
# masked-LM pseudo-likelihood


def mlm_energy(x: Sequence, mlm) -> float:
    """Negative sum over positions of the model's unnormalized log-score of
    the true token with that position masked.

    `mlm` must expose masked_score(seq, i) -> float (log of an unnormalized
    conditional mass; normalizing it over the vocabulary would give the
    proposal conditional at i).
    """
    if len(x) == 0:
        raise ValueError("mlm energy of an empty sequence")
    return -sum(mlm.masked_score(x, i) for i in range(len(x)))


class MlmExpert(EnergyExpert):
    kind = "mlm"

    def __init__(self, model):
        self.model = model

    def energy(self, seq: Sequence) -> float:
        return mlm_energy(seq, self.model)
