"""Vocabulary, whitespace tokenization, and frozen-position sequences.

Every other module works in terms of these types. Tokenization is
deliberately plain whitespace splitting: subword handling belongs to
external expert servers, which speak whole-token strings on the wire.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

MASK_TOKEN = "[MASK]"
UNK_TOKEN = "[UNK]"
MASK_ID = 0
UNK_ID = 1


class Vocabulary:
    """Bijection between token strings and dense integer ids.

    MASK is always id 0 and UNK always id 1; remaining tokens keep the order
    they were given (build_vocab orders by frequency desc, then lexicographic,
    so the assignment is deterministic).
    """

    def __init__(self, tokens: list[str] | tuple[str, ...]):
        toks = list(tokens)
        if len(toks) < 2 or toks[MASK_ID] != MASK_TOKEN or toks[UNK_ID] != UNK_TOKEN:
            raise ValueError(
                f"vocabulary must start with {MASK_TOKEN!r} at id {MASK_ID} "
                f"and {UNK_TOKEN!r} at id {UNK_ID}"
            )
        if len(set(toks)) != len(toks):
            dupes = sorted(t for t, c in Counter(toks).items() if c > 1)
            raise ValueError(f"duplicate tokens in vocabulary: {dupes}")
        self._tokens = tuple(toks)
        self._ids = {t: i for i, t in enumerate(toks)}

    def __len__(self) -> int:
        return len(self._tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._ids

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and other._tokens == self._tokens

    @property
    def tokens(self) -> tuple[str, ...]:
        return self._tokens

    def id_of(self, token: str) -> int:
        """Id of `token`, falling back to UNK for out-of-vocabulary tokens."""
        return self._ids.get(token, UNK_ID)

    def token_of(self, token_id: int) -> str:
        if not 0 <= token_id < len(self._tokens):
            raise ValueError(f"token id {token_id} out of range [0, {len(self._tokens)})")
        return self._tokens[token_id]

    def save(self, path: str | Path) -> None:
        """One token per line; the line number is the id."""
        Path(path).write_text("\n".join(self._tokens) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        return cls([ln for ln in lines if ln != ""])


@dataclass(frozen=True)
class Sequence:
    """Fixed-length vector of token ids with a per-position freeze mask.

    Frozen positions are off-limits to the sampler. The empty sequence is a
    legal value (tokenizing "" yields one) but is rejected wherever a
    sampler-ready sequence is required.
    """

    ids: tuple[int, ...]
    frozen: tuple[bool, ...] = field(default=())

    def __post_init__(self):
        if not self.frozen:
            object.__setattr__(self, "frozen", (False,) * len(self.ids))
        if len(self.frozen) != len(self.ids):
            raise ValueError(
                f"frozen mask length {len(self.frozen)} != ids length {len(self.ids)}"
            )

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def free_positions(self) -> tuple[int, ...]:
        return tuple(i for i, f in enumerate(self.frozen) if not f)

    def with_id(self, position: int, token_id: int) -> "Sequence":
        """Copy of this sequence with one position substituted."""
        ids = list(self.ids)
        ids[position] = token_id
        return Sequence(tuple(ids), self.frozen)

    def validate(self, vocab: Vocabulary) -> None:
        for i in self.ids:
            if not 0 <= i < len(vocab):
                raise ValueError(f"token id {i} out of range for vocabulary of size {len(vocab)}")


@dataclass(frozen=True)
class Corpus:
    """Tokenized lines, optionally labeled with a class id per line."""

    lines: tuple[Sequence, ...]
    labels: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.labels is not None and len(self.labels) != len(self.lines):
            raise ValueError(
                f"{len(self.labels)} labels for {len(self.lines)} lines"
            )

    def __len__(self) -> int:
        return len(self.lines)


def build_vocab(corpus_text: list[str], min_count: int = 1) -> Vocabulary:
    """Build a vocabulary from raw text lines.

    Keeps every token occurring at least `min_count` times, ordered by
    frequency descending then lexicographically, after the reserved MASK and
    UNK entries. Building twice from the same lines gives identical ids.
    """
    if not corpus_text:
        raise ValueError("empty corpus")
    if min_count < 1:
        raise ValueError(f"min_count must be >= 1, got {min_count}")
    counts = Counter()
    for line in corpus_text:
        counts.update(line.split())
    kept = sorted(
        (t for t, c in counts.items() if c >= min_count and t not in (MASK_TOKEN, UNK_TOKEN)),
        key=lambda t: (-counts[t], t),
    )
    return Vocabulary([MASK_TOKEN, UNK_TOKEN, *kept])


def tokenize(text: str, vocab: Vocabulary) -> Sequence:
    """Whitespace-split `text` and map tokens to ids; unknown tokens become UNK."""
    ids = tuple(vocab.id_of(t) for t in text.split())
    return Sequence(ids)


def detokenize(seq: Sequence, vocab: Vocabulary) -> str:
    """Space-join the token strings of `seq`. Inverse of tokenize for in-vocab text."""
    return " ".join(vocab.token_of(i) for i in seq.ids)


def load_corpus(path: str | Path, vocab: Vocabulary, labeled: bool = False) -> Corpus:
    """Read a corpus file: one example per line, `label<TAB>text` when labeled."""
    lines: list[Sequence] = []
    labels: list[int] = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if raw.strip() == "":
            continue
        if labeled:
            parts = raw.split("\t", 1)
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'label<TAB>text'")
            try:
                labels.append(int(parts[0]))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: bad label {parts[0]!r}") from exc
            lines.append(tokenize(parts[1], vocab))
        else:
            lines.append(tokenize(raw, vocab))
    if not lines:
        raise ValueError(f"{path}: empty corpus")
    return Corpus(tuple(lines), tuple(labels) if labeled else None)
