"""Exact enumeration of the Boltzmann distribution on tiny sequence spaces.

Everything the sampler claims is checked against these brute-force answers:
the stationary distribution by full enumeration, transition kernels by
summing over every ordered state pair. States are indexed lexicographically
by token ids so all modules agree on the layout.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .experts import EnergyModel
from .sampler import accept_prob
from .text import Sequence, Vocabulary

ENUMERATION_GUARD = 10**6
KERNEL_GUARD = 10**4


@dataclass(frozen=True)
class ExactDistribution:
    """Boltzmann probabilities over all V^L sequences plus the partition value."""

    probs: np.ndarray
    energies: np.ndarray
    log_z: float
    vocab_size: int
    length: int

    @property
    def z(self) -> float:
        return math.exp(self.log_z)

    def prob_of(self, ids: tuple[int, ...]) -> float:
        return float(self.probs[state_index(ids, self.vocab_size)])

    def to_json(self) -> str:
        return json.dumps(
            {
                "z": self.z,
                "log_z": self.log_z,
                "energy": [float(e) for e in self.energies],
                "prob": [float(p) for p in self.probs],
            }
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")


def state_index(ids: tuple[int, ...], vocab_size: int) -> int:
    """Lexicographic rank of an id tuple among all tuples of its length."""
    idx = 0
    for t in ids:
        idx = idx * vocab_size + t
    return idx


def all_states(vocab_size: int, length: int):
    return itertools.product(range(vocab_size), repeat=length)


def enumerate_distribution(energy: EnergyModel, vocab: Vocabulary, length: int) -> ExactDistribution:
    """Exact p(X) = exp(-E(X)) / Z over every length-`length` sequence.

    Z is accumulated with the log-sum-exp trick since configured weights can
    push energies to the order of hundreds.
    """
    v = len(vocab)
    n = v**length
    if n > ENUMERATION_GUARD:
        raise ValueError(f"state space {v}^{length} = {n} exceeds guard {ENUMERATION_GUARD}")
    energies = np.empty(n)
    for idx, ids in enumerate(all_states(v, length)):
        energies[idx] = energy.total(Sequence(ids))
    neg = -energies
    m = float(neg.max())
    log_z = m + math.log(float(np.exp(neg - m).sum()))
    probs = np.exp(neg - log_z)
    return ExactDistribution(probs, energies, log_z, v, length)


def tv_distance(p: np.ndarray, q: np.ndarray) -> float:
    """Total variation distance 0.5 * sum |p - q| between two distributions
    on the same index set."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"index sets differ: {p.shape} vs {q.shape}")
    for name, d in (("p", p), ("q", q)):
        if abs(float(d.sum()) - 1.0) > 1e-6:
            raise ValueError(f"{name} is not normalized: sums to {d.sum()}")
    return 0.5 * float(np.abs(p - q).sum())


def empirical_distribution(samples, vocab: Vocabulary, length: int) -> np.ndarray:
    """Normalized counts of `samples` over the full lexicographic V^L index
    set, zeros included. Samples may be Sequences or id tuples."""
    v = len(vocab)
    counts = np.zeros(v**length)
    n = 0
    for s in samples:
        ids = s.ids if isinstance(s, Sequence) else tuple(s)
        if len(ids) != length:
            raise ValueError(f"sample length {len(ids)} != {length}")
        counts[state_index(ids, v)] += 1.0
        n += 1
    if n == 0:
        raise ValueError("no samples")
    return counts / n


def transition_matrix(
    energy: EnergyModel,
    proposal,
    vocab: Vocabulary,
    length: int,
    accept_fn=accept_prob,
) -> np.ndarray:
    """Dense single-step kernel under uniform position choice.

    T[x, y] for y differing from x at exactly one position i is
    (1/L) * q(y_i | x minus i) * accept; diagonal takes the leftover mass.
    `accept_fn` is injectable so deliberately broken acceptance rules can be
    shown to violate reversibility.
    """
    v = len(vocab)
    n = v**length
    if n > KERNEL_GUARD:
        raise ValueError(f"state space {v}^{length} = {n} exceeds guard {KERNEL_GUARD}")
    states = [Sequence(ids) for ids in all_states(v, length)]
    energies = np.array([energy.total(s) for s in states])
    t = np.zeros((n, n))
    for xi, x in enumerate(states):
        for i in range(length):
            q = proposal.conditional(x, i)
            for token in range(v):
                if token == x.ids[i]:
                    continue
                y = x.with_id(i, token)
                yi = state_index(y.ids, v)
                a = accept_fn(
                    float(energies[xi]),
                    float(energies[yi]),
                    math.log(float(q[token])),
                    math.log(float(q[x.ids[i]])),
                )
                t[xi, yi] += (1.0 / length) * float(q[token]) * a
        t[xi, xi] = 1.0 - t[xi].sum()
    return t


def check_detailed_balance(
    energy: EnergyModel,
    proposal,
    vocab: Vocabulary,
    length: int,
    accept_fn=accept_prob,
) -> float:
    """Max over ordered single-position-differing pairs of
    |pi(x) T(x -> y) - pi(y) T(y -> x)| under the uniform-position kernel."""
    exact = enumerate_distribution(energy, vocab, length)
    t = transition_matrix(energy, proposal, vocab, length, accept_fn=accept_fn)
    v = len(vocab)
    worst = 0.0
    for xi, ids in enumerate(all_states(v, length)):
        for i in range(length):
            base = state_index(ids, v)
            stride = v ** (length - 1 - i)
            for token in range(v):
                if token == ids[i]:
                    continue
                yi = base + (token - ids[i]) * stride
                flow = exact.probs[xi] * t[xi, yi] - exact.probs[yi] * t[yi, xi]
                worst = max(worst, abs(float(flow)))
    return worst
