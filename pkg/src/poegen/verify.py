"""Built-in correctness checks: the chain against exact enumeration.

Each check returns a measured value and its threshold so operators see how
much margin the implementation has, not just pass/fail. The fixtures are
seeded constants; runs are reproducible.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .experts import EnergyModel, HammingExpert, LexiconExpert, MlmExpert
from .models import NegLogJointExpert, TabularJoint, fit_neighbor_mlm
from .oracle import (
    check_detailed_balance,
    empirical_distribution,
    enumerate_distribution,
    tv_distance,
)
from .sampler import SamplerConfig, accept_prob, epoch_states, run_chain
from .text import Corpus, Sequence, Vocabulary


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float
    threshold: float
    relation: str  # "<=" or ">"
    seconds: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status} {self.name}: measured {self.measured:.3e} "
            f"{self.relation} {self.threshold:.0e} ({self.seconds:.1f}s)"
        )


def _tiny_vocab(size: int) -> Vocabulary:
    extra = [f"w{j}" for j in range(size - 2)]
    return Vocabulary(["[MASK]", "[UNK]", *extra])


def corrupted_accept(e_cur, e_prop, log_q_fwd, log_q_rev) -> float:
    """Acceptance rule with the exponent sign flipped; a known-broken kernel
    the detailed-balance check must be able to catch."""
    exponent = -((e_cur - e_prop) + log_q_rev - log_q_fwd)
    return math.exp(min(exponent, 0.0))


def _random_energy(vocab: Vocabulary, length: int, seed: int) -> EnergyModel:
    rng = np.random.default_rng(seed)
    v = len(vocab)
    ref = Sequence(tuple(rng.integers(0, v, size=length)))
    joint = TabularJoint.random(v, length, seed=seed + 1)
    return EnergyModel(
        [
            (HammingExpert(ref), float(rng.uniform(0.3, 0.9))),
            (LexiconExpert({2 % v}), float(rng.uniform(0.3, 0.9))),
            (MlmExpert(joint), float(rng.uniform(0.2, 0.5))),
        ]
    )


def _random_proposal(vocab: Vocabulary, length: int, seed: int, k: float = 1.0):
    rng = np.random.default_rng(seed)
    v = len(vocab)
    lines = tuple(Sequence(tuple(rng.integers(0, v, size=length))) for _ in range(60))
    return fit_neighbor_mlm(Corpus(lines), vocab, k=k)


def check_gibbs_limit(max_vl: int = 3) -> tuple[float, float]:
    """Energy = -log joint with the joint's own conditionals as proposal:
    every acceptance probability must be 1."""
    worst = 0.0
    for v in range(2, max_vl + 1):
        for length in range(2, max_vl + 1):
            joint = TabularJoint.random(v, length, seed=100 * v + length)
            energy = EnergyModel([(NegLogJointExpert(joint), 1.0)])
            for ids in np.ndindex(*(v,) * length):
                x = Sequence(tuple(int(t) for t in ids))
                e_cur = energy.total(x)
                for i in range(length):
                    q = joint.conditional(x, i)
                    for token in range(v):
                        y = x.with_id(i, token)
                        a = accept_prob(
                            e_cur,
                            energy.total(y),
                            math.log(float(q[token])),
                            math.log(float(q[x.ids[i]])),
                        )
                        worst = max(worst, abs(1.0 - a))
    return worst, 1e-9


def check_balance(corrupt: bool = False) -> tuple[float, float]:
    vocab = _tiny_vocab(2)
    energy = _random_energy(vocab, 2, seed=5)
    proposal = _random_proposal(vocab, 2, seed=6)
    accept_fn = corrupted_accept if corrupt else accept_prob
    violation = check_detailed_balance(energy, proposal, vocab, 2, accept_fn=accept_fn)
    return violation, 1e-9 if not corrupt else 1e-3


def check_tv_convergence(v: int, length: int, steps: int) -> tuple[float, float]:
    vocab = _tiny_vocab(v)
    energy = _random_energy(vocab, length, seed=42)
    proposal = _random_proposal(vocab, length, seed=43)
    exact = enumerate_distribution(energy, vocab, length)
    init = Sequence((0,) * length)
    config = SamplerConfig(energy=energy, proposal=proposal, epochs=steps // length, seed=11)
    result = run_chain(init, config)
    emp = empirical_distribution(epoch_states(init, result), vocab, length)
    return tv_distance(emp, exact.probs), 0.05


def check_determinism() -> tuple[float, float]:
    """Two identical runs must agree bit for bit; measured value is 0/1."""
    vocab = _tiny_vocab(3)
    energy = _random_energy(vocab, 3, seed=21)
    proposal = _random_proposal(vocab, 3, seed=22)
    init = Sequence((0, 1, 2))
    config = SamplerConfig(energy=energy, proposal=proposal, epochs=20, seed=3)
    a = run_chain(init, config)
    b = run_chain(init, config)
    identical = a == b and a.trace_csv() == b.trace_csv()
    return (0.0 if identical else 1.0), 0.5


def run_checks(scale: str) -> list[CheckResult]:
    if scale not in ("tiny", "small"):
        raise ValueError(f"scale must be 'tiny' or 'small', got {scale!r}")
    plan = [
        ("gibbs_limit_acceptance", lambda: check_gibbs_limit(3), "<="),
        ("detailed_balance", lambda: check_balance(corrupt=False), "<="),
        ("detailed_balance_detects_corruption", lambda: check_balance(corrupt=True), ">"),
        ("determinism", check_determinism, "<="),
    ]
    if scale == "tiny":
        plan.append(("tv_convergence_tiny", lambda: check_tv_convergence(3, 3, 60_000), "<="))
    else:
        plan.append(("tv_convergence_small", lambda: check_tv_convergence(4, 4, 200_000), "<="))

    results = []
    for name, fn, relation in plan:
        t0 = time.time()
        measured, threshold = fn()
        passed = measured <= threshold if relation == "<=" else measured > threshold
        results.append(CheckResult(name, passed, measured, threshold, relation, time.time() - t0))
    return results
