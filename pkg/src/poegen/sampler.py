"""Single-site Metropolis-Hastings chain over fixed-length sequences.

Each step masks one non-frozen position, draws a replacement token from the
proposal model's conditional at that position, and accepts the move with

    min(1, exp((E_cur - E_prop) + log q(old | rest) - log q(new | rest)))

computed in log space. An epoch visits every non-frozen position once in a
fresh random permutation (an i.i.d.-uniform position mode exists for the
reversibility checks, where the uniform kernel is the one with the clean
detailed-balance argument).

RNG discipline: one stream per chain, consumed in a fixed documented order -
per epoch a permutation draw (permutation mode only), then per step one
uniform for the position (with-replacement mode only), one uniform for the
proposal (inverse-CDF), and one uniform for the accept/reject coin. Identical
(init, config) therefore reproduces the chain bit for bit.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .experts import EnergyModel
from .text import MASK_ID, Sequence


class PositionOrder(str, Enum):
    PERMUTATION = "random-permutation"
    WITH_REPLACEMENT = "with-replacement"


@dataclass(frozen=True)
class ProposalMove:
    """One proposed single-position substitution and its proposal log-probs."""

    position: int
    old_id: int
    proposed_id: int
    log_q_fwd: float
    log_q_rev: float

    def __post_init__(self):
        for name in ("log_q_fwd", "log_q_rev"):
            v = getattr(self, name)
            if not math.isfinite(v) or v > 0.0:
                raise ValueError(f"{name} must be finite and <= 0, got {v}")


@dataclass(frozen=True)
class StepRecord:
    step: int
    position: int
    old_id: int
    new_id: int
    delta_e: float
    accept_prob: float
    accepted: bool
    total_e: float


@dataclass(frozen=True)
class ChainResult:
    final: Sequence
    trace: tuple[StepRecord, ...]
    acceptance_rate: float

    def trace_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(
            ["step", "position", "old_id", "new_id", "delta_e", "accept_prob", "accepted", "total_e"]
        )
        for r in self.trace:
            writer.writerow(
                [r.step, r.position, r.old_id, r.new_id,
                 repr(r.delta_e), repr(r.accept_prob), int(r.accepted), repr(r.total_e)]
            )
        return buf.getvalue()

    def trace_jsonl(self) -> str:
        lines = []
        for r in self.trace:
            lines.append(json.dumps({
                "step": r.step, "position": r.position, "old_id": r.old_id,
                "new_id": r.new_id, "delta_e": r.delta_e, "accept_prob": r.accept_prob,
                "accepted": r.accepted, "total_e": r.total_e,
            }, sort_keys=True))
        return "\n".join(lines) + ("\n" if lines else "")


@dataclass
class SamplerConfig:
    energy: EnergyModel
    proposal: object  # anything with conditional(seq, i) -> probs over vocab
    epochs: int = 8
    seed: int = 0
    position_order: PositionOrder = PositionOrder.PERMUTATION

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        self.position_order = PositionOrder(self.position_order)


def init_prompted(prompt: Sequence, total_length: int) -> Sequence:
    """Start state for prompted generation: the prompt frozen in place, every
    remaining position a free MASK token."""
    n = len(prompt)
    if n >= total_length:
        raise ValueError(f"prompt length {n} must be < total length {total_length}")
    ids = prompt.ids + (MASK_ID,) * (total_length - n)
    frozen = (True,) * n + (False,) * (total_length - n)
    return Sequence(ids, frozen)


def init_revision(source: Sequence, frozen_positions: set[int] | None = None) -> Sequence:
    """Start state for revision: a copy of the source, fully revisable unless
    `frozen_positions` pins some positions (restricted-edit mode pins all but
    the editable ones)."""
    if len(source) == 0:
        raise ValueError("empty source sequence")
    if frozen_positions is None:
        frozen = (False,) * len(source)
    else:
        bad = [i for i in frozen_positions if not 0 <= i < len(source)]
        if bad:
            raise ValueError(f"frozen positions {bad} out of range for length {len(source)}")
        frozen = tuple(i in frozen_positions for i in range(len(source)))
    if all(frozen):
        raise ValueError("every position is frozen; nothing to revise")
    return Sequence(source.ids, frozen)


def accept_prob(e_cur: float, e_prop: float, log_q_fwd: float, log_q_rev: float) -> float:
    """Metropolis-Hastings acceptance probability, always in (0, 1].

    The exponent (E_cur - E_prop) + log_q_rev - log_q_fwd is clamped to <= 0
    before exponentiation, so energy improvements map to certain acceptance
    and no overflow can occur.
    """
    for name, v in (("e_cur", e_cur), ("e_prop", e_prop),
                    ("log_q_fwd", log_q_fwd), ("log_q_rev", log_q_rev)):
        if not math.isfinite(v):
            raise ValueError(f"non-finite {name}: {v}")
    exponent = (e_cur - e_prop) + log_q_rev - log_q_fwd
    return math.exp(min(exponent, 0.0))


def _draw_from_cdf(proposal, seq: Sequence, i: int, u: float) -> tuple[int, np.ndarray]:
    """Inverse-CDF draw; consumes exactly the one uniform it is given."""
    if hasattr(proposal, "conditional_cdf"):
        cdf = proposal.conditional_cdf(seq, i)
        token = int(np.searchsorted(cdf, u, side="right"))
        token = min(token, len(cdf) - 1)  # guard u == 1.0 edge
        return token, cdf
    probs = proposal.conditional(seq, i)
    cdf = np.cumsum(probs)
    token = min(int(np.searchsorted(cdf, u, side="right")), len(cdf) - 1)
    return token, cdf


def _log_q(cdf: np.ndarray, token: int) -> float:
    p = float(cdf[token] - (cdf[token - 1] if token > 0 else 0.0))
    if p <= 0.0:
        raise ValueError(f"proposal assigned zero probability to token {token}")
    return math.log(min(p, 1.0))


def step(
    x: Sequence,
    i: int,
    energy: EnergyModel,
    proposal,
    rng: np.random.Generator,
    e_cur: float | None = None,
) -> tuple[Sequence, StepRecord, float]:
    """One masked-position proposal plus accept/reject at position i.

    Returns the (possibly unchanged) sequence, the step record, and the total
    energy of the returned sequence. `e_cur` lets a chain carry the current
    energy forward; it must be bit-equal to energy.total(x), which holds
    because experts are pure.
    """
    if x.frozen[i]:
        raise ValueError(f"position {i} is frozen")
    if e_cur is None:
        e_cur = energy.total(x)

    u_prop = float(rng.random())
    proposed_id, cdf = _draw_from_cdf(proposal, x, i, u_prop)
    old_id = x.ids[i]
    u_accept = float(rng.random())

    if proposed_id == old_id:
        # Self-move: the proposed sequence is the current one, so the energy
        # and proposal terms cancel exactly and acceptance is 1.
        record = StepRecord(0, i, old_id, proposed_id, 0.0, 1.0, True, e_cur)
        return x, record, e_cur

    move = ProposalMove(i, old_id, proposed_id, _log_q(cdf, proposed_id), _log_q(cdf, old_id))
    x_prop = x.with_id(i, proposed_id)
    e_prop = energy.total(x_prop)
    a = accept_prob(e_cur, e_prop, move.log_q_fwd, move.log_q_rev)
    accepted = u_accept < a
    if accepted:
        return x_prop, StepRecord(0, i, old_id, proposed_id, e_prop - e_cur, a, True, e_prop), e_prop
    return x, StepRecord(0, i, old_id, proposed_id, e_prop - e_cur, a, False, e_cur), e_cur


def run_chain(init: Sequence, config: SamplerConfig) -> ChainResult:
    """Run the chain for config.epochs epochs from `init`.

    Permutation order visits each non-frozen position once per epoch; the
    with-replacement mode draws positions i.i.d. uniform, one epoch's worth
    of steps per epoch. Deterministic given (init, config).
    """
    free = init.free_positions
    if len(init) == 0 or not free:
        raise ValueError("init must be non-empty with at least one non-frozen position")

    rng = np.random.default_rng(config.seed)
    x = init
    e_cur = config.energy.total(x)
    trace: list[StepRecord] = []
    n_accepted = 0
    step_index = 0

    for _ in range(config.epochs):
        if config.position_order is PositionOrder.PERMUTATION:
            order = [free[j] for j in rng.permutation(len(free))]
        else:
            order = [free[int(rng.integers(len(free)))] for _ in range(len(free))]
        for i in order:
            x, record, e_cur = step(x, i, config.energy, config.proposal, rng, e_cur)
            record = StepRecord(
                step_index, record.position, record.old_id, record.new_id,
                record.delta_e, record.accept_prob, record.accepted, record.total_e,
            )
            trace.append(record)
            n_accepted += record.accepted
            step_index += 1

    return ChainResult(x, tuple(trace), n_accepted / len(trace))


def run_ensemble(inits: list[Sequence], config: SamplerConfig, n_chains: int) -> list[ChainResult]:
    """Independent chains over `inits` with per-chain seeds config.seed + index.

    `inits` is cycled if shorter than n_chains; results keep chain order.
    """
    if n_chains < 1:
        raise ValueError(f"n_chains must be >= 1, got {n_chains}")
    if not inits:
        raise ValueError("no initial sequences")
    results = []
    for c in range(n_chains):
        chain_config = SamplerConfig(
            energy=config.energy,
            proposal=config.proposal,
            epochs=config.epochs,
            seed=config.seed + c,
            position_order=config.position_order,
        )
        results.append(run_chain(inits[c % len(inits)], chain_config))
    return results


def epoch_states(init: Sequence, result: ChainResult) -> list[tuple[int, ...]]:
    """Reconstruct the chain state at each epoch boundary from the trace.

    Used for thinning: one retained state per epoch reduces autocorrelation
    without changing the stationary law.
    """
    free = init.free_positions
    if not free:
        raise ValueError("init has no non-frozen positions")
    per_epoch = len(free)
    if len(result.trace) % per_epoch != 0:
        raise ValueError("trace length is not a whole number of epochs")
    ids = list(init.ids)
    states = []
    for k, rec in enumerate(result.trace, start=1):
        if rec.accepted:
            ids[rec.position] = rec.new_id
        if k % per_epoch == 0:
            states.append(tuple(ids))
    return states
