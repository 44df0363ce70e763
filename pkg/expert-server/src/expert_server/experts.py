"""Model wrappers behind the wire protocol.

The protocol speaks whole whitespace-separated tokens; these wrappers handle
the subword work internally. Masked-LM energy is the negative sum over
subword positions of the model's logit for the true subword with that
position masked. Conditionals mask one whole token (all of its subwords
collapse to a single mask slot) and return the top-K single-piece whole-word
candidates, renormalized.

All models run in eval mode under no_grad, so identical requests yield
identical replies.
"""

from __future__ import annotations

import math

import torch
from transformers import (
    AutoModelForMaskedLM,
    AutoModelForSequenceClassification,
    AutoTokenizer,
)

DEFAULT_TOP_K = 50


class EchoExpert:
    """Constant-zero energy; the protocol conformance target."""

    serves_energy = True
    serves_conditional = False

    def energy(self, tokens: list[str]) -> float:
        return 0.0


class _BertBacked:
    def __init__(self, model_dir: str, device: str = "cpu"):
        self.device = torch.device(device)
        self.tokenizer = AutoTokenizer.from_pretrained(model_dir)

    def _pieces(self, token: str) -> list[int]:
        ids = self.tokenizer.encode(token, add_special_tokens=False)
        if not ids:
            ids = [self.tokenizer.unk_token_id]
        return ids

    def _assemble(self, tokens: list[str]) -> tuple[list[int], list[tuple[int, int]]]:
        """Subword ids with specials, plus each whole token's [start, end) span."""
        ids = [self.tokenizer.cls_token_id]
        spans = []
        for token in tokens:
            pieces = self._pieces(token)
            spans.append((len(ids), len(ids) + len(pieces)))
            ids.extend(pieces)
        ids.append(self.tokenizer.sep_token_id)
        return ids, spans


class MaskedLMEnergy(_BertBacked):
    serves_energy = True
    serves_conditional = False

    def __init__(self, model_dir: str, device: str = "cpu"):
        super().__init__(model_dir, device)
        self.model = AutoModelForMaskedLM.from_pretrained(model_dir).to(self.device).eval()

    def energy(self, tokens: list[str]) -> float:
        if not tokens:
            raise ValueError("empty token list")
        ids, spans = self._assemble(tokens)
        positions = [p for start, end in spans for p in range(start, end)]
        base = torch.tensor(ids, device=self.device)
        batch = base.repeat(len(positions), 1)
        for row, p in enumerate(positions):
            batch[row, p] = self.tokenizer.mask_token_id
        with torch.no_grad():
            logits = self.model(input_ids=batch).logits
        rows = torch.arange(len(positions), device=self.device)
        pos = torch.tensor(positions, device=self.device)
        true_ids = base[pos]
        scores = logits[rows, pos, true_ids]
        return -float(scores.sum().item())


class DiscriminatorEnergy(_BertBacked):
    serves_energy = True
    serves_conditional = False

    def __init__(self, model_dir: str, target: int, device: str = "cpu"):
        super().__init__(model_dir, device)
        self.model = (
            AutoModelForSequenceClassification.from_pretrained(model_dir).to(self.device).eval()
        )
        n = self.model.config.num_labels
        if not 0 <= target < n:
            raise ValueError(f"target {target} out of range for {n} labels")
        self.target = target

    def energy(self, tokens: list[str]) -> float:
        ids, _ = self._assemble(tokens)
        with torch.no_grad():
            logits = self.model(input_ids=torch.tensor([ids], device=self.device)).logits[0]
        logp = torch.log_softmax(logits, dim=-1)
        return -float(logp[self.target].item())


class MaskedConditional(_BertBacked):
    serves_energy = False
    serves_conditional = True

    def __init__(self, model_dir: str, device: str = "cpu", top_k: int = DEFAULT_TOP_K):
        super().__init__(model_dir, device)
        if top_k < 1:
            raise ValueError(f"top_k must be >= 1, got {top_k}")
        self.model = AutoModelForMaskedLM.from_pretrained(model_dir).to(self.device).eval()
        self.top_k = top_k
        # Candidate whole words: single-piece vocab entries that are neither
        # special tokens nor continuation pieces.
        special = set(self.tokenizer.all_special_ids)
        self._candidate_ids = []
        self._candidate_words = []
        for word, idx in sorted(self.tokenizer.get_vocab().items(), key=lambda kv: kv[1]):
            if idx in special or word.startswith("##") or word.startswith("["):
                continue
            self._candidate_ids.append(idx)
            self._candidate_words.append(word)
        if not self._candidate_ids:
            raise ValueError("tokenizer vocabulary has no whole-word candidates")

    def conditional(self, tokens: list[str], position: int) -> tuple[list[str], list[float]]:
        if not 0 <= position < len(tokens):
            raise ValueError(f"position {position} out of range for {len(tokens)} tokens")
        ids = [self.tokenizer.cls_token_id]
        mask_slot = None
        for j, token in enumerate(tokens):
            if j == position:
                mask_slot = len(ids)
                ids.append(self.tokenizer.mask_token_id)
            else:
                ids.extend(self._pieces(token))
        ids.append(self.tokenizer.sep_token_id)
        with torch.no_grad():
            logits = self.model(input_ids=torch.tensor([ids], device=self.device)).logits
        probs = torch.softmax(logits[0, mask_slot], dim=-1)
        cand = probs[self._candidate_ids]
        k = min(self.top_k, len(self._candidate_ids))
        top = torch.topk(cand, k)
        kept = top.values / top.values.sum()
        words = [self._candidate_words[i] for i in top.indices.tolist()]
        return words, [math.log(float(p)) for p in kept]
