"""HTTP client for black-box expert services.

A remote service can play either role an expert plays here: score sequences
(POST /v1/energy) or propose tokens for one masked position
(POST /v1/conditional). Requests are canonical JSON (sorted keys, compact
separators) so wire bytes are reproducible and can be pinned by golden
fixtures. Token strings travel on the wire, never local ids.
"""

from __future__ import annotations

import json
import logging
import math
import time
import warnings
from dataclasses import dataclass

import numpy as np
import requests

from .experts import EnergyExpert
from .text import Sequence, Vocabulary, detokenize

log = logging.getLogger(__name__)

BACKOFF_BASE_S = 0.1
BACKOFF_FACTOR = 2.0
NORMALIZATION_TOLERANCE = 1e-3
# Mixed into remote conditionals so every local token keeps nonzero proposal
# probability; the chain stays ergodic even when the server returns top-K.
UNIFORM_FLOOR = 1e-4


class TransportError(RuntimeError):
    """The service could not be reached (after retries) or returned 5xx."""


class ProtocolError(RuntimeError):
    """The service answered, but the payload violates the protocol."""


@dataclass(frozen=True)
class RemoteExpertEndpoint:
    base_url: str
    name: str
    timeout_ms: int = 5000
    retries: int = 2

    def __post_init__(self):
        if self.timeout_ms <= 0:
            raise ValueError(f"timeout must be > 0, got {self.timeout_ms}")
        if not self.name:
            raise ValueError("expert name must be nonempty")

    def url(self, path: str) -> str:
        return self.base_url.rstrip("/") + path


def encode_request(payload: dict) -> bytes:
    """Canonical wire encoding; both client and fixtures use this."""
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")


def _post(endpoint: RemoteExpertEndpoint, path: str, payload: dict, *, sleep=time.sleep) -> dict:
    body = encode_request(payload)
    url = endpoint.url(path)
    last_error: Exception | None = None
    for attempt in range(endpoint.retries + 1):
        if attempt:
            sleep(BACKOFF_BASE_S * BACKOFF_FACTOR ** (attempt - 1))
        try:
            resp = requests.post(
                url,
                data=body,
                headers={"Content-Type": "application/json"},
                timeout=endpoint.timeout_ms / 1000.0,
            )
        except requests.RequestException as exc:
            last_error = exc
            continue
        if resp.status_code >= 500:
            last_error = TransportError(f"{url}: HTTP {resp.status_code}")
            continue
        if resp.status_code != 200:
            raise ProtocolError(f"{url}: HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            return resp.json()
        except ValueError as exc:
            raise ProtocolError(f"{url}: response is not JSON") from exc
    raise TransportError(
        f"{url}: unreachable after {endpoint.retries + 1} attempts: {last_error}"
    )


def remote_energy(endpoint: RemoteExpertEndpoint, tokens: list[str], *, sleep=time.sleep) -> float:
    """Ask the service to score a token sequence; the reply must be finite."""
    reply = _post(endpoint, "/v1/energy", {"expert": endpoint.name, "tokens": list(tokens)}, sleep=sleep)
    if "energy" not in reply:
        raise ProtocolError(f"{endpoint.name}: reply missing 'energy': {reply}")
    energy = reply["energy"]
    if not isinstance(energy, (int, float)) or not math.isfinite(float(energy)):
        raise ProtocolError(f"{endpoint.name}: non-finite energy {energy!r}")
    return float(energy)


def remote_conditional(
    endpoint: RemoteExpertEndpoint, tokens: list[str], position: int, *, sleep=time.sleep
) -> tuple[list[str], np.ndarray]:
    """Fetch the service's distribution over its vocabulary for one masked
    position. Validates that exp(logprobs) sums to 1 within 1e-3, then
    renormalizes exactly."""
    if not 0 <= position < len(tokens):
        raise ValueError(f"position {position} out of range for {len(tokens)} tokens")
    reply = _post(
        endpoint,
        "/v1/conditional",
        {"expert": endpoint.name, "position": position, "tokens": list(tokens)},
        sleep=sleep,
    )
    if "tokens" not in reply or "logprobs" not in reply:
        raise ProtocolError(f"{endpoint.name}: reply missing tokens/logprobs")
    cand = list(reply["tokens"])
    logprobs = reply["logprobs"]
    if len(cand) != len(logprobs):
        raise ProtocolError(
            f"{endpoint.name}: {len(cand)} tokens but {len(logprobs)} logprobs"
        )
    if not cand:
        raise ProtocolError(f"{endpoint.name}: empty candidate list")
    probs = np.exp(np.asarray(logprobs, dtype=float))
    total = float(probs.sum())
    if not math.isfinite(total) or abs(total - 1.0) > NORMALIZATION_TOLERANCE:
        raise ProtocolError(
            f"{endpoint.name}: conditional mass {total} outside 1 +/- {NORMALIZATION_TOLERANCE}"
        )
    if abs(total - 1.0) > 1e-6:
        warnings.warn(
            f"{endpoint.name}: conditional mass {total:.6f}; renormalizing", stacklevel=2
        )
    return cand, probs / total


class RemoteEnergyExpert(EnergyExpert):
    """Energy expert backed by a remote service; sends whole token strings."""

    kind = "remote"

    def __init__(self, endpoint: RemoteExpertEndpoint, vocab: Vocabulary):
        self.endpoint = endpoint
        self.vocab = vocab

    def energy(self, seq: Sequence) -> float:
        return remote_energy(self.endpoint, detokenize(seq, self.vocab).split())

    def describe(self) -> str:
        return f"remote({self.endpoint.name})"


class RemoteProposal:
    """Proposal model backed by a remote conditional service.

    The remote distribution is restricted to tokens the local vocabulary
    knows (dropped out-of-vocabulary mass is logged), renormalized, and mixed
    with a small uniform floor so every local token stays proposable.
    """

    def __init__(self, endpoint: RemoteExpertEndpoint, vocab: Vocabulary):
        self.endpoint = endpoint
        self.vocab = vocab

    def conditional(self, seq: Sequence, i: int) -> np.ndarray:
        tokens = [self.vocab.token_of(t) for t in seq.ids]
        cand, probs = remote_conditional(self.endpoint, tokens, i)
        local = np.zeros(len(self.vocab))
        dropped = 0.0
        for token, p in zip(cand, probs):
            if token in self.vocab:
                local[self.vocab.id_of(token)] += p
            else:
                dropped += p
        if dropped > 0.0:
            log.warning(
                "%s: dropped %.4f out-of-vocabulary proposal mass", self.endpoint.name, dropped
            )
        kept = float(local.sum())
        if kept <= 0.0:
            raise ProtocolError(
                f"{self.endpoint.name}: no candidate token is in the local vocabulary"
            )
        local /= kept
        uniform = 1.0 / len(self.vocab)
        return (1.0 - UNIFORM_FLOOR) * local + UNIFORM_FLOOR * uniform
