"""Server configuration: which experts to serve and which models back them."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .experts import (
    DEFAULT_TOP_K,
    DiscriminatorEnergy,
    EchoExpert,
    MaskedConditional,
    MaskedLMEnergy,
)

KINDS = {"echo", "mlm-energy", "discriminator", "conditional"}


@dataclass(frozen=True)
class ServedExpert:
    name: str
    kind: str
    model: str | None = None
    device: str = "cpu"
    top_k: int = DEFAULT_TOP_K
    target: int = 0

    def __post_init__(self):
        if not self.name:
            raise ValueError("expert name must be nonempty")
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}; expected one of {sorted(KINDS)}")
        if self.kind != "echo" and not self.model:
            raise ValueError(f"expert {self.name!r}: kind {self.kind!r} needs a model")


def load_server_config(path: str | Path) -> list[ServedExpert]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    entries = payload.get("experts")
    if not entries:
        raise ValueError(f"{path}: config must list at least one expert")
    specs = [ServedExpert(**entry) for entry in entries]
    names = [s.name for s in specs]
    if len(set(names)) != len(names):
        raise ValueError(f"{path}: duplicate expert names")
    return specs


def build_registry(specs: list[ServedExpert], base_dir: Path | None = None) -> dict:
    """Load every configured model; any load failure aborts startup."""
    registry = {}
    for spec in specs:
        model = spec.model
        if model and base_dir is not None and not Path(model).is_absolute():
            candidate = base_dir / model
            if candidate.exists():
                model = str(candidate)
        try:
            if spec.kind == "echo":
                registry[spec.name] = EchoExpert()
            elif spec.kind == "mlm-energy":
                registry[spec.name] = MaskedLMEnergy(model, device=spec.device)
            elif spec.kind == "discriminator":
                registry[spec.name] = DiscriminatorEnergy(model, spec.target, device=spec.device)
            elif spec.kind == "conditional":
                registry[spec.name] = MaskedConditional(model, device=spec.device, top_k=spec.top_k)
        except Exception as exc:
            raise RuntimeError(f"failed to load expert {spec.name!r}: {exc}") from exc
    return registry
