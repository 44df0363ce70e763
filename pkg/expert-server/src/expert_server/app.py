"""The two-endpoint HTTP surface: /v1/energy and /v1/conditional.

Unknown expert names get 404 with a JSON error body; model failures during a
request get 500 the same way. Response shapes mirror the golden protocol
fixtures exactly: {"energy": number} and {"tokens": [...], "logprobs": [...]}.
"""

from __future__ import annotations

import math

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel


class EnergyRequest(BaseModel):
    expert: str
    tokens: list[str]


class ConditionalRequest(BaseModel):
    expert: str
    tokens: list[str]
    position: int


def create_app(registry: dict) -> FastAPI:
    app = FastAPI(title="expert-server", docs_url=None, redoc_url=None)

    def _lookup(name: str, needs: str):
        expert = registry.get(name)
        if expert is None or not getattr(expert, needs, False):
            return None
        return expert

    @app.post("/v1/energy")
    def energy(request: EnergyRequest):
        expert = _lookup(request.expert, "serves_energy")
        if expert is None:
            return JSONResponse(status_code=404, content={"error": "unknown expert"})
        try:
            value = expert.energy(request.tokens)
        except ValueError as exc:
            return JSONResponse(status_code=400, content={"error": str(exc)})
        except Exception as exc:
            return JSONResponse(status_code=500, content={"error": str(exc)})
        if not math.isfinite(value):
            return JSONResponse(status_code=500, content={"error": "model produced non-finite energy"})
        return {"energy": value}

    @app.post("/v1/conditional")
    def conditional(request: ConditionalRequest):
        expert = _lookup(request.expert, "serves_conditional")
        if expert is None:
            return JSONResponse(status_code=404, content={"error": "unknown expert"})
        try:
            tokens, logprobs = expert.conditional(request.tokens, request.position)
        except ValueError as exc:
            return JSONResponse(status_code=400, content={"error": str(exc)})
        except Exception as exc:
            return JSONResponse(status_code=500, content={"error": str(exc)})
        return {"tokens": tokens, "logprobs": logprobs}

    return app
