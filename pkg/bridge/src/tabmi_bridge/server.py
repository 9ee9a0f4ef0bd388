"""HTTP scoring service implementing the backend wire protocol.

POST /v1/score  {"context": [{"feature": str, "value": str}, ...],
                 "target": str, "candidates": [str, ...]}
                -> {"logits": [float, ...]}   (one per candidate, in order)
GET  /v1/health -> {"ok": true, "model": str, "max_in_flight": int}

Replies 503 when more than max_in_flight requests are being scored and
400 on malformed request bodies.
"""
from __future__ import annotations

import threading

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .model import load_bridge
from .scoring import score_candidates


class ContextItem(BaseModel):
    feature: str
    value: str


class ScoreRequest(BaseModel):
    context: list[ContextItem]
    target: str
    candidates: list[str] = Field(min_length=1)


def create_app(model_dir: str, max_in_flight: int = 4) -> FastAPI:
    model, vocab, config = load_bridge(model_dir)
    slots = threading.Semaphore(max_in_flight)
    app = FastAPI()

    @app.exception_handler(RequestValidationError)
    async def malformed(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.get("/v1/health")
    def health():
        return {"ok": True, "model": model_dir, "max_in_flight": max_in_flight}

    @app.post("/v1/score")
    def score(req: ScoreRequest):
        if not slots.acquire(blocking=False):
            return JSONResponse(status_code=503,
                                content={"error": "over capacity"})
        try:
            logits = score_candidates(
                model, vocab,
                [(c.feature, c.value) for c in req.context],
                req.target, req.candidates,
                length_normalize=config.length_normalize,
            )
        finally:
            slots.release()
        return {"logits": logits}

    return app
