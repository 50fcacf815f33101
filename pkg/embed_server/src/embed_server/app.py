"""FastAPI wiring for the embedding sidecar.

Endpoints:
  POST /v1/embed      {texts, normalize?}            -> {vectors, dim, model}
  POST /v1/translate  {texts, src_lang, tgt_lang}    -> {translations}
  GET  /health                                       -> {model, dim, max_batch}

Errors: 400 malformed body, 413 batch over the advertised limit,
501 unsupported translation pair, 503 model not loaded.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .model import Backend, Settings


class EmbedRequest(BaseModel):
    texts: list[str] = Field(min_length=1)
    normalize: bool = True


class TranslateRequest(BaseModel):
    texts: list[str]
    src_lang: str
    tgt_lang: str


def create_app(settings: Settings | None = None) -> FastAPI:
    settings = settings or Settings.from_env()
    backend = Backend(settings)
    app = FastAPI(title="embed-server")

    @app.exception_handler(RequestValidationError)
    async def malformed(request: Request, exc: RequestValidationError):
        # the wire contract promises 400, not FastAPI's default 422
        return JSONResponse(status_code=400,
                            content={"detail": exc.errors()[:3]})

    @app.get("/health")
    def health():
        return {"model": backend.name, "dim": backend.dim,
                "max_batch": settings.max_batch}

    @app.post("/v1/embed")
    def embed(req: EmbedRequest):
        if len(req.texts) > settings.max_batch:
            raise HTTPException(
                status_code=413,
                detail=f"batch of {len(req.texts)} exceeds max_batch "
                       f"{settings.max_batch}")
        if any(not t for t in req.texts):
            raise HTTPException(status_code=400,
                                detail="texts must be non-empty strings")
        if not backend.loaded:
            raise HTTPException(status_code=503, detail="model not loaded")
        vectors = backend.embed(req.texts, normalize=req.normalize)
        return {"vectors": [row.tolist() for row in vectors],
                "dim": backend.dim, "model": backend.name}

    @app.post("/v1/translate")
    def translate(req: TranslateRequest):
        if not backend.loaded:
            raise HTTPException(status_code=503, detail="model not loaded")
        translations = backend.translate(req.texts, req.src_lang, req.tgt_lang)
        if translations is None:
            raise HTTPException(
                status_code=501,
                detail=f"translation pair {req.src_lang}->{req.tgt_lang} "
                       "not supported")
        return {"translations": translations}

    return app
