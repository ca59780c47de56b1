"""
Computation endpoints.

Invariant and signature results are cached by the ETag of the normalized
request body; a matching If-None-Match is answered with 304. Computations run
in a worker thread so the event loop stays responsive.
"""

import asyncio
import logging
import time
from typing import Annotated, Any

from fastapi import APIRouter, Header, Path, Request, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field
from slowapi import Limiter

from app.config import get_settings
from app.services import hurwitz
from app.services.cache import get_cache
from app.services.invariant import compute_invariant
from app.services.meyer import fibration_signature
from app.services.metrics import get_metrics
from app.services.sources import resolve_representation, resolve_tuple
from app.services.table import compute_table, render_table

logger = logging.getLogger(__name__)

router = APIRouter()
settings = get_settings()


def get_rate_limit_key(request: Request) -> str:
    """Rate limit per client IP (first X-Forwarded-For hop when proxied)."""
    forwarded = request.headers.get("X-Forwarded-For")
    if forwarded:
        return forwarded.split(",")[0].strip()
    return request.client.host if request.client else "unknown"


limiter = Limiter(key_func=get_rate_limit_key)


class TupleRequest(BaseModel):
    """A tuple source plus the representation to evaluate it in."""
    genus: int = Field(2, ge=1, le=8)
    expression: str | None = Field(None, max_length=200, description="Built-in expression, e.g. 'xi1 #d xi1'")
    word: str | None = Field(None, max_length=10000, description="Positive word, e.g. 'c1 c2 | ^6'")
    document: dict[str, Any] | None = Field(None, description="Tuple document")
    ring: str = "Z"
    representation: str = "symplectic"
    reduce: bool = False


class InvariantRequest(TupleRequest):
    ell: int = Field(1, ge=1)
    ell_sweep: bool = False


class MovesRequest(BaseModel):
    document: dict[str, Any]
    script: str = Field(..., max_length=100000, description="Lines 'forward i', 'backward i', 'conjugate w'")


def _resolve(body: TupleRequest):
    t = resolve_tuple(body.genus, builtin=body.expression, word=body.word, document=body.document)
    rep = resolve_representation(
        body.representation, body.genus, body.ring,
        reduce=body.reduce, block_size=settings.word_block_size,
    )
    return t, rep


def _invariant(body: InvariantRequest) -> dict[str, Any]:
    t, rep = _resolve(body)
    return compute_invariant(t, rep, ell=body.ell, ell_sweep=body.ell_sweep).to_dict()


def _signature(body: TupleRequest) -> dict[str, Any]:
    t, rep = _resolve(body)
    return {"label": t.label, **fibration_signature(t, rep).to_dict()}


async def _cached(kind: str, body: BaseModel, compute, if_none_match: str | None) -> Response:
    cache = get_cache()
    metrics = get_metrics()
    key = cache.compute_etag({"kind": kind, **body.model_dump()})
    cached = cache.get(key)
    if cached is not None:
        metrics.record_cache_hit()
        if if_none_match and if_none_match == cached.etag:
            return Response(status_code=304, headers={"ETag": cached.etag, "Cache-Control": "no-cache"})
        return JSONResponse(cached.data, headers={"ETag": cached.etag, "Cache-Control": "no-cache"})
    metrics.record_cache_miss()
    started = time.perf_counter()
    data = await asyncio.to_thread(compute, body)
    metrics.record_computation(kind, time.perf_counter() - started)
    entry = cache.set(key, data)
    return JSONResponse(data, headers={"ETag": entry.etag, "Cache-Control": "no-cache"})


@router.post("/invariant")
@limiter.limit(settings.rate_limit)
async def post_invariant(
    request: Request,
    body: InvariantRequest,
    if_none_match: Annotated[str | None, Header(alias="If-None-Match")] = None,
):
    """
    Compute the bilinear-form invariant of a tuple.

    Returns:
        200: InvariantResult JSON with ETag header
        304: Not Modified (same request, matching ETag)
        400: Computation error (product not the identity, unknown letter, ...)
        422: Invalid request or tuple document
        429: Rate limit exceeded
    """
    return await _cached("invariant", body, _invariant, if_none_match)


@router.post("/signature")
@limiter.limit(settings.rate_limit)
async def post_signature(
    request: Request,
    body: TupleRequest,
    if_none_match: Annotated[str | None, Header(alias="If-None-Match")] = None,
):
    """Signature of the fibration by the Meyer sum and by the invariant form."""
    return await _cached("signature", body, _signature, if_none_match)


@router.get("/table/{genus}")
@limiter.limit(settings.rate_limit)
async def get_table(request: Request, genus: Annotated[int, Path(ge=2, le=3)]):
    """Recompute the table rows of one genus; rows without a built-in monodromy carry printed values only."""
    started = time.perf_counter()
    results = await asyncio.to_thread(compute_table, genus)
    get_metrics().record_computation("table", time.perf_counter() - started)
    computed = [result for result in results if result.row.computable]
    return {
        "genus": genus,
        "rows": [result.to_dict() for result in results],
        "passed": all(result.passed for result in computed),
        "text": render_table(results),
    }


@router.post("/moves")
@limiter.limit(settings.rate_limit)
async def post_moves(request: Request, body: MovesRequest):
    """Apply a move script to a tuple document and return the resulting document."""
    t = hurwitz.tuple_from_document(body.document)
    moves = hurwitz.parse_move_script(body.script)
    result = hurwitz.apply_script(t, moves)
    logger.debug("Applied %d moves to a tuple of length %d", len(moves), t.m)
    return {"moves": len(moves), "document": result.to_json()}
