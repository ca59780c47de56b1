"""
FastAPI application entry point.
"""

import asyncio
import logging
import os

from contextlib import asynccontextmanager
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from slowapi import Limiter, _rate_limit_exceeded_handler
from slowapi.errors import RateLimitExceeded
from slowapi.util import get_remote_address

from app.api.invariants import router as invariants_router
from app.config import get_settings
from app.services.cache import get_cache
from app.services.errors import HurwitzFormsError
from app.services.metrics import get_metrics

logger = logging.getLogger(__name__)

settings = get_settings()

# Version from build arg (via ENV)
API_VERSION = os.environ.get("APP_VERSION", "dev")

limiter = Limiter(key_func=get_remote_address, default_limits=[settings.rate_limit])

cleanup_task = None


async def periodic_cleanup():
    """Drop expired cache entries every ten minutes."""
    while True:
        try:
            removed = get_cache().cleanup_expired()
            if removed > 0:
                logger.info("Removed %d expired cache entries", removed)
        except Exception:
            logger.exception("Cache cleanup failed")
        await asyncio.sleep(600)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Start the cache cleanup task; cancel it on shutdown."""
    global cleanup_task
    cleanup_task = asyncio.create_task(periodic_cleanup())
    logger.info("Service started (version %s)", API_VERSION)

    yield

    if cleanup_task:
        cleanup_task.cancel()
        try:
            await cleanup_task
        except asyncio.CancelledError:
            pass
    logger.info("Service stopped")


app = FastAPI(
    title="hurwitz-forms API",
    description="Bilinear-form invariants of Hurwitz tuples and Lefschetz fibrations",
    version=API_VERSION,
    lifespan=lifespan,
)

app.state.limiter = limiter
app.add_exception_handler(RateLimitExceeded, _rate_limit_exceeded_handler)


@app.exception_handler(HurwitzFormsError)
async def computation_error_handler(request: Request, exc: HurwitzFormsError):
    """400 for computation errors, 422 for malformed documents."""
    get_metrics().record_error(exc.error_type)
    status_code = 422 if exc.error_type in ("SCHEMA", "PARSE", "EMPTY", "SOURCE") else 400
    return JSONResponse(status_code=status_code, content=exc.to_dict())


app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"] if settings.cors_allow_all else settings.cors_origins,
    allow_credentials=not settings.cors_allow_all,  # "*" forbids credentials
    allow_methods=["GET", "POST", "OPTIONS"],
    allow_headers=["*"],
    expose_headers=["ETag"],
)

app.include_router(invariants_router, prefix="/api")


@app.get("/health")
async def health_check():
    """Health check endpoint with version info."""
    return {"status": "ok", "version": API_VERSION}


@app.get("/stats")
async def get_stats():
    """Computation counters, cache hit rate, errors by type and cache size."""
    return {
        **get_metrics().to_dict(),
        "cache_size": get_cache().size(),
    }
