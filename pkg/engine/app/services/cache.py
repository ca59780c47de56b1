"""
In-memory result cache with TTL and ETag support.
Keyed by the ETag of the normalized request, so identical requests share one entry.
"""

import hashlib
import json
import time
from dataclasses import dataclass
from threading import Lock
from typing import Any

from app.config import get_settings


@dataclass
class CacheEntry:
    """Single cache entry with the computed result, its etag and expiration."""
    data: dict[str, Any]
    etag: str
    expires_at: float

    def is_expired(self) -> bool:
        return time.time() > self.expires_at


class ResultCache:
    """
    In-memory cache for computation results.

    Key: quoted ETag of the request document
    Value: CacheEntry holding the response body
    """

    def __init__(self):
        self._cache: dict[str, CacheEntry] = {}
        self._lock = Lock()
        self._settings = get_settings()

    @staticmethod
    def compute_etag(data: dict[str, Any]) -> str:
        """
        Compute ETag from a JSON-serializable document using SHA256.

        Returns:
            Quoted ETag string (e.g., '"abc123..."')
        """
        json_str = json.dumps(data, sort_keys=True, ensure_ascii=False)
        hash_value = hashlib.sha256(json_str.encode()).hexdigest()[:16]
        return f'"{hash_value}"'

    def get(self, key: str) -> CacheEntry | None:
        """Cached entry for key, or None if missing or expired."""
        with self._lock:
            entry = self._cache.get(key)
            if entry is not None and entry.is_expired():
                del self._cache[key]
                return None
            return entry

    def set(self, key: str, data: dict[str, Any]) -> CacheEntry:
        """Store a result under key; the entry's etag is the key itself."""
        entry = CacheEntry(data=data, etag=key, expires_at=time.time() + self._settings.cache_ttl)
        with self._lock:
            self._cache[key] = entry
        return entry

    def clear(self):
        with self._lock:
            self._cache.clear()

    def cleanup_expired(self) -> int:
        """Remove all expired entries; returns how many were dropped."""
        now = time.time()
        with self._lock:
            expired_keys = [key for key, entry in self._cache.items() if entry.expires_at < now]
            for key in expired_keys:
                del self._cache[key]
        return len(expired_keys)

    def size(self) -> int:
        with self._lock:
            return len(self._cache)


# Singleton instance
_cache: ResultCache | None = None


def get_cache() -> ResultCache:
    """Get singleton cache instance."""
    global _cache
    if _cache is None:
        _cache = ResultCache()
    return _cache
