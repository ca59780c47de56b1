"""
Computation metrics for the HTTP service.
Thread-safe counters; computations run in worker threads.
"""

from collections import deque
from dataclasses import dataclass, field
from datetime import datetime, timezone
from threading import Lock
from time import time
from typing import Any


MAX_TIMESTAMPS = 100000


@dataclass
class Metrics:
    """Counters for computations, cache use and errors."""

    invariants_computed: int = 0
    signatures_computed: int = 0
    tables_computed: int = 0
    cache_hits: int = 0
    cache_misses: int = 0
    errors: int = 0
    started_at: datetime = field(default_factory=lambda: datetime.now(timezone.utc))
    per_error: dict[str, int] = field(default_factory=dict)
    compute_seconds: float = 0.0

    _request_times: deque = field(default_factory=lambda: deque(maxlen=MAX_TIMESTAMPS))

    _lock: Lock = field(default_factory=Lock, repr=False)

    def record_computation(self, kind: str, seconds: float) -> None:
        """Record one finished computation of kind 'invariant', 'signature' or 'table'."""
        with self._lock:
            if kind == "invariant":
                self.invariants_computed += 1
            elif kind == "signature":
                self.signatures_computed += 1
            elif kind == "table":
                self.tables_computed += 1
            self.compute_seconds += seconds

    def record_cache_hit(self) -> None:
        with self._lock:
            self.cache_hits += 1
            self._request_times.append(time())

    def record_cache_miss(self) -> None:
        with self._lock:
            self.cache_misses += 1
            self._request_times.append(time())

    def record_error(self, error_type: str = "UNKNOWN") -> None:
        with self._lock:
            self.errors += 1
            self.per_error[error_type] = self.per_error.get(error_type, 0) + 1

    def _count_in_window(self, timestamps: deque, window_seconds: int) -> int:
        """Count timestamps within the last N seconds."""
        cutoff = time() - window_seconds
        count = 0
        for t in reversed(timestamps):
            if t > cutoff:
                count += 1
            else:
                break
        return count

    def get_server_rpm(self) -> float:
        """Requests per minute over the last 60 seconds."""
        with self._lock:
            return round(self._count_in_window(self._request_times, 60), 1)

    def to_dict(self) -> dict[str, Any]:
        with self._lock:
            now = datetime.now(timezone.utc)
            total_requests = self.cache_hits + self.cache_misses
            computations = self.invariants_computed + self.signatures_computed + self.tables_computed
            return {
                "uptime_seconds": int((now - self.started_at).total_seconds()),
                "started_at": self.started_at.isoformat(),
                "invariants_computed": self.invariants_computed,
                "signatures_computed": self.signatures_computed,
                "tables_computed": self.tables_computed,
                "mean_compute_seconds": round(self.compute_seconds / max(1, computations), 3),
                "cache_hits": self.cache_hits,
                "cache_misses": self.cache_misses,
                "total_requests": total_requests,
                "cache_hit_rate_percent": round(self.cache_hits / max(1, total_requests) * 100, 1),
                "errors": self.errors,
                "errors_by_type": dict(self.per_error),
                "server_rpm": self._count_in_window(self._request_times, 60),
            }

    def reset(self) -> None:
        with self._lock:
            self.invariants_computed = 0
            self.signatures_computed = 0
            self.tables_computed = 0
            self.cache_hits = 0
            self.cache_misses = 0
            self.errors = 0
            self.compute_seconds = 0.0
            self.per_error.clear()
            self._request_times.clear()
            self.started_at = datetime.now(timezone.utc)


# Singleton instance
_metrics: Metrics | None = None


def get_metrics() -> Metrics:
    """Get singleton metrics instance."""
    global _metrics
    if _metrics is None:
        _metrics = Metrics()
    return _metrics
