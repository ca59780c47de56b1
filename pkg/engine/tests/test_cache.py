"""
Result cache tests.
"""

import threading
import time
import pytest
from unittest.mock import MagicMock, patch

from app.services.cache import ResultCache


class TestResultCache:
    """Tests for ResultCache."""

    @pytest.fixture
    def cache(self):
        """Create a cache instance with 60 second TTL."""
        with patch("app.services.cache.get_settings") as mock:
            mock.return_value.cache_ttl = 60
            yield ResultCache()

    def test_set_and_get(self, cache):
        """Should store and retrieve a result under its key."""
        key = cache.compute_etag({"kind": "invariant", "word": "c1 c2 | ^6"})
        data = {"class_string": "E8 0^14", "kernel_rank": 22}

        entry = cache.set(key, data)
        fetched = cache.get(key)

        assert fetched is entry
        assert fetched.data == data
        assert fetched.etag == key
        assert fetched.etag.startswith('"')
        assert fetched.etag.endswith('"')

    def test_get_missing(self, cache):
        """Should return None for a missing key."""
        assert cache.get('"nonexistent"') is None

    def test_etag_ignores_key_order(self, cache):
        """Should give the same ETag for documents differing only in key order."""
        a = cache.compute_etag({"genus": 2, "expression": "xi1"})
        b = cache.compute_etag({"expression": "xi1", "genus": 2})
        assert a == b
        assert len(a) == 18

    def test_etag_changes_with_content(self, cache):
        """Should give different ETags for different requests."""
        a = cache.compute_etag({"genus": 2, "expression": "xi1"})
        b = cache.compute_etag({"genus": 2, "expression": "xi2"})
        assert a != b

    def test_clear(self, cache):
        """Should clear all entries."""
        cache.set('"a"', {"x": 1})
        cache.set('"b"', {"x": 2})
        assert cache.size() == 2

        cache.clear()

        assert cache.size() == 0
        assert cache.get('"a"') is None

    def test_size_takes_lock(self, cache):
        """Should read the entry count under the cache lock."""
        cache.set('"a"', {"x": 1})
        lock = MagicMock()
        cache._lock = lock

        assert cache.size() == 1
        lock.__enter__.assert_called_once()
        lock.__exit__.assert_called_once()

    def test_concurrent_writers(self, cache):
        """Should count every entry written from several threads."""

        def write(offset):
            for i in range(50):
                cache.set(f'"{offset}-{i}"', {"i": i})
                cache.size()

        threads = [threading.Thread(target=write, args=(n,)) for n in range(4)]
        for thread in threads:
            thread.start()
        for thread in threads:
            thread.join()

        assert cache.size() == 200


class TestCacheExpiration:
    """Tests for cache TTL expiration."""

    @pytest.fixture
    def short_ttl_cache(self):
        """Create a cache with 1 second TTL."""
        with patch("app.services.cache.get_settings") as mock:
            mock.return_value.cache_ttl = 1
            yield ResultCache()

    def test_entry_expires(self, short_ttl_cache):
        """Should drop an entry after its TTL."""
        short_ttl_cache.set('"k"', {"x": 1})
        assert short_ttl_cache.get('"k"') is not None

        time.sleep(1.1)

        assert short_ttl_cache.get('"k"') is None
        assert short_ttl_cache.size() == 0

    def test_cleanup_expired(self, short_ttl_cache):
        """Should count and remove expired entries."""
        short_ttl_cache.set('"a"', {"x": 1})
        short_ttl_cache.set('"b"', {"x": 2})

        time.sleep(1.1)

        assert short_ttl_cache.cleanup_expired() == 2
        assert short_ttl_cache.size() == 0
