"""
API endpoint tests.
"""

import pytest
from fastapi.testclient import TestClient
from unittest.mock import patch

from app.api.invariants import limiter
from app.main import app
from app.services.cache import get_cache
from app.services.table import RowResult, TableRow

client = TestClient(app)

TORUS = {"genus": 1, "word": "c1 c2 | ^6"}


@pytest.fixture(autouse=True)
def fresh_state():
    """Start every test with an empty cache and rate-limit storage."""
    get_cache().clear()
    limiter.reset()
    yield
    get_cache().clear()


class TestHealth:
    """Tests for health and stats endpoints."""

    def test_health(self):
        """Health check returns ok and a version."""
        response = client.get("/health")
        assert response.status_code == 200
        data = response.json()
        assert data["status"] == "ok"
        assert "version" in data

    def test_stats(self):
        """Stats include counters and the cache size."""
        response = client.get("/stats")
        assert response.status_code == 200
        data = response.json()
        assert "invariants_computed" in data
        assert "errors_by_type" in data
        assert data["cache_size"] == 0


class TestInvariantAPI:
    """Tests for POST /api/invariant."""

    def test_invariant(self):
        """Computing the invariant returns the class string and an ETag."""
        response = client.post("/api/invariant", json=TORUS)
        assert response.status_code == 200
        data = response.json()
        assert data["class_string"] == "E8 0^14"
        assert data["kernel_rank"] == 22
        assert data["predictions_hold"] is True
        assert response.headers["ETag"].startswith('"')

    def test_etag_not_modified(self):
        """A matching If-None-Match returns 304."""
        first = client.post("/api/invariant", json=TORUS)
        etag = first.headers["ETag"]

        second = client.post("/api/invariant", json=TORUS, headers={"If-None-Match": etag})

        assert second.status_code == 304
        assert second.headers["ETag"] == etag

    def test_cached_response(self):
        """A repeated request is served from the cache with the same body."""
        first = client.post("/api/invariant", json=TORUS)
        second = client.post("/api/invariant", json=TORUS)
        assert second.status_code == 200
        assert second.json() == first.json()
        assert get_cache().size() == 1

    def test_builtin_expression(self):
        """Built-in expressions are accepted in genus 2."""
        response = client.post("/api/invariant", json={"genus": 2, "expression": "xi1", "ell": 4})
        assert response.status_code == 200
        assert response.json()["class_string"] == "(-1)^12 0^64"
        assert response.json()["ell"] == 4

    def test_product_not_identity(self):
        """Tuples whose product is not the identity give 400."""
        response = client.post("/api/invariant", json={"genus": 1, "word": "c1 c2 | ^3"})
        assert response.status_code == 400
        assert response.json()["error"] == "PRODUCT_NOT_IDENTITY"

    def test_negative_letter(self):
        """Inverse letters in a tuple word give 400."""
        response = client.post("/api/invariant", json={"genus": 1, "word": "c1 c2^-1"})
        assert response.status_code == 400
        assert response.json()["error"] == "NEGATIVE_LETTER"

    def test_malformed_word(self):
        """Malformed words give 422."""
        response = client.post("/api/invariant", json={"genus": 1, "word": "3c"})
        assert response.status_code == 422
        assert response.json()["error"] == "PARSE"

    def test_two_sources(self):
        """Giving two tuple sources gives 422."""
        response = client.post("/api/invariant", json={"genus": 2, "expression": "xi1", "word": "c1"})
        assert response.status_code == 422
        assert response.json()["error"] == "SOURCE"

    def test_invalid_genus(self):
        """Genus outside the accepted range fails validation."""
        response = client.post("/api/invariant", json={"genus": 0, "word": "c1"})
        assert response.status_code == 422

    def test_document(self):
        """Tuple documents are accepted."""
        document = {"genus": 1, "entries": [{"base": "c1"}, {"base": "c2"}] * 6}
        response = client.post("/api/invariant", json={"genus": 1, "document": document})
        assert response.status_code == 200
        assert response.json()["mz_rank"] == 8

    def test_errors_are_counted(self):
        """Errors show up in /stats by type."""
        client.post("/api/invariant", json={"genus": 1, "word": "c1 c2 | ^3"})
        data = client.get("/stats").json()
        assert data["errors_by_type"].get("PRODUCT_NOT_IDENTITY", 0) >= 1


class TestSignatureAPI:
    """Tests for POST /api/signature."""

    def test_signature(self):
        """The Meyer sum and the form route agree on (c1 c2)^6."""
        response = client.post("/api/signature", json=TORUS)
        assert response.status_code == 200
        data = response.json()
        assert data["sigma_meyer"] == -8
        assert data["sigma_form"] == -8
        assert data["agree"] is True


class TestTableAPI:
    """Tests for GET /api/table/{genus}."""

    def test_table(self):
        """Table rows are returned with a text rendering."""
        row = TableRow(
            fibration="$\\xi_{CK}$", genus=3, type=(16, 0), sigma=-8,
            q_omega_z="$ E_80^{84}$", q_spin_odd="", q_spin_even="",
        )
        with patch("app.api.invariants.compute_table", return_value=[RowResult(row)]) as mock:
            response = client.get("/api/table/3")
        assert response.status_code == 200
        mock.assert_called_once_with(3)
        data = response.json()
        assert data["genus"] == 3
        assert data["passed"] is True
        assert data["rows"][0]["computed"] is None
        assert "n/a (monodromy not built in)" in data["text"]

    def test_unknown_genus(self):
        """Only genus 2 and 3 have table rows."""
        response = client.get("/api/table/5")
        assert response.status_code == 422


class TestMovesAPI:
    """Tests for POST /api/moves."""

    def test_moves(self):
        """A move script is applied to the document."""
        document = {"entries": [{"base": "c1"}, {"base": "c2"}, {"base": "c3"}]}
        response = client.post("/api/moves", json={"document": document, "script": "forward 1\nconjugate c3"})
        assert response.status_code == 200
        data = response.json()
        assert data["moves"] == 2
        entries = data["document"]["entries"]
        assert entries[0] == {"base": "c2", "conj": ["c3"]}
        assert entries[1] == {"base": "c1", "conj": ["c2", "c3"]}

    def test_invalid_script(self):
        """Unknown moves give 422."""
        document = {"entries": [{"base": "c1"}, {"base": "c2"}]}
        response = client.post("/api/moves", json={"document": document, "script": "twist 1"})
        assert response.status_code == 422
        assert response.json()["error"] == "PARSE"

    def test_invalid_document(self):
        """Documents without entries give 422."""
        response = client.post("/api/moves", json={"document": {"entries": []}, "script": "forward 1"})
        assert response.status_code == 422
        assert response.json()["error"] == "SCHEMA"
