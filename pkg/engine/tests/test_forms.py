"""
Form classification and class-string tests.
"""

import pytest

from app.services.errors import LinalgError
from app.services.forms import (
    ClassSummary,
    classify_form,
    normalize_tex,
    parse_class_string,
    render_even,
    render_odd,
    summarize,
)
from app.services.linalg import Matrix, block_diagonal
from app.services.rings import ZZ, PrimeField, TruncatedPolyRing


def negative_e8() -> Matrix:
    edges = [(i, i + 1) for i in range(6)] + [(4, 7)]
    rows = [[-2 if i == j else 0 for j in range(8)] for i in range(8)]
    for i, j in edges:
        rows[i][j] = rows[j][i] = 1
    return Matrix.from_rows(ZZ, rows)


HYPERBOLIC = Matrix.from_rows(ZZ, [[0, 1], [1, 0]])


class TestRendering:
    """Tests for class-string rendering."""

    def test_odd(self):
        """Should list positive, negative and zero blocks."""
        assert render_odd(2, 18, 92) == "1^2 (-1)^18 0^92"
        assert render_odd(0, 12, 64) == "(-1)^12 0^64"

    def test_even(self):
        """Should split an even form into hyperbolic planes and E8 copies."""
        assert render_even(32, -24, 124) == "H_1^4 (E8)^3 0^124"
        assert render_even(16, -16, 146) == "(E8)^2 0^146"
        assert render_even(2, 0, 0) == "H_1"


class TestClassifyInteger:
    """Tests for classification over Z."""

    def test_hyperbolic_plane(self):
        """Should classify H as even, indefinite and unimodular."""
        form_class = classify_form(HYPERBOLIC)
        assert form_class.class_string == "H_1"
        assert form_class.parity == "even"
        assert form_class.signature == (1, 1, 0)
        assert form_class.unimodular

    def test_odd_with_padding(self):
        """Should append the padding zeros to the class string."""
        form_class = classify_form(Matrix.diagonal(ZZ, [1, 1, -1]), padding_zeros=3)
        assert form_class.class_string == "1^2 (-1)^1 0^3"
        assert form_class.sigma == 1
        assert form_class.zeros == 3

    def test_radical_split(self):
        """Should count the radical of a degenerate form as zeros."""
        form_class = classify_form(Matrix.from_rows(ZZ, [[1, 0], [0, 0]]))
        assert form_class.class_string == "1^1 0^1"
        assert form_class.rank == 1

    def test_e8(self):
        """Should recognize a negative definite E8 block."""
        form_class = classify_form(negative_e8())
        assert form_class.class_string == "E8"
        assert form_class.sigma == -8
        assert not form_class.definite_disclaimer

    def test_definite_disclaimer(self):
        """Should flag definite even forms of rank at least 16."""
        form_class = classify_form(block_diagonal([negative_e8(), negative_e8()]))
        assert form_class.class_string == "(E8)^2"
        assert form_class.definite_disclaimer

    def test_mixed_even(self):
        """Should render E8 plus hyperbolic planes."""
        form = block_diagonal([HYPERBOLIC, negative_e8(), HYPERBOLIC])
        assert classify_form(form).class_string == "H_1^2 E8"

    def test_nonunimodular(self):
        """Should report the determinant of a non-unimodular form."""
        form_class = classify_form(Matrix.diagonal(ZZ, [2, 1]))
        assert not form_class.unimodular
        assert form_class.class_string == "nonunimodular(det=2)"

    def test_skew(self):
        """Should classify a unimodular skew form without a signature."""
        form_class = classify_form(Matrix.from_rows(ZZ, [[0, 1], [-1, 0]]))
        assert form_class.symmetry == "skew"
        assert form_class.signature is None
        assert form_class.unimodular

    def test_rejects_general(self):
        """Should refuse integer forms that are neither symmetric nor skew."""
        with pytest.raises(LinalgError):
            classify_form(Matrix.from_rows(ZZ, [[1, 2], [0, 1]]))

    def test_invariant_key_ignores_determinant_sign(self):
        """Should compare |det| so congruent forms share a key."""
        a = classify_form(Matrix.diagonal(ZZ, [1, -1]))
        b = classify_form(Matrix.diagonal(ZZ, [-1, 1]))
        assert a.invariant_key() == b.invariant_key()


class TestClassifyFields:
    """Tests for classification over Z/P and F_p[y]/(y^p)."""

    def test_prime_field_nonsquare(self):
        """Should mark a non-square determinant over Z/5."""
        form_class = classify_form(Matrix.diagonal(PrimeField(5), [1, 2]))
        assert form_class.class_string == "<1>^1 <u1>"

    def test_prime_field_square(self):
        """Should write a square-determinant form as copies of <1>."""
        form_class = classify_form(Matrix.diagonal(PrimeField(5), [1, 4]))
        assert form_class.class_string == "<1>^2"

    def test_truncated_alternating(self):
        """Should classify y * H as one H_y block."""
        ring = TruncatedPolyRing(2)
        form_class = classify_form(Matrix.from_rows(ring, [["0", "y"], ["y", "0"]]))
        assert form_class.class_string == "H_y"
        assert form_class.alternating
        assert form_class.divisor_profile == (0, 2, 0)

    def test_truncated_diagonal(self):
        """Should classify a non-alternating form with values in (y) as <y> blocks."""
        ring = TruncatedPolyRing(2)
        form_class = classify_form(Matrix.from_rows(ring, [["y"]]), padding_zeros=2)
        assert form_class.class_string == "<y>^1 0^2"
        assert form_class.alternating is False

    def test_truncated_unit_form(self):
        """Should leave forms with unit entries unclassified but report the divisor profile."""
        ring = TruncatedPolyRing(2)
        form_class = classify_form(Matrix.identity(ring, 2))
        assert form_class.class_string.startswith("unclassified(y^0:2)")
        assert form_class.divisor_profile == (2, 0, 0)


class TestClassStrings:
    """Tests for reading class strings."""

    def test_plain(self):
        """Should read rank, signature, parity and zeros."""
        assert parse_class_string("(-1)^12 0^64") == ClassSummary(12, -12, "odd", 64)
        assert parse_class_string("1^12 (-1)^60 0^426") == ClassSummary(72, -48, "odd", 426)

    def test_tex(self):
        """Should read the TeX notation of the published table."""
        assert parse_class_string("$ \\mathcal{H}_1^4 (E_8)^3 0^{124}$") == ClassSummary(32, -24, "even", 124)
        assert parse_class_string("$ \\mathcal{H}_1^{6}(E_8)^{4}0^{286}$") == ClassSummary(44, -32, "even", 286)
        assert parse_class_string("$(E_8)^{2} 0^{146 }$") == ClassSummary(16, -16, "even", 146)

    def test_local_notation(self):
        """Should read H_y blocks without a signature."""
        assert normalize_tex("\\mathcal{H}_{ {\\tt y}}^{28}").strip() == "H_y^{28}"
        summary = parse_class_string("$ \\mathcal{H}_{ {\\tt y}}^{28} 0^{ 87}$")
        assert summary == ClassSummary(56, None, "n/a", 87)

    def test_summarize_matches_parse(self):
        """Should summarize a computed class like its own class string."""
        form_class = classify_form(block_diagonal([HYPERBOLIC, negative_e8()]), padding_zeros=5)
        assert summarize(form_class) == parse_class_string(form_class.class_string)
