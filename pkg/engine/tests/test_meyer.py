"""
Meyer cocycle and fibration signature tests.
"""

import random
from math import gcd

import pytest

from app.services.errors import MeyerError
from app.services.hurwitz import parse_word, tuple_from_word
from app.services.linalg import Matrix, inverse
from app.services.meyer import (
    compare_three_tuple,
    fibration_signature,
    is_symplectic,
    meyer_cocycle,
    meyer_form,
    prop_b1_check,
    random_primitive_vector,
    random_symplectic,
    three_tuple_signature,
)
from app.services.representations import packaged_representation, symplectic_rep
from app.services.rings import QQ_FIELD, ZZ

SEEDS = [1, 2, 3, 4, 5]


class TestCocycle:
    """Tests for the Meyer cocycle on pairs of symplectic matrices."""

    def test_identity_arguments(self):
        """Should vanish when either argument is the identity."""
        a = random_symplectic(2, random.Random(0))
        identity = Matrix.identity(ZZ, 4)
        assert meyer_cocycle(a, identity) == 0
        assert meyer_cocycle(identity, a) == 0

    @pytest.mark.parametrize("seed", SEEDS)
    def test_cocycle_identity(self, seed):
        """Should satisfy c(A, B) + c(AB, C) = c(A, BC) + c(B, C)."""
        rng = random.Random(seed)
        a, b, c = (random_symplectic(1, rng, max_length=6) for _ in range(3))
        assert meyer_cocycle(a, b) + meyer_cocycle(a @ b, c) == meyer_cocycle(a, b @ c) + meyer_cocycle(b, c)

    @pytest.mark.parametrize("seed", SEEDS)
    def test_symmetric(self, seed):
        """Should not depend on the order of the arguments."""
        rng = random.Random(seed)
        a, b = random_symplectic(2, rng, max_length=6), random_symplectic(2, rng, max_length=6)
        assert meyer_cocycle(a, b) == meyer_cocycle(b, a)

    def test_form_is_symmetric(self):
        """Should produce a symmetric Gram matrix on V_{A,B}."""
        rng = random.Random(8)
        data = meyer_form(random_symplectic(2, rng), random_symplectic(2, rng))
        assert data.form.is_symmetric()
        assert data.dimension == data.v_basis.rows

    def test_rejects_non_symplectic(self):
        """Should raise NON_SYMPLECTIC for matrices that do not preserve omega."""
        with pytest.raises(MeyerError) as e:
            meyer_cocycle(Matrix.identity(ZZ, 2), Matrix.diagonal(ZZ, [1, -1]))
        assert e.value.error_type == "NON_SYMPLECTIC"
        assert e.value.context["argument"] == 2

    def test_rejects_rational(self):
        """Should only accept integer matrices."""
        with pytest.raises(MeyerError) as e:
            meyer_cocycle(Matrix.identity(QQ_FIELD, 2), Matrix.identity(QQ_FIELD, 2))
        assert e.value.error_type == "UNSUPPORTED_RING"


class TestThreeTuples:
    """Tests comparing the invariant of (A, B, (AB)^-1) with the Meyer form."""

    @pytest.mark.parametrize("seed", SEEDS)
    @pytest.mark.parametrize("genus", [1, 2])
    def test_isomorphic(self, genus, seed):
        """Should identify Ker Gamma with V_{A,B} plus the radical diagonal copy of M."""
        rng = random.Random(seed)
        a, b = random_symplectic(genus, rng, max_length=5), random_symplectic(genus, rng, max_length=5)
        comparison = compare_three_tuple(a, b)
        assert comparison.conditions_hold
        assert comparison.forms_match
        assert comparison.isomorphic
        assert prop_b1_check(a, b)

    @pytest.mark.parametrize("seed", SEEDS)
    def test_signature_matches_cocycle(self, seed):
        """Should give the Meyer cocycle as the signature of Q on the kernel."""
        rng = random.Random(seed)
        a, b = random_symplectic(1, rng, max_length=5), random_symplectic(1, rng, max_length=5)
        assert three_tuple_signature(a, b) == meyer_cocycle(a, b)


class TestFibrationSignature:
    """Tests for signatures of Lefschetz fibrations."""

    def test_elliptic_surface(self):
        """Should give signature -8 for (c1 c2)^6 by both methods."""
        t = tuple_from_word(parse_word("c1 c2 | ^6"), genus=1, label="torus")
        report = fibration_signature(t, symplectic_rep(1, ZZ))
        assert report.sigma_meyer == -8
        assert report.sigma_form == -8
        assert report.agree
        assert len(report.per_term) == t.m - 1
        assert report.to_dict()["type"] == [12, 0]

    def test_product_not_identity(self):
        """Should refuse monodromies whose product is not the identity."""
        t = tuple_from_word(parse_word("c1 c2 | ^3"))
        with pytest.raises(MeyerError) as e:
            fibration_signature(t, symplectic_rep(1, ZZ))
        assert e.value.error_type == "PRODUCT_NOT_IDENTITY"

    def test_needs_symplectic_representation(self):
        """Should refuse representations without curve classes."""
        t = tuple_from_word(parse_word("c1 c2 | ^3"))
        with pytest.raises(MeyerError) as e:
            fibration_signature(t, packaged_representation("quantum_g1_reduced_omega"))
        assert e.value.error_type == "UNSUPPORTED_REPRESENTATION"


class TestRandomInputs:
    """Tests for the random generators used by property checks."""

    def test_primitive_vector(self):
        """Should return vectors with coprime entries."""
        rng = random.Random(4)
        for _ in range(20):
            vector = random_primitive_vector(4, rng)
            divisor = 0
            for value in vector:
                divisor = gcd(divisor, value)
            assert divisor == 1

    def test_random_symplectic(self):
        """Should return invertible symplectic integer matrices."""
        rng = random.Random(6)
        for genus in (1, 2, 3):
            a = random_symplectic(genus, rng)
            assert is_symplectic(a)
            assert is_symplectic(inverse(a))


class TestHigherGenus:
    """Seeded sweeps of the cocycle and three-tuple checks beyond genus 1."""

    @pytest.mark.slow
    @pytest.mark.parametrize("genus", [2, 3])
    def test_cocycle_identity(self, genus):
        """Should satisfy the cocycle identity on 50 random triples."""
        rng = random.Random(genus)
        for _ in range(50):
            a, b, c = (random_symplectic(genus, rng, max_length=4) for _ in range(3))
            assert meyer_cocycle(a, b) + meyer_cocycle(a @ b, c) == meyer_cocycle(a, b @ c) + meyer_cocycle(b, c)

    @pytest.mark.slow
    @pytest.mark.parametrize("seed", range(25))
    def test_three_tuple_pairs(self, seed):
        """Should match V_{A,B} and the Meyer cocycle on random genus-2 pairs."""
        rng = random.Random(100 + seed)
        a, b = random_symplectic(2, rng, max_length=5), random_symplectic(2, rng, max_length=5)
        assert prop_b1_check(a, b)
        assert compare_three_tuple(a, b).isomorphic
        assert three_tuple_signature(a, b) == meyer_cocycle(a, b)
