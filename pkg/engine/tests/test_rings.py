"""
Coefficient ring tests.
"""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from app.services.errors import RingError
from app.services.rings import (
    QQ_FIELD,
    ZETA16,
    ZZ,
    IntegerRing,
    PrimeField,
    RingElement,
    TruncatedPolyRing,
    arith,
    invert,
    involute,
    parse_ring,
    reduce_zeta,
)

small_ints = st.integers(min_value=-5, max_value=5)
cyclotomic = st.tuples(*[small_ints] * 8)


class TestParseRing:
    """Tests for ring descriptor names."""

    @pytest.mark.parametrize("name", ["Z", "Q", "Zmod:5", "Fpy:2", "Fpy:3", "Zzeta16"])
    def test_round_trip(self, name):
        """Should print the name it was parsed from."""
        assert parse_ring(name).name == name

    def test_equal_descriptors(self):
        """Should compare descriptors by value."""
        assert parse_ring("Z") == IntegerRing()
        assert parse_ring("Zmod:7") == PrimeField(7)
        assert parse_ring("Fpy:2") == TruncatedPolyRing(2)

    @pytest.mark.parametrize("name", ["Zmod:4", "Fpy:6"])
    def test_rejects_composite(self, name):
        """Should reject non-prime characteristics at construction."""
        with pytest.raises(RingError) as e:
            parse_ring(name)
        assert e.value.error_type == "NOT_PRIME"

    def test_rejects_unknown(self):
        """Should reject unknown descriptor names."""
        with pytest.raises(RingError) as e:
            parse_ring("R")
        assert e.value.error_type == "UNKNOWN_RING"


class TestScalars:
    """Tests for arithmetic on elements of the simple rings."""

    def test_integer_units(self):
        """Should invert only 1 and -1 over Z."""
        assert invert(ZZ.element(-1)) == ZZ.element(-1)
        with pytest.raises(RingError) as e:
            invert(ZZ.element(2))
        assert e.value.error_type == "NON_UNIT"

    def test_rational_inverse(self):
        """Should invert nonzero rationals exactly."""
        assert invert(QQ_FIELD.element("3/4")).payload == Fraction(4, 3)

    def test_prime_field(self):
        """Should reduce residues and invert modulo P."""
        f7 = PrimeField(7)
        assert f7.element(10).payload == 3
        assert invert(f7.element(3)).payload == 5
        assert f7.element("-1").payload == 6

    def test_mixed_rings_rejected(self):
        """Should refuse to combine elements of different rings."""
        with pytest.raises(RingError) as e:
            arith(ZZ.element(1), PrimeField(5).element(1), "add")
        assert e.value.error_type == "RING_MISMATCH"

    @pytest.mark.parametrize("op,expected", [("add", 7), ("sub", -1), ("mul", 12)])
    def test_arith(self, op, expected):
        """Should dispatch add, sub and mul."""
        assert arith(ZZ.element(3), ZZ.element(4), op) == ZZ.element(expected)

    def test_power(self):
        """Should raise elements to integer powers."""
        assert ZZ.element(-2) ** 5 == ZZ.element(-32)
        assert PrimeField(5).element(2) ** -1 == PrimeField(5).element(3)


class TestTruncatedPolyRing:
    """Tests for F_p[y]/(y^p)."""

    def test_parse_and_format(self):
        """Should parse polynomial literals into coefficient tuples."""
        ring = TruncatedPolyRing(3)
        assert ring.parse("1+2*y^2") == (1, 0, 2)
        assert ring.parse("y^3") == ring.zero()
        assert ring.format(ring.parse("1+y")) == "1+y"

    def test_nilpotent(self):
        """Should make y^p vanish."""
        ring = TruncatedPolyRing(2)
        y = ring.element("y")
        assert (y * y).is_zero()

    def test_units(self):
        """Should invert exactly the elements with nonzero constant term."""
        ring = TruncatedPolyRing(2)
        one_plus_y = ring.element("1+y")
        assert one_plus_y.invert() == one_plus_y
        assert not ring.element("y").is_unit()
        with pytest.raises(RingError):
            ring.element("y").invert()

    def test_valuation(self):
        """Should report the y-adic valuation, p for zero."""
        ring = TruncatedPolyRing(3)
        assert ring.valuation(ring.parse("y^2+y")) == 1
        assert ring.valuation(ring.one()) == 0
        assert ring.valuation(ring.zero()) == 3

    def test_exact_division(self):
        """Should divide by y only when the numerator lies in (y)."""
        ring = TruncatedPolyRing(3)
        assert ring.divide(ring.parse("y+y^2"), ring.parse("y")) == ring.parse("1+y")
        with pytest.raises(RingError) as e:
            ring.divide(ring.one(), ring.parse("y"))
        assert e.value.error_type == "NOT_EXACT"

    @given(st.tuples(*[st.integers(0, 2)] * 3))
    def test_inverse_property(self, coefficients):
        """Should satisfy a * a^-1 == 1 for every unit."""
        ring = TruncatedPolyRing(3)
        a = RingElement(ring, coefficients)
        if a.is_unit():
            assert (a * a.invert()).payload == ring.one()


class TestCyclotomic16:
    """Tests for Z[zeta_16]."""

    def test_zeta_order(self):
        """Should make zeta a primitive 16th root of unity."""
        assert ZETA16.zeta_power(16) == ZETA16.one()
        assert ZETA16.zeta_power(8) == ZETA16.from_int(-1)
        assert ZETA16.zeta_power(-1) == ZETA16.neg(ZETA16.zeta_power(7))

    def test_involution_inverts_zeta(self):
        """Should map zeta to its inverse."""
        zeta = RingElement(ZETA16, ZETA16.zeta_power(1))
        assert (involute(zeta) * zeta).payload == ZETA16.one()

    def test_units(self):
        """Should recognize zeta as a unit and 1 + zeta as a non-unit of norm 2."""
        assert ZETA16.is_unit(ZETA16.zeta_power(3))
        assert not ZETA16.is_unit(ZETA16.add(ZETA16.one(), ZETA16.zeta_power(1)))
        with pytest.raises(RingError) as e:
            ZETA16.invert(ZETA16.from_int(2))
        assert e.value.error_type == "NON_UNIT"

    def test_parse_reduces_powers(self):
        """Should reduce exponents modulo z^8 = -1 while parsing."""
        assert ZETA16.parse("z^9") == ZETA16.neg(ZETA16.parse("z"))
        assert ZETA16.parse("2*z^8 + z") == (-2, 1, 0, 0, 0, 0, 0, 0)
        assert ZETA16.parse("z^16") == ZETA16.one()

    def test_parse_huge_exponent(self):
        """Should parse a huge exponent without expanding it."""
        assert ZETA16.parse("z^1000000001") == ZETA16.parse("z")
        assert ZETA16.parse("3*z^1000000000") == ZETA16.from_int(3)
        assert ZETA16.parse("z^1000000008") == ZETA16.from_int(-1)

    def test_exact_division(self):
        """Should divide zeta + zeta^8 by 1 + zeta inside the ring."""
        numerator = ZETA16.add(ZETA16.zeta_power(1), ZETA16.zeta_power(8))
        denominator = ZETA16.add(ZETA16.one(), ZETA16.zeta_power(1))
        quotient = ZETA16.divide(numerator, denominator)
        assert ZETA16.mul(quotient, denominator) == numerator

    @given(cyclotomic, cyclotomic, cyclotomic)
    @settings(max_examples=50)
    def test_ring_axioms(self, a, b, c):
        """Should be associative, commutative and distributive."""
        x, y, z = (RingElement(ZETA16, v) for v in (a, b, c))
        assert (x * y) * z == x * (y * z)
        assert x * y == y * x
        assert x * (y + z) == x * y + x * z

    @given(cyclotomic, cyclotomic)
    @settings(max_examples=50)
    def test_involution_is_ring_map(self, a, b):
        """Should respect sums and products and square to the identity."""
        x, y = RingElement(ZETA16, a), RingElement(ZETA16, b)
        assert involute(x * y) == involute(x) * involute(y)
        assert involute(x + y) == involute(x) + involute(y)
        assert involute(involute(x)) == x


class TestReduceZeta:
    """Tests for the reduction zeta -> 1 + y into F_2[y]/(y^2)."""

    def test_generator_image(self):
        """Should send zeta to 1 + y and zeta^2 to 1."""
        target = TruncatedPolyRing(2)
        assert reduce_zeta(RingElement(ZETA16, ZETA16.zeta_power(1))).payload == target.parse("1+y")
        assert reduce_zeta(RingElement(ZETA16, ZETA16.zeta_power(2))).payload == target.one()

    def test_rejects_odd_prime(self):
        """Should refuse primes other than 2."""
        with pytest.raises(RingError):
            reduce_zeta(ZETA16.element(1), p=3)

    @given(cyclotomic, cyclotomic)
    @settings(max_examples=50)
    def test_homomorphism(self, a, b):
        """Should commute with addition and multiplication."""
        x, y = RingElement(ZETA16, a), RingElement(ZETA16, b)
        assert reduce_zeta(x * y) == reduce_zeta(x) * reduce_zeta(y)
        assert reduce_zeta(x + y) == reduce_zeta(x) + reduce_zeta(y)
