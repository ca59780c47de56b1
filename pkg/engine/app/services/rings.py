"""
Exact coefficient rings.

A ring is described by a small immutable descriptor object that performs
arithmetic on raw payloads (``int``, ``Fraction`` or coefficient tuples).
Matrices store raw payloads and call the descriptor directly; ``RingElement``
wraps a payload together with its descriptor for scalar work and for
serialization.

Supported descriptors and their string names:

    Z          integers
    Q          rationals
    Zmod:P     integers modulo a prime P
    Fpy:p      F_p[y]/(y^p)
    Zzeta16    Z[x]/(x^8+1), x a primitive 16th root of unity (written z)
"""

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Literal

from sympy import Poly, QQ, isprime, symbols
from sympy.polys.polyerrors import NotInvertible

from app.services.errors import RingError

Payload = Any

_X = symbols("x")
_CYCLOTOMIC_MODULUS = Poly(_X**8 + 1, _X, domain=QQ)

_TERM_PATTERN = re.compile(r"[+-]?[^+-]+")
_INT_PATTERN = re.compile(r"^[+-]?\d+$")


def _parse_polynomial(text: str, variable: str) -> dict[int, int]:
    """Parse a sum of terms like ``3``, ``-y``, ``2*y^5`` into power -> coefficient."""
    compact = re.sub(r"\s+", "", text)
    if not compact:
        raise RingError("PARSE", f"Empty polynomial literal for variable {variable!r}")
    terms: dict[int, int] = {}
    for term in _TERM_PATTERN.findall(compact):
        sign = -1 if term.startswith("-") else 1
        body = term.lstrip("+-")
        if variable in body:
            coefficient_part, _, power_part = body.partition(variable)
            coefficient_part = coefficient_part.rstrip("*")
            coefficient = int(coefficient_part) if coefficient_part else 1
            if power_part:
                if not power_part.startswith("^") or not power_part[1:].isdigit():
                    raise RingError("PARSE", f"Bad power in term {term!r}", literal=text)
                power = int(power_part[1:])
            else:
                power = 1
        else:
            if not body.isdigit():
                raise RingError("PARSE", f"Bad term {term!r}", literal=text)
            coefficient, power = int(body), 0
        terms[power] = terms.get(power, 0) + sign * coefficient
    return terms


def _format_polynomial(coefficients: tuple[int, ...], variable: str) -> str:
    parts: list[str] = []
    for power, coefficient in enumerate(coefficients):
        if coefficient == 0:
            continue
        if power == 0:
            body = str(abs(coefficient))
        else:
            monomial = variable if power == 1 else f"{variable}^{power}"
            body = monomial if abs(coefficient) == 1 else f"{abs(coefficient)}*{monomial}"
        sign = "-" if coefficient < 0 else "+"
        parts.append(f"{sign}{body}")
    if not parts:
        return "0"
    text = "".join(parts)
    return text[1:] if text.startswith("+") else text


class RingDescriptor:
    """Arithmetic on canonical payloads of one coefficient ring."""

    kind: str = ""
    is_field: bool = False
    is_local: bool = False
    has_involution: bool = False

    @property
    def name(self) -> str:
        raise NotImplementedError

    # Payload arithmetic; subclasses override.
    def zero(self) -> Payload:
        raise NotImplementedError

    def one(self) -> Payload:
        raise NotImplementedError

    def from_int(self, value: int) -> Payload:
        raise NotImplementedError

    def add(self, a: Payload, b: Payload) -> Payload:
        raise NotImplementedError

    def sub(self, a: Payload, b: Payload) -> Payload:
        raise NotImplementedError

    def neg(self, a: Payload) -> Payload:
        raise NotImplementedError

    def mul(self, a: Payload, b: Payload) -> Payload:
        raise NotImplementedError

    def is_zero(self, a: Payload) -> bool:
        return a == self.zero()

    def involute(self, a: Payload) -> Payload:
        return a

    def is_unit(self, a: Payload) -> bool:
        raise NotImplementedError

    def invert(self, a: Payload) -> Payload:
        raise NotImplementedError

    def divide(self, a: Payload, b: Payload) -> Payload:
        """Exact quotient a / b; raises unless the quotient lies in the ring."""
        raise NotImplementedError

    def format(self, a: Payload) -> str:
        raise NotImplementedError

    def parse(self, text: str) -> Payload:
        raise NotImplementedError

    def coerce(self, value: Any) -> Payload:
        """Accept ints, strings and RingElements of this ring as payloads."""
        if isinstance(value, RingElement):
            if value.descriptor != self:
                raise RingError(
                    "RING_MISMATCH",
                    f"Element of {value.descriptor.name} used in {self.name}",
                )
            return value.payload
        if isinstance(value, bool):
            raise RingError("PARSE", f"Cannot coerce boolean into {self.name}")
        if isinstance(value, int):
            return self.from_int(value)
        if isinstance(value, str):
            return self.parse(value)
        raise RingError("PARSE", f"Cannot coerce {value!r} into {self.name}")

    def element(self, value: Any) -> "RingElement":
        return RingElement(self, self.coerce(value))

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class IntegerRing(RingDescriptor):
    kind: str = "Integer"

    @property
    def name(self) -> str:
        return "Z"

    def zero(self) -> int:
        return 0

    def one(self) -> int:
        return 1

    def from_int(self, value: int) -> int:
        return int(value)

    def add(self, a: int, b: int) -> int:
        return a + b

    def sub(self, a: int, b: int) -> int:
        return a - b

    def neg(self, a: int) -> int:
        return -a

    def mul(self, a: int, b: int) -> int:
        return a * b

    def is_zero(self, a: int) -> bool:
        return a == 0

    def is_unit(self, a: int) -> bool:
        return a in (1, -1)

    def invert(self, a: int) -> int:
        if a not in (1, -1):
            raise RingError("NON_UNIT", f"{a} is not a unit in Z", value=a)
        return a

    def divide(self, a: int, b: int) -> int:
        if b == 0 or a % b != 0:
            raise RingError("NOT_EXACT", f"{a} is not divisible by {b} in Z")
        return a // b

    def format(self, a: int) -> str:
        return str(a)

    def parse(self, text: str) -> int:
        compact = re.sub(r"\s+", "", text)
        if not _INT_PATTERN.match(compact):
            raise RingError("PARSE", f"Not an integer literal: {text!r}")
        return int(compact)


@dataclass(frozen=True)
class RationalField(RingDescriptor):
    kind: str = "Rational"
    is_field: bool = True
    is_local: bool = True

    @property
    def name(self) -> str:
        return "Q"

    def zero(self) -> Fraction:
        return Fraction(0)

    def one(self) -> Fraction:
        return Fraction(1)

    def from_int(self, value: int) -> Fraction:
        return Fraction(value)

    def add(self, a: Fraction, b: Fraction) -> Fraction:
        return a + b

    def sub(self, a: Fraction, b: Fraction) -> Fraction:
        return a - b

    def neg(self, a: Fraction) -> Fraction:
        return -a

    def mul(self, a: Fraction, b: Fraction) -> Fraction:
        return a * b

    def is_zero(self, a: Fraction) -> bool:
        return a == 0

    def is_unit(self, a: Fraction) -> bool:
        return a != 0

    def invert(self, a: Fraction) -> Fraction:
        if a == 0:
            raise RingError("NON_UNIT", "0 is not invertible in Q")
        return 1 / a

    def divide(self, a: Fraction, b: Fraction) -> Fraction:
        return a * self.invert(b)

    def format(self, a: Fraction) -> str:
        return str(a)

    def parse(self, text: str) -> Fraction:
        try:
            return Fraction(re.sub(r"\s+", "", text))
        except (ValueError, ZeroDivisionError) as e:
            raise RingError("PARSE", f"Not a rational literal: {text!r}") from e


@dataclass(frozen=True)
class PrimeField(RingDescriptor):
    """Residues modulo a prime P, stored in [0, P)."""

    modulus: int = 2
    kind: str = "IntegerModP"
    is_field: bool = True
    is_local: bool = True

    def __post_init__(self):
        if not isprime(self.modulus):
            raise RingError("NOT_PRIME", f"Modulus {self.modulus} is not prime", modulus=self.modulus)

    @property
    def name(self) -> str:
        return f"Zmod:{self.modulus}"

    def zero(self) -> int:
        return 0

    def one(self) -> int:
        return 1 % self.modulus

    def from_int(self, value: int) -> int:
        return int(value) % self.modulus

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.modulus

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.modulus

    def neg(self, a: int) -> int:
        return -a % self.modulus

    def mul(self, a: int, b: int) -> int:
        return a * b % self.modulus

    def is_zero(self, a: int) -> bool:
        return a == 0

    def is_unit(self, a: int) -> bool:
        return a != 0

    def invert(self, a: int) -> int:
        if a == 0:
            raise RingError("NON_UNIT", f"0 is not invertible in {self.name}")
        return pow(a, -1, self.modulus)

    def divide(self, a: int, b: int) -> int:
        return a * self.invert(b) % self.modulus

    def format(self, a: int) -> str:
        return str(a)

    def parse(self, text: str) -> int:
        compact = re.sub(r"\s+", "", text)
        if not _INT_PATTERN.match(compact):
            raise RingError("PARSE", f"Not a residue literal: {text!r}")
        return int(compact) % self.modulus


@dataclass(frozen=True)
class TruncatedPolyRing(RingDescriptor):
    """F_p[y]/(y^p): a local principal ideal ring with maximal ideal (y)."""

    prime: int = 2
    kind: str = "TruncatedPoly"
    is_local: bool = True

    def __post_init__(self):
        if not isprime(self.prime):
            raise RingError("NOT_PRIME", f"Characteristic {self.prime} is not prime", prime=self.prime)

    @property
    def name(self) -> str:
        return f"Fpy:{self.prime}"

    @property
    def length(self) -> int:
        """Nilpotency index of y, equal to p."""
        return self.prime

    def _normalize(self, coefficients) -> tuple[int, ...]:
        p = self.prime
        values = [c % p for c in list(coefficients)[:p]]
        values.extend([0] * (p - len(values)))
        return tuple(values)

    def zero(self) -> tuple[int, ...]:
        return (0,) * self.prime

    def one(self) -> tuple[int, ...]:
        return self._normalize([1])

    def from_int(self, value: int) -> tuple[int, ...]:
        return self._normalize([value])

    def monomial(self, power: int, coefficient: int = 1) -> tuple[int, ...]:
        """coefficient * y^power (zero once power reaches p)."""
        if power >= self.prime:
            return self.zero()
        values = [0] * self.prime
        values[power] = coefficient
        return self._normalize(values)

    def add(self, a, b):
        p = self.prime
        return tuple((x + y) % p for x, y in zip(a, b))

    def sub(self, a, b):
        p = self.prime
        return tuple((x - y) % p for x, y in zip(a, b))

    def neg(self, a):
        p = self.prime
        return tuple(-x % p for x in a)

    def mul(self, a, b):
        p = self.prime
        out = [0] * p
        for i, x in enumerate(a):
            if x:
                for j in range(p - i):
                    if b[j]:
                        out[i + j] += x * b[j]
        return tuple(c % p for c in out)

    def is_zero(self, a) -> bool:
        return not any(a)

    def valuation(self, a) -> int:
        """Largest k with a in (y^k); p for zero."""
        for power, coefficient in enumerate(a):
            if coefficient:
                return power
        return self.prime

    def shift_down(self, a, k: int):
        """The payload b with y^k * b = a, assuming valuation(a) >= k."""
        return self._normalize(list(a[k:]))

    def is_unit(self, a) -> bool:
        return a[0] % self.prime != 0

    def invert(self, a):
        if not self.is_unit(a):
            raise RingError("NON_UNIT", f"{self.format(a)} is not a unit in {self.name}")
        constant_inverse = pow(a[0], -1, self.prime)
        # a = c (1 + n) with n nilpotent, so a^-1 = c^-1 * sum (-n)^k
        normalized = self.mul(self.from_int(constant_inverse), a)
        nilpotent = self.sub(normalized, self.one())
        term = self.one()
        total = self.one()
        for _ in range(1, self.prime):
            term = self.mul(term, self.neg(nilpotent))
            total = self.add(total, term)
        return self.mul(total, self.from_int(constant_inverse))

    def divide(self, a, b):
        if self.is_unit(b):
            return self.mul(a, self.invert(b))
        k = self.valuation(b)
        if k == self.prime:
            raise RingError("NOT_EXACT", "Division by zero in truncated polynomial ring")
        if self.valuation(a) < k:
            raise RingError(
                "NOT_EXACT",
                f"{self.format(a)} is not divisible by {self.format(b)} in {self.name}",
            )
        return self.mul(self.shift_down(a, k), self.invert(self.shift_down(b, k)))

    def format(self, a) -> str:
        return _format_polynomial(a, "y")

    def parse(self, text: str):
        values = [0] * self.prime
        for power, coefficient in _parse_polynomial(text, "y").items():
            if power < self.prime:
                values[power] += coefficient
        return self._normalize(values)


@dataclass(frozen=True)
class Cyclotomic16Ring(RingDescriptor):
    """Z[x]/(x^8+1); x plays the role of zeta, a primitive 16th root of unity."""

    kind: str = "Cyclotomic16"
    has_involution: bool = True
    degree: int = 8

    @property
    def name(self) -> str:
        return "Zzeta16"

    def _reduce(self, coefficients) -> tuple[int, ...]:
        out = [0] * 8
        for power, coefficient in enumerate(coefficients):
            # x^8 = -1
            block, slot = divmod(power, 8)
            out[slot] += -coefficient if block % 2 else coefficient
        return tuple(out)

    def zero(self) -> tuple[int, ...]:
        return (0,) * 8

    def one(self) -> tuple[int, ...]:
        return (1,) + (0,) * 7

    def from_int(self, value: int) -> tuple[int, ...]:
        return (int(value),) + (0,) * 7

    def zeta_power(self, power: int) -> tuple[int, ...]:
        """zeta^power for any integer power."""
        values = [0] * 16
        values[power % 16] = 1
        return self._reduce(values)

    def add(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def sub(self, a, b):
        return tuple(x - y for x, y in zip(a, b))

    def neg(self, a):
        return tuple(-x for x in a)

    def mul(self, a, b):
        out = [0] * 15
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        out[i + j] += x * y
        return self._reduce(out)

    def is_zero(self, a) -> bool:
        return not any(a)

    def involute(self, a):
        # zeta^k -> zeta^(16-k) = -zeta^(8-k) for 1 <= k <= 7
        out = [a[0]] + [0] * 7
        for power in range(1, 8):
            out[8 - power] -= a[power]
        return tuple(out)

    def _rational_inverse(self, a) -> list[Fraction]:
        if self.is_zero(a):
            raise RingError("NON_UNIT", "0 is not invertible in Zzeta16")
        poly = Poly(list(reversed(a)), _X, domain=QQ)
        try:
            inverse = poly.invert(_CYCLOTOMIC_MODULUS)
        except NotInvertible as e:
            raise RingError("NON_UNIT", f"{self.format(a)} is not invertible mod x^8+1") from e
        coefficients = [Fraction(int(c.p), int(c.q)) for c in reversed(inverse.all_coeffs())]
        coefficients.extend([Fraction(0)] * (8 - len(coefficients)))
        return coefficients

    def _rational_product(self, a, inverse: list[Fraction]) -> list[Fraction]:
        out = [Fraction(0)] * 15
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(inverse):
                    if y:
                        out[i + j] += x * y
        reduced = [Fraction(0)] * 8
        for power, coefficient in enumerate(out):
            block, slot = divmod(power, 8)
            reduced[slot] += -coefficient if block % 2 else coefficient
        return reduced

    @staticmethod
    def _integral(values: list[Fraction]) -> tuple[int, ...] | None:
        if any(v.denominator != 1 for v in values):
            return None
        return tuple(int(v) for v in values)

    def is_unit(self, a) -> bool:
        if self.is_zero(a):
            return False
        return self._integral(self._rational_inverse(a)) is not None

    def invert(self, a):
        inverse = self._integral(self._rational_inverse(a))
        if inverse is None:
            raise RingError(
                "NON_UNIT",
                f"{self.format(a)} is not a unit in Zzeta16 (inverse has non-integral coordinates)",
            )
        return inverse

    def divide(self, a, b):
        quotient = self._integral(self._rational_product(a, self._rational_inverse(b)))
        if quotient is None:
            raise RingError(
                "NOT_EXACT",
                f"{self.format(a)} / {self.format(b)} does not lie in Zzeta16",
            )
        return quotient

    def format(self, a) -> str:
        return _format_polynomial(a, "z")

    def parse(self, text: str):
        values = [0] * 8
        for power, coefficient in _parse_polynomial(text, "z").items():
            block, slot = divmod(power, 8)
            values[slot] += -coefficient if block % 2 else coefficient
        return tuple(values)


@dataclass(frozen=True)
class RingElement:
    """An exact scalar together with its ring."""

    descriptor: RingDescriptor
    payload: Payload

    def _other(self, other: Any) -> Payload:
        if isinstance(other, RingElement):
            if other.descriptor != self.descriptor:
                raise RingError(
                    "RING_MISMATCH",
                    f"Cannot combine {self.descriptor.name} with {other.descriptor.name}",
                )
            return other.payload
        return self.descriptor.coerce(other)

    def __add__(self, other: Any) -> "RingElement":
        return RingElement(self.descriptor, self.descriptor.add(self.payload, self._other(other)))

    __radd__ = __add__

    def __sub__(self, other: Any) -> "RingElement":
        return RingElement(self.descriptor, self.descriptor.sub(self.payload, self._other(other)))

    def __rsub__(self, other: Any) -> "RingElement":
        return RingElement(self.descriptor, self.descriptor.sub(self._other(other), self.payload))

    def __mul__(self, other: Any) -> "RingElement":
        return RingElement(self.descriptor, self.descriptor.mul(self.payload, self._other(other)))

    __rmul__ = __mul__

    def __neg__(self) -> "RingElement":
        return RingElement(self.descriptor, self.descriptor.neg(self.payload))

    def __pow__(self, exponent: int) -> "RingElement":
        if exponent < 0:
            return self.invert() ** (-exponent)
        result = self.descriptor.one()
        base = self.payload
        while exponent:
            if exponent & 1:
                result = self.descriptor.mul(result, base)
            base = self.descriptor.mul(base, base)
            exponent >>= 1
        return RingElement(self.descriptor, result)

    def involute(self) -> "RingElement":
        return RingElement(self.descriptor, self.descriptor.involute(self.payload))

    def invert(self) -> "RingElement":
        return RingElement(self.descriptor, self.descriptor.invert(self.payload))

    def divide(self, other: Any) -> "RingElement":
        return RingElement(self.descriptor, self.descriptor.divide(self.payload, self._other(other)))

    def is_zero(self) -> bool:
        return self.descriptor.is_zero(self.payload)

    def is_unit(self) -> bool:
        return self.descriptor.is_unit(self.payload)

    def __str__(self) -> str:
        return self.descriptor.format(self.payload)


# Module-level singletons for the parameterless rings
ZZ = IntegerRing()
QQ_FIELD = RationalField()
ZETA16 = Cyclotomic16Ring()


def parse_ring(text: str) -> RingDescriptor:
    """Parse a descriptor name: Z, Q, Zmod:P, Fpy:p or Zzeta16."""
    name = text.strip()
    if name == "Z":
        return ZZ
    if name == "Q":
        return QQ_FIELD
    if name == "Zzeta16":
        return ZETA16
    head, _, argument = name.partition(":")
    if head in ("Zmod", "Fpy") and argument.isdigit():
        value = int(argument)
        return PrimeField(value) if head == "Zmod" else TruncatedPolyRing(value)
    raise RingError("UNKNOWN_RING", f"Unknown ring descriptor {text!r}", ring=text)


def arith(a: RingElement, b: RingElement, op: Literal["add", "sub", "mul"]) -> RingElement:
    """Exact add/sub/mul of two elements of the same ring."""
    if a.descriptor != b.descriptor:
        raise RingError(
            "RING_MISMATCH",
            f"Cannot combine {a.descriptor.name} with {b.descriptor.name}",
        )
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise RingError("UNKNOWN_OP", f"Unknown arithmetic operation {op!r}")


def involute(a: RingElement) -> RingElement:
    return a.involute()


def invert(a: RingElement) -> RingElement:
    return a.invert()


def reduce_zeta(a: RingElement, p: int = 2) -> RingElement:
    """
    Reduce an element of Z[zeta_16] to F_2[y]/(y^2) along zeta -> 1 + y.

    16 is a power of p only for p = 2, so other primes are rejected.
    """
    if a.descriptor != ZETA16:
        raise RingError("UNSUPPORTED", f"Base change needs a Zzeta16 element, got {a.descriptor.name}")
    if p != 2:
        raise RingError("UNSUPPORTED", f"Base change zeta_16 -> 1+y needs p = 2, got p = {p}", prime=p)
    target = TruncatedPolyRing(p)
    return RingElement(target, base_change_payload(a.payload, target))


def base_change_payload(payload: tuple[int, ...], target: TruncatedPolyRing) -> tuple[int, ...]:
    """Image of a Zzeta16 payload in the truncated polynomial ring."""
    one_plus_y = target.parse("1+y")
    power = target.one()
    total = target.zero()
    for coefficient in payload:
        if coefficient:
            total = target.add(total, target.mul(target.from_int(coefficient), power))
        power = target.mul(power, one_plus_y)
    return total
