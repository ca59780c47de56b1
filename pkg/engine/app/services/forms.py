"""
Classification of symmetric bilinear forms and the class-string notation.

Class strings use the table notation of the invariants report:

    1^p (-1)^q 0^z        odd unimodular forms over Z
    H_1^a (E8)^b 0^z      even unimodular forms (E8 negative definite;
                          positive definite copies are written (-E8)^b)
    H_y^k 0^z, <y>^r 0^z  forms over F_2[y]/(y^2) with values in (y)

``parse_class_string`` reads both this notation and the TeX notation of the
published table, so expected values can be quoted verbatim.
"""

import logging
import re
from dataclasses import dataclass, field
from typing import Any

from sympy.ntheory import legendre_symbol

from app.services.errors import LinalgError
from app.services.linalg import (
    Matrix,
    determinant,
    echelon,
    local_smith,
    signature,
)
from app.services.rings import (
    Cyclotomic16Ring,
    IntegerRing,
    PrimeField,
    RationalField,
    RingDescriptor,
    RingElement,
    TruncatedPolyRing,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FormClass:
    """Congruence class data of a bilinear form."""

    ring: str
    rank: int
    signature: tuple[int, int, int] | None
    parity: str
    determinant: RingElement | None
    class_string: str
    alternating: bool | None = None
    zeros: int = 0
    definite_disclaimer: bool = False
    unimodular: bool | None = None
    divisor_profile: tuple[int, ...] = field(default_factory=tuple)
    symmetry: str = "symmetric"

    @property
    def sigma(self) -> int | None:
        if self.signature is None:
            return None
        return self.signature[0] - self.signature[1]

    def invariant_key(self) -> tuple:
        """Fields compared by the Hurwitz invariance checks."""
        det = None
        if self.determinant is not None:
            ring = self.determinant.descriptor
            if isinstance(ring, IntegerRing):
                det = abs(self.determinant.payload)
            elif isinstance(ring, TruncatedPolyRing):
                det = ring.valuation(self.determinant.payload)
            elif isinstance(ring, RationalField):
                det = abs(self.determinant.payload)
            elif ring.is_field:
                det = ring.is_zero(self.determinant.payload)
        return (
            self.rank,
            self.signature,
            self.parity,
            self.alternating,
            self.zeros,
            self.divisor_profile,
            det,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "ring": self.ring,
            "rank": self.rank,
            "signature": list(self.signature) if self.signature is not None else None,
            "sigma": self.sigma,
            "parity": self.parity,
            "determinant": str(self.determinant) if self.determinant is not None else None,
            "class_string": self.class_string,
            "alternating": self.alternating,
            "zeros": self.zeros,
            "definite_disclaimer": self.definite_disclaimer,
            "unimodular": self.unimodular,
            "divisor_profile": list(self.divisor_profile),
            "symmetry": self.symmetry,
        }


def _power(base: str, exponent: int) -> str:
    if exponent == 1 and base in ("H_1", "H_y", "E8"):
        return base
    if base == "E8":
        return f"(E8)^{exponent}"
    return f"{base}^{exponent}"


def _join(parts: list[str], zeros: int) -> str:
    if zeros:
        parts = parts + [f"0^{zeros}"]
    return " ".join(parts) if parts else "0^0"


def render_odd(positive: int, negative: int, zeros: int) -> str:
    parts = []
    if positive:
        parts.append(f"1^{positive}")
    if negative:
        parts.append(f"(-1)^{negative}")
    return _join(parts, zeros)


def render_even(rank: int, sigma: int, zeros: int) -> str:
    copies = abs(sigma) // 8
    planes = (rank - 8 * copies) // 2
    parts = []
    if planes:
        parts.append(_power("H_1", planes))
    if copies:
        if sigma < 0:
            parts.append(_power("E8", copies))
        else:
            parts.append(f"(-E8)^{copies}")
    return _join(parts, zeros)


def _split_radical(form: Matrix) -> tuple[Matrix, int]:
    """Restrict a symmetric form to a complement of its radical; returns (form, radical rank)."""
    data = echelon(form)
    complement = data.transform.submatrix(rows=range(data.rank))
    reduced = complement @ form @ complement.transpose()
    return reduced, form.rows - data.rank


def _is_symmetric_like(form: Matrix) -> str:
    if form.is_symmetric():
        return "symmetric"
    if form.is_skew():
        return "skew"
    if form.ring.has_involution and form.is_hermitian():
        return "hermitian"
    if form.ring.has_involution and form.is_skew_hermitian():
        return "skew-hermitian"
    return "general"


def _classify_integer(form: Matrix, padding_zeros: int, symmetry: str) -> FormClass:
    reduced, radical = _split_radical(form)
    zeros = radical + padding_zeros
    r = reduced.rows
    det = determinant(reduced)
    unimodular = det.payload in (1, -1)
    if symmetry == "skew":
        text = _join([_power("J", r // 2)] if r else [], zeros) if unimodular \
            else f"nonunimodular(det={det})"
        return FormClass(
            ring=form.ring.name, rank=r, signature=None, parity="n/a", determinant=det,
            class_string=text, zeros=zeros, unimodular=unimodular, symmetry=symmetry,
        )
    positive, negative, _ = signature(reduced)
    even = all(reduced.data[i][i] % 2 == 0 for i in range(r))
    parity = "even" if even else "odd"
    disclaimer = False
    if not unimodular:
        text = f"nonunimodular(det={det})"
    elif even:
        text = render_even(r, positive - negative, zeros)
        disclaimer = (positive == 0 or negative == 0) and r >= 16
    else:
        text = render_odd(positive, negative, zeros)
    return FormClass(
        ring=form.ring.name,
        rank=r,
        signature=(positive, negative, zeros),
        parity=parity,
        determinant=det,
        class_string=text,
        zeros=zeros,
        definite_disclaimer=disclaimer,
        unimodular=unimodular,
        symmetry=symmetry,
    )


def _classify_rational(form: Matrix, padding_zeros: int, symmetry: str) -> FormClass:
    reduced, radical = _split_radical(form)
    zeros = radical + padding_zeros
    if symmetry != "symmetric":
        return FormClass(
            ring=form.ring.name, rank=reduced.rows, signature=None, parity="n/a",
            determinant=determinant(reduced), class_string=f"rank={reduced.rows} 0^{zeros}",
            zeros=zeros, symmetry=symmetry,
        )
    positive, negative, _ = signature(reduced)
    return FormClass(
        ring=form.ring.name,
        rank=reduced.rows,
        signature=(positive, negative, zeros),
        parity="n/a",
        determinant=determinant(reduced),
        class_string=render_odd(positive, negative, zeros),
        zeros=zeros,
        symmetry=symmetry,
    )


def _field_class_string(reduced: Matrix, ring: RingDescriptor, zeros: int, marker: str) -> tuple[str, bool]:
    """Witt-style class over a finite prime field; marker is '1' or 'y'."""
    r = reduced.rows
    alternating = all(ring.is_zero(reduced.data[i][i]) for i in range(r))
    p = ring.modulus if isinstance(ring, PrimeField) else ring.prime
    if p == 2:
        if alternating:
            return _join([_power(f"H_{marker}", r // 2)] if r else [], zeros), True
        return _join([f"<{marker}>^{r}"] if r else [], zeros), False
    det = determinant(reduced).payload
    if r == 0:
        return _join([], zeros), alternating
    square = legendre_symbol(int(det), p) == 1
    unit = "<1>" if marker == "1" else "<y>"
    if square:
        parts = [f"{unit}^{r}"]
    else:
        parts = ([f"{unit}^{r - 1}"] if r > 1 else []) + [f"<u{marker}>"]
    return _join(parts, zeros), alternating


def _classify_prime_field(form: Matrix, padding_zeros: int, symmetry: str) -> FormClass:
    reduced, radical = _split_radical(form)
    zeros = radical + padding_zeros
    text, alternating = _field_class_string(reduced, form.ring, zeros, "1")
    return FormClass(
        ring=form.ring.name,
        rank=reduced.rows,
        signature=None,
        parity="n/a",
        determinant=determinant(reduced),
        class_string=text,
        alternating=alternating,
        zeros=zeros,
        symmetry=symmetry,
    )


def _classify_truncated(form: Matrix, padding_zeros: int, symmetry: str) -> FormClass:
    ring: TruncatedPolyRing = form.ring
    p = ring.prime
    smith = local_smith(form)
    profile = [0] * (p + 1)
    for d in smith.diagonal:
        profile[ring.valuation(d)] += 1
    profile[p] += form.rows - len(smith.diagonal)
    det = determinant(form)
    top = p - 1
    if all(ring.valuation(a) >= top for row in form.data for a in row):
        residue = PrimeField(p)
        scaled = form.map(lambda a: a[top] % p, residue)
        reduced, radical = _split_radical(scaled)
        zeros = radical + padding_zeros
        text, alternating = _field_class_string(reduced, residue, zeros, "y")
        return FormClass(
            ring=ring.name,
            rank=reduced.rows,
            signature=None,
            parity="n/a",
            determinant=det,
            class_string=text,
            alternating=alternating,
            zeros=zeros,
            divisor_profile=tuple(profile),
            symmetry=symmetry,
        )
    rank_data = ",".join(f"y^{k}:{count}" for k, count in enumerate(profile[:p]) if count)
    zeros = profile[p] + padding_zeros
    return FormClass(
        ring=ring.name,
        rank=sum(profile[:p]),
        signature=None,
        parity="n/a",
        determinant=det,
        class_string=_join([f"unclassified({rank_data})"], zeros),
        zeros=zeros,
        divisor_profile=tuple(profile),
        symmetry=symmetry,
    )


def classify_form(form: Matrix, ring: RingDescriptor | None = None, padding_zeros: int = 0) -> FormClass:
    """
    Classify a square form matrix.

    ``padding_zeros`` adds an orthogonal zero block of that size, so a form on
    M_z can be reported together with the degenerate part of the kernel.
    """
    if form.rows != form.cols:
        raise LinalgError("SHAPE", "Forms are square matrices", shape=form.shape)
    ring = ring or form.ring
    if ring != form.ring:
        raise LinalgError("RING_MISMATCH", f"Form over {form.ring.name} classified as {ring.name}")
    symmetry = _is_symmetric_like(form)
    if isinstance(ring, IntegerRing):
        if symmetry not in ("symmetric", "skew"):
            raise LinalgError("NOT_SYMMETRIC", "Integer form is neither symmetric nor skew")
        return _classify_integer(form, padding_zeros, symmetry)
    if isinstance(ring, RationalField):
        if symmetry not in ("symmetric", "skew"):
            raise LinalgError("NOT_SYMMETRIC", "Rational form is neither symmetric nor skew")
        return _classify_rational(form, padding_zeros, symmetry)
    if isinstance(ring, PrimeField):
        return _classify_prime_field(form, padding_zeros, symmetry)
    if isinstance(ring, TruncatedPolyRing):
        return _classify_truncated(form, padding_zeros, symmetry)
    if isinstance(ring, Cyclotomic16Ring):
        return FormClass(
            ring=ring.name,
            rank=form.rows,
            signature=None,
            parity="n/a",
            determinant=determinant(form),
            class_string=_join([f"unclassified(dim={form.rows})"], padding_zeros),
            zeros=padding_zeros,
            symmetry=symmetry,
        )
    raise LinalgError("UNSUPPORTED", f"No classification over {ring.name}")


# --- class-string parsing ---------------------------------------------------


@dataclass(frozen=True)
class ClassSummary:
    """What a class string determines: rank, signature, parity and zero block."""

    rank: int
    sigma: int | None
    parity: str
    zeros: int


_TOKEN = re.compile(
    r"(H_1|H_y|J|\(-E8\)|\(E8\)|E8|\(-1\)|<y>|<1>|1|0)(?:\^\{?\s*(\d+)\s*\}?)?"
)


def normalize_tex(text: str) -> str:
    """Turn a TeX cell of the published table into plain class notation."""
    plain = text.replace("$", "")
    plain = re.sub(r"\\mathcal\{H\}", "H", plain)
    plain = re.sub(r"H_\{\s*\{?\\tt\s*y\}?\s*\}", "H_y", plain)
    plain = re.sub(r"H_\\tt\s*y", "H_y", plain)
    plain = plain.replace("E_8", "E8")
    return plain


def parse_class_string(text: str) -> ClassSummary:
    """Read rank, signature, parity and zero block from a class string."""
    plain = normalize_tex(text)
    rank = sigma = zeros = 0
    odd = even = local = False
    for match in _TOKEN.finditer(plain):
        base, exponent = match.group(1), int(match.group(2) or 1)
        if base == "0":
            zeros += exponent
        elif base == "1":
            rank += exponent
            sigma += exponent
            odd = True
        elif base == "(-1)":
            rank += exponent
            sigma -= exponent
            odd = True
        elif base == "H_1":
            rank += 2 * exponent
            even = True
        elif base in ("(E8)", "E8"):
            rank += 8 * exponent
            sigma -= 8 * exponent
            even = True
        elif base == "(-E8)":
            rank += 8 * exponent
            sigma += 8 * exponent
            even = True
        elif base in ("H_y", "J"):
            rank += 2 * exponent
            local = True
        else:
            rank += exponent
            local = True
    if local:
        return ClassSummary(rank=rank, sigma=None, parity="n/a", zeros=zeros)
    parity = "odd" if odd else ("even" if even else "n/a")
    return ClassSummary(rank=rank, sigma=sigma, parity=parity, zeros=zeros)


def summarize(form_class: FormClass) -> ClassSummary:
    """The ClassSummary a computed FormClass determines."""
    if form_class.parity in ("odd", "even"):
        return ClassSummary(form_class.rank, form_class.sigma, form_class.parity, form_class.zeros)
    return ClassSummary(form_class.rank, None, "n/a", form_class.zeros)
