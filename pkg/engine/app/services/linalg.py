"""
Dense exact matrices and normal forms.

Row vectors act on the left of matrices (``v -> v @ M``), so kernels are
left kernels and every transform is applied as a row operation on the
input. Algorithms:

- integer row echelon (Hermite style) with a unimodular transform and its
  inverse, used for saturated integer kernels and quotient complements
- field row echelon for Q and Z/P
- Smith normal form over Z, with both transforms and their inverses
- Smith-like diagonalization over F_p[y]/(y^p) with y-power diagonal
- Bareiss determinants, exact inverses, and congruence-diagonalization
  signatures (no floating point anywhere)
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Iterable, Sequence

from app.services.errors import LinalgError
from app.services.rings import (
    Cyclotomic16Ring,
    IntegerRing,
    QQ_FIELD,
    PrimeField,
    RationalField,
    RingDescriptor,
    RingElement,
    TruncatedPolyRing,
    parse_ring,
)

logger = logging.getLogger(__name__)

Payload = Any
Vector = tuple


@dataclass(frozen=True)
class Matrix:
    """Immutable dense matrix of ring payloads, stored row-major."""

    ring: RingDescriptor
    rows: int
    cols: int
    data: tuple[tuple[Payload, ...], ...]

    # --- construction -------------------------------------------------

    @classmethod
    def from_rows(cls, ring: RingDescriptor, rows: Iterable[Iterable[Any]], cols: int | None = None) -> "Matrix":
        """Build from nested iterables of ints, strings, payloads or RingElements."""
        data = tuple(tuple(_coerce(ring, value) for value in row) for row in rows)
        width = cols if cols is not None else (len(data[0]) if data else 0)
        for row in data:
            if len(row) != width:
                raise LinalgError("SHAPE", "Ragged rows in matrix literal", expected=width, got=len(row))
        return cls(ring, len(data), width, data)

    @classmethod
    def from_payloads(cls, ring: RingDescriptor, rows: Sequence[Sequence[Payload]], cols: int) -> "Matrix":
        """Wrap already-canonical payload rows without coercion."""
        return cls(ring, len(rows), cols, tuple(tuple(row) for row in rows))

    @classmethod
    def identity(cls, ring: RingDescriptor, n: int) -> "Matrix":
        zero, one = ring.zero(), ring.one()
        return cls(ring, n, n, tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n)))

    @classmethod
    def zeros(cls, ring: RingDescriptor, rows: int, cols: int) -> "Matrix":
        zero = ring.zero()
        return cls(ring, rows, cols, tuple((zero,) * cols for _ in range(rows)))

    @classmethod
    def diagonal(cls, ring: RingDescriptor, values: Sequence[Any]) -> "Matrix":
        n = len(values)
        zero = ring.zero()
        payloads = [_coerce(ring, v) for v in values]
        return cls(ring, n, n, tuple(tuple(payloads[i] if i == j else zero for j in range(n)) for i in range(n)))

    # --- access -------------------------------------------------------

    def entry(self, i: int, j: int) -> RingElement:
        return RingElement(self.ring, self.data[i][j])

    def row(self, i: int) -> Vector:
        return self.data[i]

    def column(self, j: int) -> Vector:
        return tuple(row[j] for row in self.data)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def submatrix(self, rows: Sequence[int] | None = None, cols: Sequence[int] | None = None) -> "Matrix":
        row_ids = range(self.rows) if rows is None else rows
        col_ids = range(self.cols) if cols is None else cols
        picked = tuple(tuple(self.data[i][j] for j in col_ids) for i in row_ids)
        return Matrix(self.ring, len(picked), len(col_ids), picked)

    # --- arithmetic ---------------------------------------------------

    def _check_same(self, other: "Matrix") -> None:
        if self.ring != other.ring:
            raise LinalgError("RING_MISMATCH", f"Matrices over {self.ring.name} and {other.ring.name}")

    def __add__(self, other: "Matrix") -> "Matrix":
        self._check_same(other)
        if self.shape != other.shape:
            raise LinalgError("SHAPE", "Cannot add matrices of different shapes", left=self.shape, right=other.shape)
        add = self.ring.add
        return Matrix(self.ring, self.rows, self.cols, tuple(
            tuple(add(a, b) for a, b in zip(r1, r2)) for r1, r2 in zip(self.data, other.data)
        ))

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._check_same(other)
        if self.shape != other.shape:
            raise LinalgError("SHAPE", "Cannot subtract matrices of different shapes", left=self.shape, right=other.shape)
        sub = self.ring.sub
        return Matrix(self.ring, self.rows, self.cols, tuple(
            tuple(sub(a, b) for a, b in zip(r1, r2)) for r1, r2 in zip(self.data, other.data)
        ))

    def __neg__(self) -> "Matrix":
        neg = self.ring.neg
        return Matrix(self.ring, self.rows, self.cols, tuple(tuple(neg(a) for a in row) for row in self.data))

    def __matmul__(self, other: "Matrix") -> "Matrix":
        self._check_same(other)
        if self.cols != other.rows:
            raise LinalgError("SHAPE", "Inner dimensions differ", left=self.shape, right=other.shape)
        columns = [other.column(j) for j in range(other.cols)]
        data = tuple(tuple(dot(self.ring, row, column) for column in columns) for row in self.data)
        return Matrix(self.ring, self.rows, other.cols, data)

    def scale(self, scalar: Any) -> "Matrix":
        factor = _coerce(self.ring, scalar)
        mul = self.ring.mul
        return Matrix(self.ring, self.rows, self.cols, tuple(tuple(mul(factor, a) for a in row) for row in self.data))

    def transpose(self) -> "Matrix":
        return Matrix(self.ring, self.cols, self.rows, tuple(self.column(j) for j in range(self.cols)))

    def involute(self) -> "Matrix":
        """Entrywise ring involution (identity except over Zzeta16)."""
        if not self.ring.has_involution:
            return self
        inv = self.ring.involute
        return Matrix(self.ring, self.rows, self.cols, tuple(tuple(inv(a) for a in row) for row in self.data))

    def map(self, function: Callable[[Payload], Payload], ring: RingDescriptor) -> "Matrix":
        """Apply a payload map into another ring (base change)."""
        return Matrix(ring, self.rows, self.cols, tuple(tuple(function(a) for a in row) for row in self.data))

    def power(self, exponent: int) -> "Matrix":
        if self.rows != self.cols:
            raise LinalgError("SHAPE", "Only square matrices have powers", shape=self.shape)
        if exponent < 0:
            return inverse(self).power(-exponent)
        result = Matrix.identity(self.ring, self.rows)
        base = self
        while exponent:
            if exponent & 1:
                result = result @ base
            base = base @ base
            exponent >>= 1
        return result

    # --- predicates ---------------------------------------------------

    def is_zero(self) -> bool:
        is_zero = self.ring.is_zero
        return all(is_zero(a) for row in self.data for a in row)

    def is_identity(self) -> bool:
        return self.rows == self.cols and self == Matrix.identity(self.ring, self.rows)

    def is_symmetric(self) -> bool:
        return self.rows == self.cols and self == self.transpose()

    def is_skew(self) -> bool:
        return self.rows == self.cols and self == -self.transpose()

    def is_hermitian(self) -> bool:
        return self.rows == self.cols and self == self.transpose().involute()

    def is_skew_hermitian(self) -> bool:
        return self.rows == self.cols and self == -self.transpose().involute()

    # --- serialization ------------------------------------------------

    def to_strings(self) -> list[list[str]]:
        fmt = self.ring.format
        return [[fmt(a) for a in row] for row in self.data]

    def to_json(self) -> dict[str, Any]:
        return {"ring": self.ring.name, "rows": self.rows, "cols": self.cols, "entries": self.to_strings()}

    @classmethod
    def from_json(cls, document: dict[str, Any]) -> "Matrix":
        ring = parse_ring(document["ring"])
        entries = document.get("entries", [])
        return cls.from_rows(ring, entries, cols=document.get("cols"))

    def __str__(self) -> str:
        return "\n".join(" ".join(row) for row in self.to_strings())


def _coerce(ring: RingDescriptor, value: Any) -> Payload:
    if isinstance(value, (int, str, RingElement)) and not isinstance(value, bool):
        return ring.coerce(value)
    return value


def dot(ring: RingDescriptor, left: Sequence[Payload], right: Sequence[Payload]) -> Payload:
    """Exact inner product of two payload sequences."""
    if isinstance(ring, (IntegerRing, RationalField)):
        return sum((a * b for a, b in zip(left, right) if a and b), ring.zero())
    if isinstance(ring, PrimeField):
        return sum(a * b for a, b in zip(left, right)) % ring.modulus
    total = ring.zero()
    is_zero, add, mul = ring.is_zero, ring.add, ring.mul
    for a, b in zip(left, right):
        if not is_zero(a) and not is_zero(b):
            total = add(total, mul(a, b))
    return total


def vec_mat(ring: RingDescriptor, vector: Sequence[Payload], matrix: Matrix) -> Vector:
    """Row vector times matrix."""
    return tuple(dot(ring, vector, matrix.column(j)) for j in range(matrix.cols))


def vec_add(ring: RingDescriptor, left: Sequence[Payload], right: Sequence[Payload]) -> Vector:
    add = ring.add
    return tuple(add(a, b) for a, b in zip(left, right))


def vec_sub(ring: RingDescriptor, left: Sequence[Payload], right: Sequence[Payload]) -> Vector:
    sub = ring.sub
    return tuple(sub(a, b) for a, b in zip(left, right))


def vec_scale(ring: RingDescriptor, scalar: Payload, vector: Sequence[Payload]) -> Vector:
    mul = ring.mul
    return tuple(mul(scalar, a) for a in vector)


def vstack(blocks: Sequence[Matrix], ring: RingDescriptor | None = None, cols: int | None = None) -> Matrix:
    """Stack matrices vertically; ring and cols are needed when blocks is empty."""
    if not blocks:
        if ring is None or cols is None:
            raise LinalgError("SHAPE", "Empty vstack needs ring and width")
        return Matrix(ring, 0, cols, ())
    first = blocks[0]
    for block in blocks[1:]:
        first._check_same(block)
        if block.cols != first.cols:
            raise LinalgError("SHAPE", "vstack width mismatch", expected=first.cols, got=block.cols)
    data = tuple(row for block in blocks for row in block.data)
    return Matrix(first.ring, len(data), first.cols, data)


def hstack(blocks: Sequence[Matrix]) -> Matrix:
    first = blocks[0]
    for block in blocks[1:]:
        first._check_same(block)
        if block.rows != first.rows:
            raise LinalgError("SHAPE", "hstack height mismatch", expected=first.rows, got=block.rows)
    data = tuple(tuple(a for block in blocks for a in block.data[i]) for i in range(first.rows))
    return Matrix(first.ring, first.rows, sum(b.cols for b in blocks), data)


def block_diagonal(blocks: Sequence[Matrix]) -> Matrix:
    ring = blocks[0].ring
    width = sum(b.cols for b in blocks)
    zero = ring.zero()
    rows: list[tuple] = []
    offset = 0
    for block in blocks:
        for row in block.data:
            rows.append((zero,) * offset + tuple(row) + (zero,) * (width - offset - block.cols))
        offset += block.cols
    return Matrix(ring, len(rows), width, tuple(rows))


# --- echelon forms ----------------------------------------------------------


@dataclass(frozen=True)
class EchelonData:
    """transform @ input == form; nonzero rows of form come first."""

    form: Matrix
    transform: Matrix
    inverse: Matrix
    rank: int
    pivots: tuple[int, ...]


class _RowWorkspace:
    """Mutable working copy that tracks a left transform and its inverse."""

    def __init__(self, ring: RingDescriptor, matrix: Matrix):
        self.ring = ring
        self.a = [list(row) for row in matrix.data]
        n = matrix.rows
        zero, one = ring.zero(), ring.one()
        self.u = [[one if i == j else zero for j in range(n)] for i in range(n)]
        self.u_inv = [[one if i == j else zero for j in range(n)] for i in range(n)]

    def swap(self, i: int, j: int) -> None:
        if i == j:
            return
        self.a[i], self.a[j] = self.a[j], self.a[i]
        self.u[i], self.u[j] = self.u[j], self.u[i]
        for row in self.u_inv:
            row[i], row[j] = row[j], row[i]

    def add_multiple(self, target: int, source: int, factor: Payload) -> None:
        """row[target] += factor * row[source]."""
        ring = self.ring
        if ring.is_zero(factor):
            return
        add, mul, sub = ring.add, ring.mul, ring.sub
        self.a[target] = [add(x, mul(factor, y)) for x, y in zip(self.a[target], self.a[source])]
        self.u[target] = [add(x, mul(factor, y)) for x, y in zip(self.u[target], self.u[source])]
        # inverse: column[source] -= factor * column[target]
        for row in self.u_inv:
            row[source] = sub(row[source], mul(factor, row[target]))

    def scale(self, i: int, unit: Payload) -> None:
        """row[i] *= unit (unit must be invertible)."""
        ring = self.ring
        mul = ring.mul
        inv = ring.invert(unit)
        self.a[i] = [mul(unit, x) for x in self.a[i]]
        self.u[i] = [mul(unit, x) for x in self.u[i]]
        for row in self.u_inv:
            row[i] = mul(row[i], inv)

    def result(self, cols: int) -> tuple[Matrix, Matrix, Matrix]:
        n = len(self.a)
        ring = self.ring
        return (
            Matrix.from_payloads(ring, self.a, cols),
            Matrix.from_payloads(ring, self.u, n),
            Matrix.from_payloads(ring, self.u_inv, n),
        )


def integer_echelon(matrix: Matrix) -> EchelonData:
    """Row echelon form over Z by gcd row reduction, with pivots made positive and entries above reduced."""
    if not isinstance(matrix.ring, IntegerRing):
        raise LinalgError("UNSUPPORTED", f"integer_echelon needs Z, got {matrix.ring.name}")
    ws = _RowWorkspace(matrix.ring, matrix)
    a = ws.a
    n, m = matrix.rows, matrix.cols
    r = 0
    pivots: list[int] = []
    for c in range(m):
        if r >= n:
            break
        while True:
            candidates = [i for i in range(r, n) if a[i][c] != 0]
            if not candidates:
                break
            best = min(candidates, key=lambda i: abs(a[i][c]))
            ws.swap(r, best)
            done = True
            for i in range(r + 1, n):
                if a[i][c] != 0:
                    ws.add_multiple(i, r, -(a[i][c] // a[r][c]))
                    if a[i][c] != 0:
                        done = False
            if done:
                break
        if a[r][c] == 0:
            continue
        if a[r][c] < 0:
            ws.scale(r, -1)
        for i in range(r):
            if a[i][c] != 0:
                ws.add_multiple(i, r, -(a[i][c] // a[r][c]))
        pivots.append(c)
        r += 1
    form, transform, inv = ws.result(m)
    logger.debug("integer echelon of %dx%d matrix: rank %d", n, m, r)
    return EchelonData(form, transform, inv, r, tuple(pivots))


def field_echelon(matrix: Matrix) -> EchelonData:
    """Reduced row echelon form over a field with transform tracking."""
    ring = matrix.ring
    if not ring.is_field:
        raise LinalgError("UNSUPPORTED", f"field_echelon needs a field, got {ring.name}")
    ws = _RowWorkspace(ring, matrix)
    a = ws.a
    n, m = matrix.rows, matrix.cols
    r = 0
    pivots: list[int] = []
    for c in range(m):
        if r >= n:
            break
        pivot = next((i for i in range(r, n) if not ring.is_zero(a[i][c])), None)
        if pivot is None:
            continue
        ws.swap(r, pivot)
        ws.scale(r, ring.invert(a[r][c]))
        for i in range(n):
            if i != r and not ring.is_zero(a[i][c]):
                ws.add_multiple(i, r, ring.neg(a[i][c]))
        pivots.append(c)
        r += 1
    form, transform, inv = ws.result(m)
    return EchelonData(form, transform, inv, r, tuple(pivots))


def echelon(matrix: Matrix) -> EchelonData:
    """Dispatch to the integer or field echelon form."""
    if isinstance(matrix.ring, IntegerRing):
        return integer_echelon(matrix)
    if matrix.ring.is_field:
        return field_echelon(matrix)
    raise LinalgError("UNSUPPORTED", f"No echelon form over {matrix.ring.name}")


# --- Smith forms ------------------------------------------------------------


@dataclass(frozen=True)
class SmithData:
    """left @ input @ right == diagonal matrix with the given entries."""

    left: Matrix
    right: Matrix
    diagonal: tuple[Payload, ...]
    left_inverse: Matrix
    right_inverse: Matrix
    determinant_unit: Payload = None

    @property
    def rank(self) -> int:
        ring = self.left.ring
        return sum(1 for d in self.diagonal if not ring.is_zero(d))


class _TwoSidedWorkspace(_RowWorkspace):
    """Row workspace extended with column operations on a right transform."""

    def __init__(self, ring: RingDescriptor, matrix: Matrix):
        super().__init__(ring, matrix)
        c = matrix.cols
        zero, one = ring.zero(), ring.one()
        self.v = [[one if i == j else zero for j in range(c)] for i in range(c)]
        self.v_inv = [[one if i == j else zero for j in range(c)] for i in range(c)]
        self.det = ring.one()

    def swap(self, i: int, j: int) -> None:
        if i != j:
            self.det = self.ring.neg(self.det)
        super().swap(i, j)

    def scale(self, i: int, unit: Payload) -> None:
        self.det = self.ring.mul(self.det, unit)
        super().scale(i, unit)

    def swap_cols(self, i: int, j: int) -> None:
        if i == j:
            return
        self.det = self.ring.neg(self.det)
        for row in self.a:
            row[i], row[j] = row[j], row[i]
        for row in self.v:
            row[i], row[j] = row[j], row[i]
        self.v_inv[i], self.v_inv[j] = self.v_inv[j], self.v_inv[i]

    def add_col_multiple(self, target: int, source: int, factor: Payload) -> None:
        """col[target] += factor * col[source]."""
        ring = self.ring
        if ring.is_zero(factor):
            return
        add, mul, sub = ring.add, ring.mul, ring.sub
        for row in self.a:
            row[target] = add(row[target], mul(factor, row[source]))
        for row in self.v:
            row[target] = add(row[target], mul(factor, row[source]))
        # inverse: row[source] -= factor * row[target]
        self.v_inv[source] = [sub(x, mul(factor, y)) for x, y in zip(self.v_inv[source], self.v_inv[target])]

    def smith(self, diagonal: tuple) -> SmithData:
        ring = self.ring
        n, c = len(self.a), len(self.v)
        return SmithData(
            left=Matrix.from_payloads(ring, self.u, n),
            right=Matrix.from_payloads(ring, self.v, c),
            diagonal=diagonal,
            left_inverse=Matrix.from_payloads(ring, self.u_inv, n),
            right_inverse=Matrix.from_payloads(ring, self.v_inv, c),
            determinant_unit=self.det,
        )


def smith_normal_form(matrix: Matrix) -> SmithData:
    """Smith normal form over Z: nonnegative diagonal in divisibility order."""
    if not isinstance(matrix.ring, IntegerRing):
        raise LinalgError("UNSUPPORTED", f"smith_normal_form needs Z, got {matrix.ring.name}")
    ws = _TwoSidedWorkspace(matrix.ring, matrix)
    a = ws.a
    n, m = matrix.rows, matrix.cols
    diagonal: list[int] = []
    t = 0
    while t < min(n, m):
        entries = [(abs(a[i][j]), i, j) for i in range(t, n) for j in range(t, m) if a[i][j] != 0]
        if not entries:
            break
        _, i0, j0 = min(entries)
        ws.swap(t, i0)
        ws.swap_cols(t, j0)
        while True:
            reduced = True
            for i in range(t + 1, n):
                if a[i][t] != 0:
                    ws.add_multiple(i, t, -(a[i][t] // a[t][t]))
                    if a[i][t] != 0:
                        ws.swap(t, i)
                        reduced = False
            for j in range(t + 1, m):
                if a[t][j] != 0:
                    ws.add_col_multiple(j, t, -(a[t][j] // a[t][t]))
                    if a[t][j] != 0:
                        ws.swap_cols(t, j)
                        reduced = False
            if not reduced:
                continue
            offender = next(
                (i for i in range(t + 1, n) for j in range(t + 1, m) if a[i][j] % a[t][t] != 0),
                None,
            )
            if offender is None:
                break
            ws.add_multiple(t, offender, 1)
        if a[t][t] < 0:
            ws.scale(t, -1)
        diagonal.append(a[t][t])
        t += 1
    diagonal.extend([0] * (min(n, m) - len(diagonal)))
    logger.debug("Smith form of %dx%d matrix: %s", n, m, diagonal)
    return ws.smith(tuple(diagonal))


def local_smith(matrix: Matrix) -> SmithData:
    """
    Diagonalize over F_p[y]/(y^p) with diagonal entries y^k in increasing k.

    Pivots are chosen with minimal y-adic valuation so every elimination
    is an exact division. Missing diagonal entries are zero.
    """
    ring = matrix.ring
    if not isinstance(ring, TruncatedPolyRing):
        raise LinalgError("UNSUPPORTED", f"local_smith needs Fpy:p, got {ring.name}")
    ws = _TwoSidedWorkspace(ring, matrix)
    a = ws.a
    n, m = matrix.rows, matrix.cols
    p = ring.prime
    diagonal: list[Payload] = []
    for t in range(min(n, m)):
        best = None
        for i in range(t, n):
            for j in range(t, m):
                k = ring.valuation(a[i][j])
                if k < p and (best is None or k < best[0]):
                    best = (k, i, j)
                    if k == 0:
                        break
            if best is not None and best[0] == 0:
                break
        if best is None:
            break
        k, i0, j0 = best
        ws.swap(t, i0)
        ws.swap_cols(t, j0)
        unit = ring.shift_down(a[t][t], k)
        ws.scale(t, ring.invert(unit))
        pivot = a[t][t]
        for i in range(t + 1, n):
            if not ring.is_zero(a[i][t]):
                ws.add_multiple(i, t, ring.neg(ring.divide(a[i][t], pivot)))
        for j in range(t + 1, m):
            if not ring.is_zero(a[t][j]):
                ws.add_col_multiple(j, t, ring.neg(ring.divide(a[t][j], pivot)))
        diagonal.append(pivot)
    diagonal.extend([ring.zero()] * (min(n, m) - len(diagonal)))
    return ws.smith(tuple(diagonal))


# --- kernels and ranks ------------------------------------------------------


def kernel_generators(matrix: Matrix) -> tuple[Matrix, tuple[int, ...]]:
    """
    Generators of the left kernel {v : v @ matrix == 0}.

    Over Z and fields the generators are a basis (saturated over Z) and every
    annihilator exponent is 0. Over F_p[y]/(y^p) generator y^(p-k) * row is
    annihilated by y^k; free generators report exponent p.
    """
    ring = matrix.ring
    if isinstance(ring, IntegerRing) or ring.is_field:
        data = echelon(matrix)
        rows = data.transform.data[data.rank:]
        return Matrix(ring, len(rows), matrix.rows, rows), (0,) * len(rows)
    if isinstance(ring, TruncatedPolyRing):
        smith = local_smith(matrix)
        p = ring.prime
        rows: list[tuple] = []
        exponents: list[int] = []
        left = smith.left.data
        for t in range(matrix.rows):
            if t < len(smith.diagonal) and not ring.is_zero(smith.diagonal[t]):
                k = ring.valuation(smith.diagonal[t])
                if k == 0:
                    continue
                multiplier = ring.monomial(p - k)
                rows.append(vec_scale(ring, multiplier, left[t]))
                exponents.append(k)
            else:
                rows.append(left[t])
                exponents.append(p)
        return Matrix(ring, len(rows), matrix.rows, tuple(rows)), tuple(exponents)
    raise LinalgError("UNSUPPORTED", f"No kernel algorithm over {ring.name}", ring=ring.name)


def kernel_basis(matrix: Matrix) -> Matrix:
    """Rows generating the left kernel of matrix."""
    return kernel_generators(matrix)[0]


def rank(matrix: Matrix) -> int:
    """Rank over Z or a field; number of nonzero Smith entries over F_p[y]/(y^p)."""
    ring = matrix.ring
    if isinstance(ring, IntegerRing) or ring.is_field:
        return echelon(matrix).rank
    if isinstance(ring, TruncatedPolyRing):
        return local_smith(matrix).rank
    raise LinalgError("UNSUPPORTED", f"No rank over {ring.name}", ring=ring.name)


def to_rational(matrix: Matrix) -> Matrix:
    """View an integer matrix over Q."""
    if isinstance(matrix.ring, RationalField):
        return matrix
    if not isinstance(matrix.ring, IntegerRing):
        raise LinalgError("UNSUPPORTED", f"Cannot view {matrix.ring.name} inside Q")
    return matrix.map(Fraction, QQ_FIELD)


# --- determinants and inverses ----------------------------------------------


def _bareiss(ring: RingDescriptor, rows: Sequence[Sequence[Payload]]) -> Payload:
    n = len(rows)
    if n == 0:
        return ring.one()
    a = [list(row) for row in rows]
    negate = False
    previous = ring.one()
    is_zero, mul, sub, div = ring.is_zero, ring.mul, ring.sub, ring.divide
    for k in range(n - 1):
        if is_zero(a[k][k]):
            swap = next((i for i in range(k + 1, n) if not is_zero(a[i][k])), None)
            if swap is None:
                return ring.zero()
            a[k], a[swap] = a[swap], a[k]
            negate = not negate
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = div(sub(mul(a[i][j], a[k][k]), mul(a[i][k], a[k][j])), previous)
        previous = a[k][k]
    det = a[n - 1][n - 1]
    return ring.neg(det) if negate else det


def determinant(matrix: Matrix) -> RingElement:
    """Exact determinant of a square matrix over any supported ring."""
    if matrix.rows != matrix.cols:
        raise LinalgError("SHAPE", "Determinant of a non-square matrix", shape=matrix.shape)
    ring = matrix.ring
    if isinstance(ring, TruncatedPolyRing):
        smith = local_smith(matrix)
        product = ring.one()
        for d in smith.diagonal:
            product = ring.mul(product, d)
        return RingElement(ring, ring.divide(product, smith.determinant_unit))
    return RingElement(ring, _bareiss(ring, matrix.data))


def _gauss_jordan_inverse(matrix: Matrix) -> Matrix:
    ring = matrix.ring
    n = matrix.rows
    ws = _RowWorkspace(ring, matrix)
    a = ws.a
    for c in range(n):
        pivot = next((i for i in range(c, n) if ring.is_unit(a[i][c])), None)
        if pivot is None:
            raise LinalgError("SINGULAR", f"Matrix is not invertible over {ring.name}")
        ws.swap(c, pivot)
        ws.scale(c, ring.invert(a[c][c]))
        for i in range(n):
            if i != c and not ring.is_zero(a[i][c]):
                ws.add_multiple(i, c, ring.neg(a[i][c]))
    return Matrix.from_payloads(ring, ws.u, n)


def inverse(matrix: Matrix) -> Matrix:
    """Exact inverse; raises LinalgError when the matrix is not invertible over its ring."""
    if matrix.rows != matrix.cols:
        raise LinalgError("SHAPE", "Inverse of a non-square matrix", shape=matrix.shape)
    ring = matrix.ring
    if isinstance(ring, IntegerRing):
        rational = _gauss_jordan_inverse(to_rational(matrix))
        if any(value.denominator != 1 for row in rational.data for value in row):
            raise LinalgError("SINGULAR", "Integer matrix is not unimodular")
        return rational.map(int, ring)
    if isinstance(ring, Cyclotomic16Ring):
        return _adjugate_inverse(matrix)
    return _gauss_jordan_inverse(matrix)


def _adjugate_inverse(matrix: Matrix) -> Matrix:
    ring = matrix.ring
    n = matrix.rows
    det = _bareiss(ring, matrix.data)
    if not ring.is_unit(det):
        raise LinalgError("SINGULAR", f"Determinant {ring.format(det)} is not a unit in {ring.name}")
    det_inverse = ring.invert(det)
    cofactors = [[ring.zero()] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [
                [matrix.data[r][c] for c in range(n) if c != j]
                for r in range(n) if r != i
            ]
            value = _bareiss(ring, minor)
            if (i + j) % 2:
                value = ring.neg(value)
            # adjugate is the transposed cofactor matrix
            cofactors[j][i] = ring.mul(value, det_inverse)
    return Matrix.from_payloads(ring, cofactors, n)


# --- signatures -------------------------------------------------------------


def signature(form: Matrix) -> tuple[int, int, int]:
    """
    Counts (positive, negative, zero) of a symmetric form over Z or Q.

    Symmetric Gaussian elimination on rationals; when every remaining
    diagonal entry vanishes, a nonzero off-diagonal pair is split off as a
    hyperbolic plane contributing (1, 1).
    """
    if not isinstance(form.ring, (IntegerRing, RationalField)):
        raise LinalgError("UNSUPPORTED", f"Signature needs Z or Q, got {form.ring.name}")
    if not form.is_symmetric():
        raise LinalgError("NOT_SYMMETRIC", "Signature of a non-symmetric matrix")
    n = form.rows
    a = {i: {j: Fraction(form.data[i][j]) for j in range(n)} for i in range(n)}
    active = list(range(n))
    positive = negative = 0
    while active:
        pivot = next((i for i in active if a[i][i] != 0), None)
        if pivot is not None:
            d = a[pivot][pivot]
            if d > 0:
                positive += 1
            else:
                negative += 1
            active.remove(pivot)
            column = {r: a[r][pivot] for r in active if a[r][pivot] != 0}
            for r, x in column.items():
                factor = x / d
                row_r = a[r]
                for s, y in column.items():
                    row_r[s] -= factor * y
            continue
        pair = next(((i, j) for i in active for j in active if i < j and a[i][j] != 0), None)
        if pair is None:
            break
        i, j = pair
        b = a[i][j]
        positive += 1
        negative += 1
        active.remove(i)
        active.remove(j)
        for r in active:
            ri, rj = a[r][i], a[r][j]
            if ri == 0 and rj == 0:
                continue
            row_r = a[r]
            for s in active:
                si, sj = a[s][i], a[s][j]
                if si == 0 and sj == 0:
                    continue
                row_r[s] -= (rj * si + ri * sj) / b
    return positive, negative, n - positive - negative
