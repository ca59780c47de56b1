"""
The bilinear-form invariant of a Hurwitz tuple.

Vectors of M^m are flat rows of length m*d, block j holding x_j. For a tuple
whose evaluated product is the identity,

    Gamma_1(x) = sum_j x_j (1 - e_j) P_j+1,    P_j = e_j ... e_m,

so writing x_j (1 - e_j) = t_j R_j through an echelon form of (1 - e_j)
turns the kernel into (fixed vectors of each e_j) + (lifts of the left kernel
K_t of the stacked R_j P_j+1). The diagonal maps into K_t, and M_z is the
complement of its saturated image. Over F_p[y]/(y^p) the kernel is computed
directly and M_z is represented by minimal generators of K / D.
"""

import logging
import random
from dataclasses import dataclass, field
from typing import Any

from app.services import hurwitz
from app.services.errors import InvariantError
from app.services.forms import FormClass, classify_form
from app.services.hurwitz import HurwitzTuple, MoveSpec
from app.services.linalg import (
    Matrix,
    determinant,
    echelon,
    hstack,
    inverse,
    kernel_generators,
    smith_normal_form,
    dot,
    vec_add,
    vec_mat,
    vec_scale,
    vec_sub,
)
from app.services.representations import (
    ProductCheck,
    Representation,
    coinvariants_rank,
    product_check,
)
from app.services.rings import IntegerRing, RingDescriptor, TruncatedPolyRing

logger = logging.getLogger(__name__)


# --- Gamma maps -------------------------------------------------------------


def _blocks(vector: tuple, d: int) -> list[tuple]:
    return [tuple(vector[j:j + d]) for j in range(0, len(vector), d)]


def gamma_k(t: HurwitzTuple, rep: Representation, k: int) -> Matrix:
    """
    The (m*d) x d matrix of Gamma_k, built literally:

        (x_k-1 - x_k) + sum_{j=k}^{m+k-2} (x_j - x_j+1) e_j+1 ... e_m+k-1
    """
    m, d, ring = t.m, rep.dim, rep.ring
    if not 1 <= k <= m:
        raise InvariantError("INDEX", f"Gamma index {k} outside 1..{m}", k=k, m=m)
    entries = rep.evaluate_tuple(t)
    identity = Matrix.identity(ring, d)
    blocks = [Matrix.zeros(ring, d, d) for _ in range(m)]

    def at(index: int) -> int:
        return (index - 1) % m

    blocks[at(k - 1)] = blocks[at(k - 1)] + identity
    blocks[at(k)] = blocks[at(k)] - identity
    suffix = identity
    for j in range(m + k - 2, k - 1, -1):
        suffix = entries[at(j + 1)] @ suffix
        blocks[at(j)] = blocks[at(j)] + suffix
        blocks[at(j + 1)] = blocks[at(j + 1)] - suffix
    data = tuple(row for block in blocks for row in block.data)
    return Matrix(ring, m * d, d, data)


def apply_gamma(x: tuple, t: HurwitzTuple, rep: Representation, k: int = 1) -> tuple:
    return vec_mat(rep.ring, x, gamma_k(t, rep, k))


# --- kernel -----------------------------------------------------------------


@dataclass
class _Structure:
    """Echelon data of each (1 - e_j) and the left kernel K_t, for Z and fields."""

    ranks: list[int]
    lifts: list[Matrix]
    diagonal_images: Matrix
    kt_basis: Matrix
    kt_coordinates: Matrix


@dataclass
class KernelData:
    """Generators of Ker Gamma_z together with the data used to build them."""

    tuple_ref: str
    rep_ref: str
    basis: Matrix
    product: ProductCheck
    exponents: tuple[int, ...] = ()
    label: str = ""
    structure: _Structure | None = field(default=None, repr=False)

    @property
    def rank(self) -> int:
        return self.basis.rows

    @property
    def product_scalar(self) -> Any:
        if self.product.kind == "non-scalar":
            return "non-scalar"
        return self.product.scalar


def _place(ring: RingDescriptor, m: int, d: int, j: int, row: tuple) -> tuple:
    zero = ring.zero()
    return (zero,) * (j * d) + tuple(row) + (zero,) * ((m - j - 1) * d)


def _diagonal_rows(ring: RingDescriptor, m: int, d: int) -> list[tuple]:
    identity = Matrix.identity(ring, d)
    return [tuple(a for _ in range(m) for a in identity.data[i]) for i in range(d)]


def _structured_kernel(t: HurwitzTuple, rep: Representation) -> tuple[list[tuple], _Structure]:
    ring, d, m = rep.ring, rep.dim, t.m
    entries = rep.evaluate_tuple(t)
    identity = Matrix.identity(ring, d)
    suffixes = [identity] * (m + 1)
    for j in range(m - 1, -1, -1):
        suffixes[j] = entries[j] @ suffixes[j + 1]
    rows: list[tuple] = []
    ranks, lifts, images, stacked = [], [], [], []
    for j in range(m):
        data = echelon(identity - entries[j])
        r = data.rank
        ranks.append(r)
        lifts.append(data.transform.submatrix(rows=range(r)))
        images.append(data.inverse.submatrix(cols=range(r)))
        stacked.append(data.form.submatrix(rows=range(r)) @ suffixes[j + 1])
        rows.extend(_place(ring, m, d, j, data.transform.data[i]) for i in range(r, d))
    total = sum(ranks)
    g_matrix = Matrix(ring, total, d, tuple(row for block in stacked for row in block.data))
    g_echelon = echelon(g_matrix)
    kt_basis = g_echelon.transform.submatrix(rows=range(g_echelon.rank, total))
    diagonal_images = hstack(images) if total else Matrix.zeros(ring, d, 0)
    coordinates = diagonal_images @ g_echelon.inverse if total else diagonal_images
    if any(not ring.is_zero(a) for row in coordinates.data for a in row[:g_echelon.rank]):
        raise InvariantError("DIAGONAL_OUTSIDE_KERNEL", "Diagonal vectors do not lie in the kernel")
    kt_coordinates = coordinates.submatrix(cols=range(g_echelon.rank, total))
    structure = _Structure(ranks, lifts, diagonal_images, kt_basis, kt_coordinates)
    for t_row in kt_basis.data:
        rows.append(_lift(ring, structure, t_row, d))
    logger.debug("Structured kernel: sum of ranks %d, K_t rank %d, kernel rank %d",
                 total, kt_basis.rows, len(rows))
    return rows, structure


def _lift(ring: RingDescriptor, structure: _Structure, t_row: tuple, d: int) -> tuple:
    out: list = []
    offset = 0
    for r, lift in zip(structure.ranks, structure.lifts):
        if r:
            out.extend(vec_mat(ring, t_row[offset:offset + r], lift))
        else:
            out.extend((ring.zero(),) * d)
        offset += r
    return tuple(out)


def _injective_shift(ring: RingDescriptor, c: Any) -> bool:
    """Whether multiplication by 1 - c is injective on free modules."""
    shift = ring.sub(ring.one(), c)
    if isinstance(ring, IntegerRing):
        return shift != 0
    return ring.is_unit(shift)


def kernel(t: HurwitzTuple, rep: Representation) -> KernelData:
    """
    Ker Gamma_z. With identity product only Gamma_1 is needed; with a scalar
    product c and 1 - c a non-zero-divisor the kernel is the diagonal;
    otherwise the kernels of all Gamma_k are intersected.
    """
    ring, d, m = rep.ring, rep.dim, t.m
    if not (isinstance(ring, (IntegerRing, TruncatedPolyRing)) or ring.is_field):
        raise InvariantError("UNSUPPORTED_RING", f"No kernel computation over {ring.name}", ring=ring.name)
    check = product_check(t, rep)
    common = dict(tuple_ref=t.label or f"tuple[m={m}]", rep_ref=rep.name, product=check, label=t.label)
    if check.is_identity:
        if isinstance(ring, TruncatedPolyRing):
            basis, exponents = kernel_generators(gamma_k(t, rep, 1))
            return KernelData(basis=basis, exponents=exponents, **common)
        rows, structure = _structured_kernel(t, rep)
        basis = Matrix(ring, len(rows), m * d, tuple(rows))
        return KernelData(basis=basis, exponents=(0,) * len(rows), structure=structure, **common)
    if check.kind == "scalar" and _injective_shift(ring, check.scalar):
        rows = _diagonal_rows(ring, m, d)
        logger.info("Scalar product %s: kernel is the diagonal", ring.format(check.scalar))
        return KernelData(basis=Matrix(ring, d, m * d, tuple(rows)), exponents=(0,) * d, **common)
    logger.info("%s: intersecting the kernels of all Gamma_k", check.describe())
    stacked = hstack([gamma_k(t, rep, k) for k in range(1, m + 1)])
    basis, exponents = kernel_generators(stacked)
    return KernelData(basis=basis, exponents=exponents, **common)


def in_kernel(x: tuple, t: HurwitzTuple, rep: Representation, product: ProductCheck | None = None) -> bool:
    product = product or product_check(t, rep)
    indices = [1] if product.is_identity else range(1, t.m + 1)
    return all(all(rep.ring.is_zero(a) for a in apply_gamma(x, t, rep, k)) for k in indices)


def degenerate_submodule(t: HurwitzTuple, rep: Representation) -> Matrix:
    """Rows spanning Diag(M) + sum_i Ker(1 - e_i), placed blockwise."""
    ring, d, m = rep.ring, rep.dim, t.m
    rows = _diagonal_rows(ring, m, d)
    identity = Matrix.identity(ring, d)
    for j, matrix in enumerate(rep.evaluate_tuple(t)):
        fixed, _ = kernel_generators(identity - matrix)
        rows.extend(_place(ring, m, d, j, row) for row in fixed.data)
    return Matrix(ring, len(rows), m * d, tuple(rows))


# --- quotient M_z -----------------------------------------------------------


@dataclass
class Quotient:
    """Lifted basis (or minimal generators) of M_z and the torsion of Ker / D."""

    basis: Matrix
    kernel_rank: int
    torsion: tuple[int, ...] = ()


class _FpSpan:
    """Incremental F_p row space; add() reports whether the vector was new."""

    def __init__(self, p: int):
        self.p = p
        self.pivots: dict[int, list[int]] = {}

    def add(self, vector: list[int]) -> bool:
        p = self.p
        v = [a % p for a in vector]
        for column, row in self.pivots.items():
            if v[column]:
                factor = v[column]
                v = [(a - factor * b) % p for a, b in zip(v, row)]
        lead = next((i for i, a in enumerate(v) if a), None)
        if lead is None:
            return False
        inv = pow(v[lead], -1, p)
        v = [(a * inv) % p for a in v]
        for column, row in self.pivots.items():
            if row[lead]:
                factor = row[lead]
                self.pivots[column] = [(a - factor * b) % p for a, b in zip(row, v)]
        self.pivots[lead] = v
        return True


def _expand(ring: TruncatedPolyRing, vector: tuple, shift: int = 0) -> list[int]:
    """F_p coordinates of y^shift * vector."""
    monomial = ring.monomial(shift)
    out: list[int] = []
    for a in vector:
        out.extend(ring.mul(monomial, a))
    return out


def _local_quotient(data: KernelData, degenerate: Matrix) -> Quotient:
    ring: TruncatedPolyRing = data.basis.ring
    p = ring.prime
    radical_span = _FpSpan(p)
    kernel_span = _FpSpan(p)
    for row in degenerate.data:
        for shift in range(p):
            radical_span.add(_expand(ring, row, shift))
    for row in data.basis.data:
        for shift in range(1, p):
            expanded = _expand(ring, row, shift)
            radical_span.add(expanded)
            kernel_span.add(expanded)
    minimal = sum(1 for row in data.basis.data if kernel_span.add(_expand(ring, row)))
    chosen = [row for row in data.basis.data if radical_span.add(_expand(ring, row))]
    basis = Matrix(ring, len(chosen), data.basis.cols, tuple(chosen))
    return Quotient(basis=basis, kernel_rank=minimal)


def quotient(data: KernelData, t: HurwitzTuple, rep: Representation) -> Quotient:
    """Basis of M_z lifted to Ker Gamma_z."""
    ring = rep.ring
    if isinstance(ring, TruncatedPolyRing):
        return _local_quotient(data, degenerate_submodule(t, rep))
    structure = data.structure
    if structure is None:
        raise InvariantError("PRODUCT_NOT_IDENTITY", "M_z is only built for identity products")
    s = structure.kt_coordinates
    k = s.cols
    torsion: tuple[int, ...] = ()
    if isinstance(ring, IntegerRing):
        smith = smith_normal_form(s)
        r = smith.rank
        complement = smith.right_inverse.submatrix(rows=range(r, k))
        torsion = tuple(value for value in smith.diagonal if value > 1)
    else:
        pivots = set(echelon(s).pivots)
        zero, one = ring.zero(), ring.one()
        complement = Matrix(ring, k - len(pivots), k, tuple(
            tuple(one if c == free else zero for c in range(k)) for free in range(k) if free not in pivots
        ))
    t_rows = complement @ structure.kt_basis if complement.rows else Matrix.zeros(ring, 0, structure.kt_basis.cols)
    lifted = tuple(_lift(ring, structure, row, rep.dim) for row in t_rows.data)
    basis = Matrix(ring, len(lifted), data.basis.cols, lifted)
    if torsion:
        logger.info("Ker / D has torsion %s", torsion)
    return Quotient(basis=basis, kernel_rank=data.rank, torsion=torsion)


# --- pairing ----------------------------------------------------------------


def _psi_or_fail(rep: Representation, psi: Matrix | None) -> Matrix:
    psi = psi if psi is not None else rep.psi
    if psi is None:
        raise InvariantError("NO_PSI", f"Representation {rep.name} carries no psi; supply one")
    return psi


def q_pairing(
    x: tuple,
    y: tuple,
    t: HurwitzTuple,
    rep: Representation,
    psi: Matrix | None = None,
    ell: int = 1,
    check: bool = True,
) -> Any:
    """
    The double sum

        sum_{k=1}^{m-1} psi( x_k+l-1 - x_k+l
                             + sum_{j<k} (x_j+l-1 - x_j+l) e_j+l ... e_k+l-1,
                             y_k+l (1 - e_k+l^-1) )

    evaluated term by term, indices mod m. Returns a payload.
    """
    psi = _psi_or_fail(rep, psi)
    ring, d, m = rep.ring, rep.dim, t.m
    if not 1 <= ell <= m:
        raise InvariantError("INDEX", f"Offset {ell} outside 1..{m}", ell=ell)
    if check:
        product = product_check(t, rep)
        for name, vector in (("x", x), ("y", y)):
            if not in_kernel(vector, t, rep, product):
                raise InvariantError("NOT_IN_KERNEL", f"Vector {name} is not in Ker Gamma", vector=name)
    xs, ys = _blocks(x, d), _blocks(y, d)
    entries = rep.evaluate_tuple(t)
    identity = Matrix.identity(ring, d)

    def at(index: int) -> int:
        return (index - 1) % m

    total = ring.zero()
    for k in range(1, m):
        first = vec_sub(ring, xs[at(k + ell - 1)], xs[at(k + ell)])
        for j in range(1, k):
            chain = identity
            for i in range(j + ell, k + ell):
                chain = chain @ entries[at(i)]
            first = vec_add(ring, first, vec_mat(ring, vec_sub(ring, xs[at(j + ell - 1)], xs[at(j + ell)]), chain))
        second = vec_mat(ring, ys[at(k + ell)], identity - inverse(entries[at(k + ell)]))
        left = tuple(ring.involute(a) for a in first)
        total = ring.add(total, dot(ring, vec_mat(ring, left, psi), second))
    return total


def pairing_matrix(
    basis: Matrix,
    t: HurwitzTuple,
    rep: Representation,
    psi: Matrix | None = None,
    ell: int = 1,
    others: Matrix | None = None,
) -> Matrix:
    """
    Gram matrix W[a][b] = Q(basis_a, others_b) (others defaults to basis).

    Uses the recurrence A_k = (x_k+l-1 - x_k+l) + A_k-1 e_k+l-1 for the first
    slot, so each row costs O(m d^2).
    """
    psi = _psi_or_fail(rep, psi)
    ring, d, m = rep.ring, rep.dim, t.m
    others = basis if others is None else others
    entries = rep.evaluate_tuple(t)
    identity = Matrix.identity(ring, d)
    complements = [identity - inverse(e) for e in entries]

    def at(index: int) -> int:
        return (index - 1) % m

    def first_slots(x: tuple) -> tuple:
        xs = _blocks(x, d)
        out: list = []
        a = vec_sub(ring, xs[at(ell)], xs[at(ell + 1)])
        for k in range(1, m):
            if k > 1:
                a = vec_add(ring, vec_sub(ring, xs[at(k + ell - 1)], xs[at(k + ell)]), vec_mat(ring, a, entries[at(k + ell - 1)]))
            out.extend(vec_mat(ring, tuple(ring.involute(v) for v in a), psi))
        return tuple(out)

    def second_slots(y: tuple) -> tuple:
        ys = _blocks(y, d)
        out: list = []
        for k in range(1, m):
            out.extend(vec_mat(ring, ys[at(k + ell)], complements[at(k + ell)]))
        return tuple(out)

    width = (m - 1) * d
    left = Matrix(ring, basis.rows, width, tuple(first_slots(row) for row in basis.data))
    right = Matrix(ring, others.rows, width, tuple(second_slots(row) for row in others.data))
    return left @ right.transpose()


# --- results ----------------------------------------------------------------


@dataclass
class UnimodularityReport:
    """Torsion-freeness of each coker(1 - e_i) and the determinant of W."""

    diagonals: list[tuple[int, ...]]
    torsion_free: bool
    psi_unimodular: bool
    det_w: int | None
    det_unimodular: bool | None

    @property
    def certificate(self) -> str:
        if self.torsion_free and self.psi_unimodular:
            return "unimodular: every coker(1 - e) is torsion-free"
        if not self.psi_unimodular:
            return "no certificate: psi is not unimodular"
        return "no certificate: some coker(1 - e) has torsion"

    def to_dict(self) -> dict[str, Any]:
        return {
            "certificate": self.certificate,
            "torsion_free": self.torsion_free,
            "psi_unimodular": self.psi_unimodular,
            "smith_diagonals": [list(diagonal) for diagonal in self.diagonals],
            "det_w": self.det_w,
            "det_unimodular": self.det_unimodular,
        }


@dataclass
class InvariantResult:
    kernel_rank: int
    mz_rank: int
    w: Matrix
    form_class: FormClass
    determinant: str
    type_count: tuple[int, int]
    b1: int | None
    predicted_ranks: tuple[int, int] | None
    ell: int = 1
    label: str = ""
    torsion: tuple[int, ...] = ()
    ell_independent: bool | None = None
    certificate: UnimodularityReport | None = None
    experimental: bool = False

    @property
    def m(self) -> int:
        return sum(self.type_count)

    @property
    def predictions_hold(self) -> bool | None:
        if self.predicted_ranks is None:
            return None
        return self.predicted_ranks == (self.mz_rank, self.kernel_rank)

    def invariant_key(self) -> tuple:
        return (self.kernel_rank, self.mz_rank, self.form_class.invariant_key())

    def to_dict(self) -> dict[str, Any]:
        m_ns, m_sep = self.type_count
        return {
            "label": self.label,
            "class_string": self.form_class.class_string,
            "kernel_rank": self.kernel_rank,
            "mz_rank": self.mz_rank,
            "zeros": self.kernel_rank - self.mz_rank,
            "form": self.form_class.to_dict(),
            "determinant": self.determinant,
            "type": [m_ns, m_sep],
            "b1": self.b1,
            "predicted_ranks": list(self.predicted_ranks) if self.predicted_ranks else None,
            "predictions_hold": self.predictions_hold,
            "sigma_plus_m_minus_mns": (
                self.form_class.sigma + m_sep if self.form_class.sigma is not None else None
            ),
            "ell": self.ell,
            "ell_independent": self.ell_independent,
            "torsion": list(self.torsion),
            "certificate": self.certificate.to_dict() if self.certificate else None,
            "experimental": self.experimental,
            "w": self.w.to_strings(),
        }


def unimodularity_certificate(
    t: HurwitzTuple,
    rep: Representation,
    psi: Matrix | None = None,
    w: Matrix | None = None,
) -> UnimodularityReport:
    """Smith diagonals of every distinct (1 - e_i) over Z, plus the determinant of W."""
    if not isinstance(rep.ring, IntegerRing):
        raise InvariantError("UNSUPPORTED_RING", f"Unimodularity certificate needs Z, got {rep.ring.name}")
    psi = _psi_or_fail(rep, psi)
    identity = Matrix.identity(rep.ring, rep.dim)
    diagonals: list[tuple[int, ...]] = []
    seen: set = set()
    for matrix in rep.evaluate_tuple(t):
        if matrix.data in seen:
            continue
        seen.add(matrix.data)
        diagonals.append(smith_normal_form(identity - matrix).diagonal)
    torsion_free = all(value in (0, 1) for diagonal in diagonals for value in diagonal)
    det_w = determinant(w).payload if w is not None else None
    return UnimodularityReport(
        diagonals=diagonals,
        torsion_free=torsion_free,
        psi_unimodular=determinant(psi).payload in (1, -1),
        det_w=det_w,
        det_unimodular=det_w in (1, -1) if det_w is not None else None,
    )


def _predicted_ranks(t: HurwitzTuple, rep: Representation, m_ns: int, b1: int | None) -> tuple[int, int] | None:
    if rep.classes is None or b1 is None:
        return None
    g = rep.dim // 2
    return m_ns - 4 * g + 2 * b1, 2 * g * t.m - 2 * g + b1


def compute_invariant(
    t: HurwitzTuple,
    rep: Representation,
    psi: Matrix | None = None,
    ell: int = 1,
    ell_sweep: bool = False,
    certify: bool = True,
) -> InvariantResult:
    """Kernel, M_z, the form W on M_z and its classification."""
    psi = _psi_or_fail(rep, psi)
    data = kernel(t, rep)
    if not data.product.is_identity:
        raise InvariantError(
            "PRODUCT_NOT_IDENTITY",
            f"Evaluated product is not the identity ({data.product.describe()})",
            diagnosis=data.product.kind,
        )
    if not 1 <= ell <= t.m:
        raise InvariantError("INDEX", f"Offset {ell} outside 1..{t.m}", ell=ell)
    q = quotient(data, t, rep)
    w = pairing_matrix(q.basis, t, rep, psi, ell)
    ell_independent = None
    if ell_sweep:
        ell_independent = all(pairing_matrix(q.basis, t, rep, psi, other) == w for other in range(1, t.m + 1))
        logger.info("Offset sweep over %d values: %s", t.m, "identical" if ell_independent else "DIFFERENT")
    kernel_rank = q.kernel_rank
    form_class = classify_form(w, padding_zeros=kernel_rank - q.basis.rows)
    b1 = coinvariants_rank(t, rep) if not isinstance(rep.ring, TruncatedPolyRing) else None
    m_ns, m_sep = hurwitz.type_count(t, rep)
    certificate = None
    if certify and isinstance(rep.ring, IntegerRing):
        certificate = unimodularity_certificate(t, rep, psi, w)
    result = InvariantResult(
        kernel_rank=kernel_rank,
        mz_rank=q.basis.rows,
        w=w,
        form_class=form_class,
        determinant=str(determinant(w)),
        type_count=(m_ns, m_sep),
        b1=b1,
        predicted_ranks=_predicted_ranks(t, rep, m_ns, b1),
        ell=ell,
        label=t.label,
        torsion=q.torsion,
        ell_independent=ell_independent,
        certificate=certificate,
        experimental=rep.experimental,
    )
    logger.info("Invariant of %s (m=%d): %s", t.label or "tuple", t.m, form_class.class_string)
    return result


# --- base change ------------------------------------------------------------


def base_change_map(t: HurwitzTuple, rep: Representation, move: MoveSpec) -> Matrix:
    """
    The (m*d) x (m*d) matrix B with Ker Gamma_z @ B = Ker Gamma_z' for t' = move(t):

        conjugate w   x_i -> x_i e_w
        forward i     (x_i, x_i+1) -> (x_i+1, x_i+1 + (x_i - x_i+1) e_i+1)
        backward i    (x_i, x_i+1) -> (x_i + (x_i+1 - x_i) e_i^-1, x_i)
    """
    ring, d, m = rep.ring, rep.dim, t.m
    identity = Matrix.identity(ring, d)
    zero = Matrix.zeros(ring, d, d)
    blocks = [[identity if r == c else zero for c in range(m)] for r in range(m)]
    if move.kind == "conjugate":
        e_w = rep.evaluate_word(move.word)
        for j in range(m):
            blocks[j][j] = e_w
    elif move.kind in ("forward", "backward"):
        i = move.index
        if not 1 <= i < m:
            raise InvariantError("INDEX", f"Move index {i} outside 1..{m - 1}", index=i)
        a, b = i - 1, i
        entries = rep.evaluate_tuple(t)
        if move.kind == "forward":
            f = entries[b]
            # row = source block, column = target block
            blocks[a][a], blocks[a][b] = zero, f
            blocks[b][a], blocks[b][b] = identity, identity - f
        else:
            f_inv = inverse(entries[a])
            blocks[a][a], blocks[a][b] = identity - f_inv, identity
            blocks[b][a], blocks[b][b] = f_inv, zero
    else:
        raise InvariantError("INVALID_MOVE", f"Unknown move kind {move.kind!r}")
    rows = []
    for r in range(m):
        for s in range(d):
            rows.append(tuple(a for c in range(m) for a in blocks[r][c].data[s]))
    return Matrix(ring, m * d, m * d, tuple(rows))


# --- random vectors ---------------------------------------------------------


def random_kernel_vectors(data: KernelData, count: int, rng: random.Random, spread: int = 2) -> list[tuple]:
    """Random integer combinations of kernel generators."""
    ring = data.basis.ring
    vectors = []
    for _ in range(count):
        vector = (ring.zero(),) * data.basis.cols
        for row in data.basis.data:
            coefficient = rng.randint(-spread, spread)
            if coefficient:
                vector = vec_add(ring, vector, vec_scale(ring, ring.from_int(coefficient), row))
        vectors.append(vector)
    return vectors


def radical_vectors(t: HurwitzTuple, rep: Representation) -> list[tuple]:
    """Diagonal and componentwise-fixed generators; Q vanishes on both sides of them."""
    return list(degenerate_submodule(t, rep).data)


