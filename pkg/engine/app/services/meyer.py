"""
Meyer's signature cocycle and fibration signatures.

For symplectic A, B (row-vector convention, A J A^T = J) the form lives on

    V_{A,B} = {(x, y) : x (A^-1 - 1) + y (B - 1) = 0}  inside Q^2g + Q^2g,
    <(x1, y1), (x2, y2)> = omega(x1 + y1, y2 (1 - B)),

and c(A, B) is its signature. The signature of a fibration with monodromy
e_1 ... e_m is sum_{i>=2} c(e_1 ... e_i-1, e_i) + m - m_ns.
"""

import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Any

from app.services import hurwitz
from app.services.errors import MeyerError
from app.services.hurwitz import HurwitzTuple, TwistWord
from app.services.invariant import InvariantResult, compute_invariant, kernel, pairing_matrix
from app.services.linalg import (
    Matrix,
    inverse,
    kernel_basis,
    signature,
    to_rational,
    vec_mat,
    vstack,
)
from app.services.representations import Representation, omega_matrix, transvection
from app.services.rings import QQ_FIELD, ZZ, IntegerRing

logger = logging.getLogger(__name__)


def is_symplectic(a: Matrix) -> bool:
    g = a.rows // 2
    j = omega_matrix(g, a.ring)
    return a.rows == a.cols and a.rows % 2 == 0 and a @ j @ a.transpose() == j


def _require_symplectic(*matrices: Matrix) -> None:
    for position, a in enumerate(matrices, start=1):
        if not isinstance(a.ring, IntegerRing):
            raise MeyerError("UNSUPPORTED_RING", f"Meyer cocycle needs integer matrices, got {a.ring.name}")
        if not is_symplectic(a):
            raise MeyerError("NON_SYMPLECTIC", f"Argument {position} does not preserve omega", argument=position)


@dataclass(frozen=True)
class MeyerFormData:
    a: Matrix
    b: Matrix
    v_basis: Matrix
    form: Matrix

    @property
    def dimension(self) -> int:
        return self.v_basis.rows


def _meyer_gram(rows_left: Matrix, rows_right: Matrix, b: Matrix) -> Matrix:
    """Gram matrix of <u, v> = omega(x_u + y_u, y_v (1 - B)) over Q."""
    n = b.rows
    g = n // 2
    j = omega_matrix(g, QQ_FIELD)
    shift = Matrix.identity(QQ_FIELD, n) - b

    def split(rows: Matrix) -> tuple[Matrix, Matrix]:
        return rows.submatrix(cols=range(n)), rows.submatrix(cols=range(n, 2 * n))

    x1, y1 = split(rows_left)
    _, y2 = split(rows_right)
    return (x1 + y1) @ j @ (y2 @ shift).transpose()


def meyer_form(a: Matrix, b: Matrix) -> MeyerFormData:
    """Basis of V_{A,B} and the Gram matrix of the Meyer form on it."""
    _require_symplectic(a, b)
    qa, qb = to_rational(a), to_rational(b)
    n = a.rows
    identity = Matrix.identity(QQ_FIELD, n)
    condition = vstack([inverse(qa) - identity, qb - identity])
    basis = kernel_basis(condition)
    if basis.rows == 0:
        basis = Matrix(QQ_FIELD, 0, 2 * n, ())
    form = _meyer_gram(basis, basis, qb)
    if not form.is_symmetric():
        raise MeyerError("NOT_SYMMETRIC", "Meyer form came out non-symmetric")
    return MeyerFormData(a, b, basis, form)


def meyer_cocycle(a: Matrix, b: Matrix) -> int:
    """c(A, B): the signature p - n of the Meyer form on V_{A,B}."""
    data = meyer_form(a, b)
    if data.dimension == 0:
        return 0
    positive, negative, _ = signature(data.form)
    return positive - negative


@dataclass
class SignatureReport:
    sigma_meyer: int
    sigma_form: int | None
    per_term: list[int] = field(default_factory=list)
    m: int = 0
    m_ns: int = 0

    @property
    def agree(self) -> bool:
        return self.sigma_form is not None and self.sigma_meyer == self.sigma_form

    def to_dict(self) -> dict[str, Any]:
        return {
            "sigma_meyer": self.sigma_meyer,
            "sigma_form": self.sigma_form,
            "agree": self.agree,
            "per_term": self.per_term,
            "type": [self.m_ns, self.m - self.m_ns],
        }


def fibration_signature(
    t: HurwitzTuple,
    rep: Representation,
    result: InvariantResult | None = None,
) -> SignatureReport:
    """Signature of the total space by the Meyer sum and by the form on M_z."""
    if not isinstance(rep.ring, IntegerRing) or rep.classes is None:
        raise MeyerError("UNSUPPORTED_REPRESENTATION", "Fibration signatures need the integer symplectic representation")
    entries = rep.evaluate_tuple(t)
    partial = entries[0]
    per_term = []
    for entry in entries[1:]:
        per_term.append(meyer_cocycle(partial, entry))
        partial = partial @ entry
    if not partial.is_identity():
        raise MeyerError("PRODUCT_NOT_IDENTITY", "Monodromy product is not the identity")
    m_ns, m_sep = hurwitz.type_count(t, rep)
    sigma_meyer = sum(per_term) + m_sep
    result = result or compute_invariant(t, rep, certify=False)
    sigma_w = result.form_class.sigma
    sigma_form = sigma_w + m_sep if sigma_w is not None else None
    logger.info("Signature of %s: Meyer %d, form %s", t.label or "tuple", sigma_meyer, sigma_form)
    return SignatureReport(sigma_meyer, sigma_form, per_term, t.m, m_ns)


# --- three-entry tuples -----------------------------------------------------


def _matrix_tuple(matrices: list[Matrix]) -> tuple[HurwitzTuple, Representation]:
    """A custom alphabet whose letters evaluate to the given matrices, with psi = omega."""
    letters = [f"m{i}" for i in range(1, len(matrices) + 1)]
    g = matrices[0].rows // 2
    rep = Representation(
        ring=matrices[0].ring,
        dim=2 * g,
        matrices=dict(zip(letters, matrices)),
        separating={letter: False for letter in letters},
        psi=omega_matrix(g, matrices[0].ring),
        psi_symmetry="skew",
        name="matrix-tuple",
    )
    t = HurwitzTuple(tuple(TwistWord(letter) for letter in letters), genus_hint=g, alphabet="custom")
    return t, rep


@dataclass
class ThreeTupleComparison:
    kernel_rank: int
    v_dimension: int
    image_rank: int
    forms_match: bool
    conditions_hold: bool
    module_rank: int

    @property
    def isomorphic(self) -> bool:
        """Onto V_{A,B}, form-preserving, with kernel of rank dim M (the diagonal)."""
        return (
            self.conditions_hold
            and self.forms_match
            and self.image_rank == self.v_dimension
            and self.kernel_rank == self.v_dimension + self.module_rank
        )


def compare_three_tuple(a: Matrix, b: Matrix) -> ThreeTupleComparison:
    """
    Map Ker Gamma of (A, B, (AB)^-1) to V_{A,B} by
    (p, q, r) -> (x + y B^-1, -y B^-1) with x = p - q, y = q - r,
    and compare Q_omega with the Meyer form.
    """
    _require_symplectic(a, b)
    n = a.rows
    c = inverse(a @ b)
    t, rep = _matrix_tuple([a, b, c])
    data = kernel(t, rep)
    q = pairing_matrix(data.basis, t, rep)
    b_inverse = to_rational(inverse(b))
    qa, qb = to_rational(a), to_rational(b)
    images = []
    for row in data.basis.data:
        p, q_part, r = row[:n], row[n:2 * n], row[2 * n:]
        x = tuple(Fraction(u - v) for u, v in zip(p, q_part))
        y = tuple(Fraction(u - v) for u, v in zip(q_part, r))
        y_shift = vec_mat(QQ_FIELD, y, b_inverse)
        images.append(tuple(u + v for u, v in zip(x, y_shift)) + tuple(-v for v in y_shift))
    mapped = Matrix(QQ_FIELD, len(images), 2 * n, tuple(images))
    identity = Matrix.identity(QQ_FIELD, n)
    condition = vstack([inverse(qa) - identity, qb - identity])
    conditions_hold = (mapped @ condition).is_zero()
    gram = _meyer_gram(mapped, mapped, qb)
    forms_match = gram == to_rational(q)
    v_dimension = meyer_form(a, b).dimension
    image_rank = mapped.rows - kernel_basis(mapped).rows
    return ThreeTupleComparison(
        kernel_rank=data.rank,
        v_dimension=v_dimension,
        image_rank=image_rank,
        forms_match=forms_match,
        conditions_hold=conditions_hold,
        module_rank=n,
    )


def prop_b1_check(a: Matrix, b: Matrix) -> bool:
    """Whether (Ker Gamma, Q_omega) of (A, B, (AB)^-1) is V_{A,B} plus a radical copy of M."""
    comparison = compare_three_tuple(a, b)
    if not comparison.isomorphic:
        logger.warning("Three-tuple comparison failed: %s", comparison)
    return comparison.isomorphic


def three_tuple_signature(a: Matrix, b: Matrix) -> int:
    """Signature of Q_omega on the full kernel of (A, B, (AB)^-1)."""
    t, rep = _matrix_tuple([a, b, inverse(a @ b)])
    q = pairing_matrix(kernel(t, rep).basis, t, rep)
    positive, negative, _ = signature(q)
    return positive - negative


# --- random inputs ----------------------------------------------------------


def random_primitive_vector(n: int, rng: random.Random, spread: int = 2) -> tuple[int, ...]:
    while True:
        vector = tuple(rng.randint(-spread, spread) for _ in range(n))
        divisor = 0
        for value in vector:
            divisor = gcd(divisor, value)
        if divisor == 1:
            return vector


def random_symplectic(g: int, rng: random.Random, max_length: int = 12) -> Matrix:
    """Product of up to max_length transvections (of either sign) along random primitive vectors."""
    result = Matrix.identity(ZZ, 2 * g)
    for _ in range(rng.randint(1, max_length)):
        vector = random_primitive_vector(2 * g, rng)
        result = result @ transvection(vector, ZZ, power=rng.choice((1, -1)))
    return result
