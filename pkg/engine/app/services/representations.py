"""
Matrix representations of Dehn-twist alphabets.

Row vectors carry the action: a letter z acts by ``x -> x @ rho(z)`` and the
word ``z1 z2`` evaluates to ``rho(z1) @ rho(z2)``. A representation also
carries the invariant function psi, read as ``psi(x, y) = conj(x) @ psi @ y^T``;
invariance under a generator e is the matrix identity ``conj(e) psi e^T == psi``.
"""

import json
import logging
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, Field, ValidationError

from app.services import hurwitz
from app.services.errors import RepresentationError
from app.services.hurwitz import HurwitzTuple, TwistWord, Word, invert_word, parse_word
from app.services.linalg import (
    Matrix,
    determinant,
    inverse,
    kernel_generators,
    rank,
    vstack,
)
from app.services.rings import (
    ZETA16,
    IntegerRing,
    PrimeField,
    RationalField,
    RingDescriptor,
    TruncatedPolyRing,
    base_change_payload,
    parse_ring,
)

logger = logging.getLogger(__name__)

DEFAULT_BLOCK_SIZE = 64

Symmetry = Literal["symmetric", "skew", "hermitian", "skew-hermitian"]


# --- curve classes ----------------------------------------------------------


def omega(u: tuple[int, ...], v: tuple[int, ...]) -> int:
    """Symplectic pairing in the basis a1, b1, ..., ag, bg with omega(a_i, b_i) = 1."""
    return sum(u[i] * v[i + 1] - u[i + 1] * v[i] for i in range(0, len(u), 2))


def _basis_vector(g: int, index: int, sign: int = 1) -> list[int]:
    vector = [0] * (2 * g)
    vector[index] = sign
    return vector


@dataclass(frozen=True)
class CurveTable:
    """Homology classes of the chain curves c1..c_2g+1 and of d."""

    genus: int
    classes: dict[str, tuple[int, ...]]
    separating: dict[str, bool]

    @classmethod
    def chain(cls, g: int) -> "CurveTable":
        if g < 1:
            raise RepresentationError("GENUS", f"Genus must be positive, got {g}", genus=g)

        def a(i: int) -> list[int]:
            return _basis_vector(g, 2 * (i - 1))

        def b(i: int) -> list[int]:
            return _basis_vector(g, 2 * (i - 1) + 1)

        classes: dict[str, tuple[int, ...]] = {"c1": tuple(b(1))}
        for i in range(1, g + 1):
            classes[f"c{2 * i}"] = tuple(a(i))
        for i in range(1, g):
            classes[f"c{2 * i + 1}"] = tuple(x - y for x, y in zip(b(i + 1), b(i)))
        classes[f"c{2 * g + 1}"] = tuple(-x for x in b(g))
        if g >= 2:
            classes["d"] = tuple(b(2))
        separating = {letter: not any(v) for letter, v in classes.items()}
        return cls(g, classes, separating)

    def chain_letters(self) -> list[str]:
        return [f"c{i}" for i in range(1, 2 * self.genus + 2)]

    def pairing(self, left: str, right: str) -> int:
        return omega(self.classes[left], self.classes[right])


def omega_matrix(g: int, ring: RingDescriptor) -> Matrix:
    rows = [[0] * (2 * g) for _ in range(2 * g)]
    for i in range(0, 2 * g, 2):
        rows[i][i + 1] = 1
        rows[i + 1][i] = -1
    return Matrix.from_rows(ring, rows)


def transvection(v: tuple[int, ...], ring: RingDescriptor, power: int = 1) -> Matrix:
    """Matrix of x -> x + power * omega(x, v) v acting on row vectors."""
    n = len(v)
    # omega(x, v) = sum_r x_r * w_r with w = J v^T
    w = [0] * n
    for i in range(0, n, 2):
        w[i] = v[i + 1]
        w[i + 1] = -v[i]
    rows = [[(1 if r == c else 0) + power * w[r] * v[c] for c in range(n)] for r in range(n)]
    return Matrix.from_rows(ring, rows)


# --- representations --------------------------------------------------------


@dataclass(frozen=True)
class ProductCheck:
    """Diagnosis of an evaluated product e_z1 ... e_zm."""

    kind: Literal["identity", "scalar", "non-scalar"]
    product: Matrix
    scalar: Any = None

    @property
    def is_identity(self) -> bool:
        return self.kind == "identity"

    def describe(self) -> str:
        if self.kind == "scalar":
            return f"product is {self.product.ring.format(self.scalar)} * id"
        return f"product is {self.kind}"


@dataclass(eq=False)
class Representation:
    """
    Generator matrices over one ring, plus psi and per-letter metadata.

    Word evaluation caches products of fixed-size blocks of letters, so long
    conjugators produced by random walks share work across entries.
    """

    ring: RingDescriptor
    dim: int
    matrices: dict[str, Matrix]
    separating: dict[str, bool]
    psi: Matrix | None = None
    psi_symmetry: Symmetry | None = None
    classes: dict[str, tuple[int, ...]] | None = None
    name: str = "custom"
    note: str = ""
    experimental: bool = False
    block_size: int = DEFAULT_BLOCK_SIZE
    _inverses: dict[str, Matrix] = field(default_factory=dict, init=False, repr=False)
    _blocks: dict[Word, Matrix] = field(default_factory=dict, init=False, repr=False)
    _entries: dict[TwistWord, Matrix] = field(default_factory=dict, init=False, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False)

    @property
    def letters(self) -> list[str]:
        return sorted(self.matrices)

    def generator(self, letter: str, sign: int = 1) -> Matrix:
        if letter not in self.matrices:
            raise RepresentationError("UNKNOWN_LETTER", f"Letter {letter!r} not in {self.name}", letter=letter)
        if sign > 0:
            return self.matrices[letter]
        with self._lock:
            cached = self._inverses.get(letter)
        if cached is None:
            cached = inverse(self.matrices[letter])
            with self._lock:
                self._inverses[letter] = cached
        return cached

    def _evaluate_block(self, block: Word) -> Matrix:
        with self._lock:
            cached = self._blocks.get(block)
        if cached is not None:
            return cached
        result = Matrix.identity(self.ring, self.dim)
        for letter, sign in block:
            result = result @ self.generator(letter, sign)
        with self._lock:
            self._blocks[block] = result
        return result

    def evaluate_word(self, word: Word) -> Matrix:
        result = Matrix.identity(self.ring, self.dim)
        size = self.block_size
        for start in range(0, len(word), size):
            result = result @ self._evaluate_block(word[start:start + size])
        return result

    def evaluate(self, entry: TwistWord) -> Matrix:
        """conjugator^-1 * rho(base) * conjugator."""
        with self._lock:
            cached = self._entries.get(entry)
        if cached is not None:
            return cached
        base = self.generator(entry.base)
        if entry.conjugator:
            left = self.evaluate_word(invert_word(entry.conjugator))
            right = self.evaluate_word(entry.conjugator)
            result = left @ base @ right
        else:
            result = base
        with self._lock:
            self._entries[entry] = result
        return result

    def evaluate_tuple(self, t: HurwitzTuple) -> list[Matrix]:
        return [self.evaluate(entry) for entry in t.entries]

    def product(self, t: HurwitzTuple) -> Matrix:
        result = Matrix.identity(self.ring, self.dim)
        for matrix in self.evaluate_tuple(t):
            result = result @ matrix
        return result

    def check_invariance(self, psi: Matrix | None = None) -> list[str]:
        """Letters whose matrix does not preserve psi."""
        psi = psi if psi is not None else self.psi
        if psi is None:
            return []
        return [
            letter for letter in self.letters
            if self.matrices[letter].involute() @ psi @ self.matrices[letter].transpose() != psi
        ]

    def with_psi(self, psi: Matrix, symmetry: Symmetry | None = None) -> "Representation":
        """A copy carrying a different psi, validated for invariance."""
        rep = Representation(
            ring=self.ring,
            dim=self.dim,
            matrices=self.matrices,
            separating=self.separating,
            psi=psi,
            psi_symmetry=symmetry or form_symmetry(psi),
            classes=self.classes,
            name=self.name,
            note=self.note,
            experimental=self.experimental,
            block_size=self.block_size,
        )
        _require_invariant(rep)
        return rep

    def to_document(self) -> dict[str, Any]:
        return {
            "ring": self.ring.name,
            "dim": self.dim,
            "generators": {
                letter: {"matrix": self.matrices[letter].to_strings(), "separating": self.separating[letter]}
                for letter in self.letters
            },
            "psi": self.psi.to_strings() if self.psi is not None else None,
            "psi_symmetry": self.psi_symmetry,
        }


def form_symmetry(psi: Matrix) -> Symmetry | None:
    if psi.is_symmetric():
        return "symmetric"
    if psi.is_skew():
        return "skew"
    if psi.ring.has_involution and psi.is_hermitian():
        return "hermitian"
    if psi.ring.has_involution and psi.is_skew_hermitian():
        return "skew-hermitian"
    return None


def has_symmetry(psi: Matrix, symmetry: Symmetry) -> bool:
    checks = {
        "symmetric": psi.is_symmetric,
        "skew": psi.is_skew,
        "hermitian": psi.is_hermitian,
        "skew-hermitian": psi.is_skew_hermitian,
    }
    return checks[symmetry]()


def _require_invariant(rep: Representation) -> None:
    offending = rep.check_invariance()
    if offending:
        raise RepresentationError(
            "PSI_NOT_INVARIANT",
            f"psi is not invariant under generator {offending[0]}",
            generator=offending[0],
        )


def product_check(t: HurwitzTuple, rep: Representation) -> ProductCheck:
    """Whether the evaluated product is the identity, a scalar, or neither."""
    product = rep.product(t)
    if product.is_identity():
        return ProductCheck("identity", product, rep.ring.one())
    ring = rep.ring
    c = product.data[0][0]
    if product == Matrix.identity(ring, rep.dim).map(lambda a: ring.mul(a, c), ring):
        return ProductCheck("scalar", product, c)
    return ProductCheck("non-scalar", product)


def symplectic_rep(g: int, ring: RingDescriptor, block_size: int = DEFAULT_BLOCK_SIZE) -> Representation:
    """Transvections along the chain curve classes, with psi = omega."""
    if not isinstance(ring, (IntegerRing, RationalField, PrimeField)):
        raise RepresentationError("UNSUPPORTED_RING", f"Symplectic representation needs Z, Q or Zmod:P, got {ring.name}")
    table = CurveTable.chain(g)
    matrices = {letter: transvection(v, ring) for letter, v in table.classes.items()}
    rep = Representation(
        ring=ring,
        dim=2 * g,
        matrices=matrices,
        separating=dict(table.separating),
        psi=omega_matrix(g, ring),
        psi_symmetry="skew",
        classes=dict(table.classes),
        name=f"symplectic-g{g}",
        block_size=block_size,
    )
    logger.debug("Built symplectic representation g=%d over %s", g, ring.name)
    return rep


# --- built-in words ---------------------------------------------------------


BUILTIN_NAMES = ("xi1", "xi2", "xi3")


def builtin_word(g: int, name: str) -> Word:
    chain = [(f"c{i}", 1) for i in range(1, 2 * g + 1)]
    last = (f"c{2 * g + 1}", 1)
    if name == "xi1":
        half = chain + [last, last] + chain[::-1]
        return tuple(half * 2)
    if name == "xi2":
        return tuple((chain + [last]) * (2 * g + 2))
    if name == "xi3":
        return tuple(chain * (4 * g + 2))
    raise RepresentationError("UNKNOWN_BUILTIN", f"Unknown built-in tuple {name!r}", name=name)


def builtin_tuple(g: int, name: str) -> HurwitzTuple:
    """The expanded chain-relation tuples xi1, xi2, xi3 of genus g >= 2."""
    if g < 2:
        raise RepresentationError("GENUS", f"Built-in tuples need genus >= 2, got {g}", genus=g)
    return hurwitz.tuple_from_word(builtin_word(g, name), genus=g, label=name)


def parse_tuple_expression(expression: str, g: int) -> HurwitzTuple:
    """
    Built-in tuples glued by fiber sums, e.g. ``xi1 #id xi1``, ``xi2 #d xi1``
    or ``xi2 #c1^3*c3 xi1``; gluing words join letters with ``*``.
    """
    tokens = expression.split()
    if not tokens or tokens[0].startswith("#"):
        raise RepresentationError("PARSE", f"Tuple expression must start with a tuple: {expression!r}")
    result = builtin_tuple(g, tokens[0])
    position = 1
    while position < len(tokens):
        glue = tokens[position]
        if not glue.startswith("#") or position + 1 >= len(tokens):
            raise RepresentationError("PARSE", f"Expected '#h tuple' in {expression!r}", token=glue)
        h = parse_word(glue[1:].replace("*", " "))
        result = hurwitz.fiber_sum(result, builtin_tuple(g, tokens[position + 1]), h)
        position += 2
    return result


# --- genus-1 quantum representation -----------------------------------------


QUANTUM_NOTE = (
    "Projective representation: relations hold up to central scalars, so "
    "products of tuples may evaluate to a scalar instead of the identity."
)


def quantum_su2_level2_g1() -> Representation:
    """The genus-1 SU(2) level-2 matrices over Z[zeta_16]; psi is not supplied."""
    ring = ZETA16
    z = ring.zeta_power
    one = ring.one()
    # u = (zeta + zeta^8) / (1 + zeta), s = 1 + zeta + ... + zeta^6
    u = ring.divide(ring.add(z(1), z(8)), ring.add(one, z(1)))
    s = ring.zero()
    for k in range(7):
        s = ring.add(s, z(k))
    zero = ring.zero()
    a = Matrix.from_payloads(
        ring,
        [[one, zero, u], [zero, ring.neg(z(3)), zero], [zero, zero, ring.neg(one)]],
        3,
    )
    b = Matrix.from_payloads(
        ring,
        [
            [zero, z(2), zero],
            [ring.neg(z(6)), zero, zero],
            [ring.mul(z(4), s), ring.mul(z(3), s), ring.neg(z(3))],
        ],
        3,
    )
    return Representation(
        ring=ring,
        dim=3,
        matrices={"c1": a, "c2": b},
        separating={"c1": False, "c2": False},
        name="quantum-su2-level2-g1",
        note=QUANTUM_NOTE,
        experimental=True,
    )


def reduce_representation(rep: Representation, prime: int = 2) -> Representation:
    """Base change zeta -> 1 + y into F_2[y]/(y^2); psi invariance is re-checked."""
    if rep.ring != ZETA16:
        raise RepresentationError("UNSUPPORTED_RING", f"Reduction needs Zzeta16, got {rep.ring.name}")
    if prime != 2:
        raise RepresentationError("UNSUPPORTED_RING", "zeta_16 -> 1 + y is defined only for p = 2", prime=prime)
    target = TruncatedPolyRing(prime)

    def reduce(matrix: Matrix) -> Matrix:
        return matrix.map(lambda payload: base_change_payload(payload, target), target)

    reduced = Representation(
        ring=target,
        dim=rep.dim,
        matrices={letter: reduce(matrix) for letter, matrix in rep.matrices.items()},
        separating=dict(rep.separating),
        psi=reduce(rep.psi) if rep.psi is not None else None,
        psi_symmetry=rep.psi_symmetry,
        name=f"{rep.name}-reduced",
        note=rep.note,
        experimental=rep.experimental,
        block_size=rep.block_size,
    )
    _require_invariant(reduced)
    return reduced


# --- representation files ---------------------------------------------------


class GeneratorDocument(BaseModel):
    matrix: list[list[str | int]]
    separating: bool


class RepresentationDocument(BaseModel):
    ring: str
    dim: int = Field(..., ge=1)
    generators: dict[str, GeneratorDocument] = Field(..., min_length=1)
    psi: list[list[str | int]] | None = None
    psi_symmetry: Symmetry | None = None
    name: str = "custom"
    note: str = ""


def representation_from_document(document: dict[str, Any], name: str | None = None) -> Representation:
    """Validate a representation document: shapes, invertibility, psi invariance and symmetry label."""
    try:
        parsed = RepresentationDocument.model_validate(document)
    except ValidationError as e:
        raise RepresentationError("SCHEMA", f"Invalid representation document: {e.error_count()} error(s)", detail=str(e))
    ring = parse_ring(parsed.ring)
    d = parsed.dim

    def square(entries: list[list[str | int]], what: str) -> Matrix:
        if len(entries) != d or any(len(row) != d for row in entries):
            raise RepresentationError("SCHEMA", f"{what} is not {d}x{d}", matrix=what)
        return Matrix.from_rows(ring, entries)

    matrices = {}
    for letter, generator in parsed.generators.items():
        matrix = square(generator.matrix, f"generator {letter}")
        if not determinant(matrix).is_unit():
            raise RepresentationError("NOT_INVERTIBLE", f"Generator {letter} is not invertible over {ring.name}",
                                      generator=letter)
        matrices[letter] = matrix
    psi = square(parsed.psi, "psi") if parsed.psi is not None else None
    if psi is not None and parsed.psi_symmetry is not None:
        if not has_symmetry(psi, parsed.psi_symmetry):
            raise RepresentationError("PSI_SYMMETRY", f"psi is labeled {parsed.psi_symmetry} but is {form_symmetry(psi)}",
                                      label=parsed.psi_symmetry)
    rep = Representation(
        ring=ring,
        dim=d,
        matrices=matrices,
        separating={letter: generator.separating for letter, generator in parsed.generators.items()},
        psi=psi,
        psi_symmetry=parsed.psi_symmetry or (form_symmetry(psi) if psi is not None else None),
        name=name or parsed.name,
        note=parsed.note,
        experimental=isinstance(ring, TruncatedPolyRing),
    )
    _require_invariant(rep)
    return rep


def load_representation(path: str | Path) -> Representation:
    try:
        document = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise RepresentationError("SCHEMA", f"Cannot read representation file {path}: {e}", path=str(path))
    rep = representation_from_document(document, name=document.get("name") or Path(path).stem)
    logger.info("Loaded %s representation %s of dimension %d", rep.ring.name, rep.name, rep.dim)
    return rep


DATA_DIR = Path(__file__).resolve().parent.parent / "data" / "representations"


def packaged_representation(name: str) -> Representation:
    """Load one of the representation files shipped in app/data/representations."""
    path = DATA_DIR / f"{name}.json"
    if not path.exists():
        available = sorted(p.stem for p in DATA_DIR.glob("*.json"))
        raise RepresentationError("UNKNOWN_REPRESENTATION", f"No packaged representation {name!r}",
                                  available=available)
    return load_representation(path)


# --- derived quantities -----------------------------------------------------


def coinvariants_rank(t: HurwitzTuple, rep: Representation) -> int:
    """Rank of M / span{x (1 - e_z)}: the first Betti number of the total space."""
    if not (isinstance(rep.ring, IntegerRing) or rep.ring.is_field):
        raise RepresentationError("UNSUPPORTED_RING", f"Coinvariants need Z or a field, got {rep.ring.name}")
    identity = Matrix.identity(rep.ring, rep.dim)
    blocks = []
    seen = set()
    for matrix in rep.evaluate_tuple(t):
        if matrix.data in seen:
            continue
        seen.add(matrix.data)
        blocks.append(identity - matrix)
    return rep.dim - rank(vstack(blocks))


def invariant_forms(rep: Representation, symmetry: Literal["symmetric", "skew"] | None = None) -> list[Matrix]:
    """
    Generators of all psi with conj(e) psi e^T = psi for every generator e.

    Unknown psi entries are flattened row by row; each generator contributes
    d*d linear conditions, and a symmetry restriction adds psi[s][t] -/+ psi[t][s].
    """
    ring = rep.ring
    d = rep.dim
    columns: list[list[Any]] = []
    for letter in rep.letters:
        e = rep.matrices[letter]
        e_bar = e.involute()
        for r in range(d):
            for c in range(d):
                column = []
                for s in range(d):
                    for t in range(d):
                        value = ring.mul(e_bar.data[r][s], e.data[c][t])
                        if r == s and c == t:
                            value = ring.sub(value, ring.one())
                        column.append(value)
                columns.append(column)
    if symmetry is not None:
        sign = ring.one() if symmetry == "symmetric" else ring.neg(ring.one())
        for s in range(d):
            for t in range(s, d):
                if s == t and symmetry == "symmetric":
                    continue
                column = [ring.zero()] * (d * d)
                column[s * d + t] = ring.add(column[s * d + t], ring.one())
                column[t * d + s] = ring.sub(column[t * d + s], sign)
                columns.append(column)
    system = Matrix.from_payloads(ring, [list(row) for row in zip(*columns)], len(columns))
    generators, _ = kernel_generators(system)
    forms = [Matrix.from_payloads(ring, [row[i * d:(i + 1) * d] for i in range(d)], d) for row in generators.data]
    logger.debug("Found %d invariant form generator(s) for %s", len(forms), rep.name)
    return [form for form in forms if not form.is_zero()]
