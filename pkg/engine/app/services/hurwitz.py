"""
Symbolic Hurwitz tuples.

A tuple entry is a positive generator letter conjugated by a word,
``w^-1 * base * w``. Words are tuples of ``(letter, ±1)`` pairs and are only
reduced by free cancellation; no group relations are applied. Matrices are
evaluated on demand by a Representation.

Moves (1-based index i):

    forward   (z_i, z_i+1) -> (z_i+1, z_i+1^-1 z_i z_i+1)
    backward  (z_i, z_i+1) -> (z_i z_i+1 z_i^-1, z_i)
    conjugate every z -> w^-1 z w
"""

import json
import logging
import random
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterator, Literal

from pydantic import BaseModel, Field, ValidationError

from app.services.errors import TupleError

logger = logging.getLogger(__name__)

Letter = tuple[str, int]
Word = tuple[Letter, ...]

_LETTER_PATTERN = re.compile(r"^([A-Za-z][A-Za-z0-9_]*)(?:\^\{?(-?\d+)\}?)?$")
_REPEAT_PATTERN = re.compile(r"^\|\s*\^\s*(\d+)$")


# --- words ------------------------------------------------------------------


def reduce_word(word: Word) -> Word:
    """Free cancellation of adjacent x x^-1 pairs."""
    stack: list[Letter] = []
    for letter in word:
        if stack and stack[-1][0] == letter[0] and stack[-1][1] == -letter[1]:
            stack.pop()
        else:
            stack.append(letter)
    return tuple(stack)


def invert_word(word: Word) -> Word:
    return tuple((name, -sign) for name, sign in reversed(word))


def parse_token(token: str) -> Word:
    """'c5^2' -> c5 c5, 'c3^-1' -> c3^-1; exponent 0 gives the empty word."""
    match = _LETTER_PATTERN.match(token)
    if not match:
        raise TupleError("PARSE", f"Malformed word token {token!r}", token=token)
    name, exponent = match.group(1), int(match.group(2) or 1)
    sign = 1 if exponent > 0 else -1
    return ((name, sign),) * abs(exponent)


def parse_word(text: str) -> Word:
    """
    Parse a word in the compact syntax.

    Tokens are separated by whitespace; ``id`` or an empty string is the
    empty word. A trailing ``| ^n`` repeats everything before it n times,
    e.g. ``"c1 c2 | ^6"``.
    """
    body, bar, tail = text.partition("|")
    repeat = 1
    if bar:
        match = _REPEAT_PATTERN.match(("|" + tail).strip())
        if not match:
            raise TupleError("PARSE", f"Malformed repetition suffix in {text!r}", word=text)
        repeat = int(match.group(1))
    letters: list[Letter] = []
    for token in body.split():
        if token in ("id", "1"):
            continue
        letters.extend(parse_token(token))
    return tuple(letters) * repeat


def format_word(word: Word) -> list[str]:
    """Letters as strings in the tuple-file notation, e.g. ['c2', 'c3^-1']."""
    return [name if sign > 0 else f"{name}^-1" for name, sign in word]


def word_string(word: Word) -> str:
    return " ".join(format_word(word)) or "id"


# --- tuples -----------------------------------------------------------------


@dataclass(frozen=True)
class TwistWord:
    """base conjugated by conjugator: conjugator^-1 * base * conjugator."""

    base: str
    conjugator: Word = ()

    def as_word(self) -> Word:
        return reduce_word(invert_word(self.conjugator) + ((self.base, 1),) + self.conjugator)

    def conjugated(self, word: Word) -> "TwistWord":
        return TwistWord(self.base, reduce_word(self.conjugator + word))

    def __str__(self) -> str:
        if not self.conjugator:
            return self.base
        return f"{self.base}^[{word_string(self.conjugator)}]"


@dataclass(frozen=True)
class HurwitzTuple:
    """
    Ordered entries whose evaluated product should be the identity.

    ``verified`` records whether the product was checked against some
    representation; moves keep the flag since they preserve the product.
    """

    entries: tuple[TwistWord, ...]
    genus_hint: int | None = None
    alphabet: str = "builtin-chain"
    verified: bool = False
    label: str = ""

    def __post_init__(self):
        if not self.entries:
            raise TupleError("EMPTY", "A Hurwitz tuple needs at least one entry")

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def m(self) -> int:
        return len(self.entries)

    def letters(self) -> list[str]:
        """Every generator letter that occurs, sorted."""
        names = set()
        for entry in self.entries:
            names.add(entry.base)
            names.update(name for name, _ in entry.conjugator)
        return sorted(names)

    def with_entries(self, entries: tuple[TwistWord, ...]) -> "HurwitzTuple":
        return replace(self, entries=entries)

    def max_conjugator_length(self) -> int:
        return max(len(entry.conjugator) for entry in self.entries)

    def to_json(self) -> dict[str, Any]:
        return {
            "genus": self.genus_hint,
            "alphabet": self.alphabet,
            "entries": [
                {"base": entry.base, "conj": format_word(entry.conjugator)}
                for entry in self.entries
            ],
        }


def tuple_from_word(word: Word, genus: int | None = None, label: str = "") -> HurwitzTuple:
    """One unconjugated entry per letter of a positive word."""
    if any(sign < 0 for _, sign in word):
        raise TupleError("NEGATIVE_LETTER", "Tuple words may only contain positive letters")
    if not word:
        raise TupleError("EMPTY", "A Hurwitz tuple needs at least one entry")
    return HurwitzTuple(tuple(TwistWord(name) for name, _ in word), genus_hint=genus, label=label)


# --- tuple files ------------------------------------------------------------


class EntryDocument(BaseModel):
    base: str = Field(..., pattern=r"^[A-Za-z][A-Za-z0-9_]*$")
    conj: list[str] = []


class TupleDocument(BaseModel):
    genus: int | None = Field(None, ge=1)
    alphabet: Literal["builtin-chain", "custom"] = "builtin-chain"
    entries: list[EntryDocument] = Field(..., min_length=1)


def tuple_from_document(document: dict[str, Any]) -> HurwitzTuple:
    try:
        parsed = TupleDocument.model_validate(document)
    except ValidationError as e:
        raise TupleError("SCHEMA", f"Invalid tuple document: {e.error_count()} error(s)", detail=str(e))
    entries = []
    for entry in parsed.entries:
        conjugator: list[Letter] = []
        for token in entry.conj:
            conjugator.extend(parse_token(token))
        entries.append(TwistWord(entry.base, reduce_word(tuple(conjugator))))
    return HurwitzTuple(tuple(entries), genus_hint=parsed.genus, alphabet=parsed.alphabet)


def load_tuple(path: str | Path) -> HurwitzTuple:
    try:
        document = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise TupleError("SCHEMA", f"Cannot read tuple file {path}: {e}", path=str(path))
    result = tuple_from_document(document)
    logger.debug("Loaded tuple of length %d from %s", result.m, path)
    return result


def save_tuple(t: HurwitzTuple, path: str | Path) -> None:
    Path(path).write_text(json.dumps(t.to_json(), indent=2) + "\n", encoding="utf-8")


# --- moves ------------------------------------------------------------------


def _check_index(t: HurwitzTuple, i: int) -> None:
    if not 1 <= i < t.m:
        raise TupleError("INDEX", f"Move index {i} outside 1..{t.m - 1}", index=i, m=t.m)


def hurwitz_move(t: HurwitzTuple, i: int, direction: Literal["forward", "backward"]) -> HurwitzTuple:
    """Elementary Hurwitz move at positions i, i+1 (1-based)."""
    _check_index(t, i)
    entries = list(t.entries)
    first, second = entries[i - 1], entries[i]
    if direction == "forward":
        entries[i - 1] = second
        entries[i] = first.conjugated(second.as_word())
    elif direction == "backward":
        entries[i - 1] = second.conjugated(invert_word(first.as_word()))
        entries[i] = first
    else:
        raise TupleError("DIRECTION", f"Unknown move direction {direction!r}")
    return t.with_entries(tuple(entries))


def global_conjugate(t: HurwitzTuple, word: Word) -> HurwitzTuple:
    """Conjugate every entry by word."""
    if not word:
        return t
    return t.with_entries(tuple(entry.conjugated(word) for entry in t.entries))


def fiber_sum(t1: HurwitzTuple, t2: HurwitzTuple, h: Word = ()) -> HurwitzTuple:
    """t1 followed by t2 conjugated by the gluing word h."""
    if t1.alphabet != t2.alphabet:
        raise TupleError("ALPHABET", f"Cannot glue {t1.alphabet} and {t2.alphabet} tuples")
    if t1.genus_hint and t2.genus_hint and t1.genus_hint != t2.genus_hint:
        raise TupleError("ALPHABET", "Fiber sum of tuples of different genus",
                         left=t1.genus_hint, right=t2.genus_hint)
    glued = global_conjugate(t2, h)
    label = f"{t1.label} #{word_string(h).replace(' ', '*')} {t2.label}".strip()
    return HurwitzTuple(
        t1.entries + glued.entries,
        genus_hint=t1.genus_hint or t2.genus_hint,
        alphabet=t1.alphabet,
        verified=t1.verified and t2.verified,
        label=label,
    )


@dataclass(frozen=True)
class MoveSpec:
    """One relation applied to a tuple: a move at index, or a global conjugation."""

    kind: Literal["forward", "backward", "conjugate"]
    index: int = 0
    word: Word = field(default_factory=tuple)

    def __str__(self) -> str:
        if self.kind == "conjugate":
            return f"conjugate {word_string(self.word)}"
        return f"{self.kind} {self.index}"


def apply_move(t: HurwitzTuple, move: MoveSpec) -> HurwitzTuple:
    if move.kind == "conjugate":
        return global_conjugate(t, move.word)
    return hurwitz_move(t, move.index, move.kind)


def parse_move_script(text: str) -> list[MoveSpec]:
    """Lines 'forward i', 'backward i' or 'conjugate <word>'; '#' starts a comment."""
    moves = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        kind, _, argument = line.partition(" ")
        if kind in ("forward", "backward"):
            if not argument.strip().isdigit():
                raise TupleError("PARSE", f"Line {number}: move needs an index", line=raw)
            moves.append(MoveSpec(kind, index=int(argument)))
        elif kind == "conjugate":
            moves.append(MoveSpec("conjugate", word=parse_word(argument)))
        else:
            raise TupleError("PARSE", f"Line {number}: unknown move {kind!r}", line=raw)
    return moves


def apply_script(t: HurwitzTuple, moves: list[MoveSpec]) -> HurwitzTuple:
    for move in moves:
        t = apply_move(t, move)
    return t


def random_moves(
    t: HurwitzTuple,
    steps: int,
    rng: random.Random,
    conjugation_probability: float = 0.1,
    max_conjugator_length: int = 4,
) -> Iterator[tuple[MoveSpec, HurwitzTuple]]:
    """Yield (move, tuple after the move) for a random walk."""
    if steps < 0:
        raise TupleError("STEPS", "Number of steps must be nonnegative", steps=steps)
    alphabet = t.letters()
    for _ in range(steps):
        if t.m < 2 or rng.random() < conjugation_probability:
            length = rng.randint(1, max_conjugator_length)
            word = tuple((rng.choice(alphabet), rng.choice((1, -1))) for _ in range(length))
            move = MoveSpec("conjugate", word=word)
        else:
            move = MoveSpec(rng.choice(("forward", "backward")), index=rng.randint(1, t.m - 1))
        t = apply_move(t, move)
        yield move, t


def random_walk(
    t: HurwitzTuple,
    steps: int,
    seed: int,
    conjugation_probability: float = 0.1,
    max_conjugator_length: int = 4,
) -> HurwitzTuple:
    """Apply steps random relations; deterministic given seed."""
    rng = random.Random(seed)
    for _, t in random_moves(t, steps, rng, conjugation_probability, max_conjugator_length):
        pass
    logger.debug("Random walk of %d steps: longest conjugator %d", steps, t.max_conjugator_length())
    return t


def type_count(t: HurwitzTuple, rep: Any) -> tuple[int, int]:
    """(m_ns, m_sep) from the per-letter separating flags of rep (or a plain flag mapping)."""
    separating = getattr(rep, "separating", rep)
    missing = sorted({e.base for e in t.entries} - set(separating))
    if missing:
        raise TupleError("MISSING_FLAG", f"No separating flag for letters {missing}", letters=missing)
    m_sep = sum(1 for entry in t.entries if separating[entry.base])
    return t.m - m_sep, m_sep
