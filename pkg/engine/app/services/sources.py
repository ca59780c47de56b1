"""
Resolve where a run's tuple and representation come from.

Shared by the command line and the HTTP layer: exactly one tuple source
(built-in expression, tuple file or document, inline word) and one
representation source (symplectic, genus-1 quantum, representation file or a
packaged representation) per run.
"""

import json
import logging
from pathlib import Path
from typing import Any

from app.services import hurwitz
from app.services.errors import RepresentationError, TupleError
from app.services.hurwitz import HurwitzTuple
from app.services.linalg import Matrix
from app.services.representations import (
    Representation,
    load_representation,
    packaged_representation,
    parse_tuple_expression,
    quantum_su2_level2_g1,
    reduce_representation,
    symplectic_rep,
)
from app.services.rings import parse_ring

logger = logging.getLogger(__name__)

REPRESENTATION_SOURCES = ("symplectic", "quantum-g1")


def resolve_tuple(
    genus: int,
    builtin: str | None = None,
    tuple_file: str | Path | None = None,
    word: str | None = None,
    document: dict[str, Any] | None = None,
) -> HurwitzTuple:
    """The single tuple named by the given source."""
    given = [source for source in (builtin, tuple_file, word, document) if source is not None]
    if len(given) != 1:
        raise TupleError("SOURCE", f"Exactly one tuple source is required, got {len(given)}")
    if builtin is not None:
        return parse_tuple_expression(builtin, genus)
    if tuple_file is not None:
        return hurwitz.load_tuple(tuple_file)
    if document is not None:
        return hurwitz.tuple_from_document(document)
    return hurwitz.tuple_from_word(hurwitz.parse_word(word), genus=genus, label=word)


def load_psi(path: str | Path, rep: Representation) -> Matrix:
    """psi from a JSON file holding {"psi": [[...]]} (a representation file works too)."""
    try:
        document = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise RepresentationError("SCHEMA", f"Cannot read psi file {path}: {e}", path=str(path))
    entries = document.get("psi") if isinstance(document, dict) else None
    if not entries or len(entries) != rep.dim or any(len(row) != rep.dim for row in entries):
        raise RepresentationError("SCHEMA", f"psi file {path} needs a {rep.dim}x{rep.dim} 'psi' matrix", path=str(path))
    return Matrix.from_rows(rep.ring, entries)


def resolve_representation(
    source: str,
    genus: int,
    ring: str = "Z",
    reduce: bool = False,
    psi_file: str | Path | None = None,
    rep_file: str | Path | None = None,
    block_size: int | None = None,
) -> Representation:
    """
    One representation: rep_file wins; otherwise source is 'symplectic',
    'quantum-g1' or the name of a packaged representation file.
    """
    if rep_file is not None:
        rep = load_representation(rep_file)
    elif source == "symplectic":
        if block_size is None:
            rep = symplectic_rep(genus, parse_ring(ring))
        else:
            rep = symplectic_rep(genus, parse_ring(ring), block_size=block_size)
    elif source == "quantum-g1":
        rep = quantum_su2_level2_g1()
        if reduce:
            rep = reduce_representation(rep)
    else:
        rep = packaged_representation(source)
    if psi_file is not None:
        rep = rep.with_psi(load_psi(psi_file, rep))
    logger.debug("Representation %s over %s (dim %d)", rep.name, rep.ring.name, rep.dim)
    return rep
