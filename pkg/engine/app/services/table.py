"""
Recompute the invariants table from built-in monodromies and diff it against
the printed values shipped in ``app/data/table1.json``.

Rows whose monodromy is not built in are listed with their printed values
only. Quantum columns are never recomputed.
"""

import json
import logging
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from app.config import get_settings
from app.services import hurwitz
from app.services.errors import HurwitzFormsError
from app.services.forms import ClassSummary, normalize_tex, parse_class_string, summarize
from app.services.invariant import compute_invariant
from app.services.meyer import fibration_signature
from app.services.representations import parse_tuple_expression, symplectic_rep
from app.services.rings import ZZ

logger = logging.getLogger(__name__)

DEFAULT_TABLE_PATH = Path(__file__).resolve().parent.parent / "data" / "table1.json"

NOT_COMPUTED_QUANTUM = "n/a (representation not built in)"
NOT_COMPUTED_MONODROMY = "n/a (monodromy not built in)"

_TEX_COMMANDS = re.compile(r"\\(?:rm|mathcal|tt)\s*")


@dataclass(frozen=True)
class TableRow:
    fibration: str
    genus: int
    type: tuple[int, int]
    sigma: int
    q_omega_z: str
    q_spin_odd: str
    q_spin_even: str
    expression: str | None = None
    note: str = ""

    @property
    def name(self) -> str:
        """Plain-text row label, e.g. 'xi_1 #_id xi_1'."""
        text = self.fibration.replace("$", "").replace("\\sharp", "#").replace("\\xi", "xi")
        text = _TEX_COMMANDS.sub("", text).replace("{", "").replace("}", "")
        return " ".join(text.split())

    @property
    def expected(self) -> ClassSummary:
        return parse_class_string(self.q_omega_z)

    @property
    def computable(self) -> bool:
        return self.expression is not None


def parse_sigma(text: str) -> int:
    return int(text.replace("$", "").replace(" ", ""))


def load_table(path: str | Path | None = None) -> list[TableRow]:
    """Rows of the packaged table, or of the file named by TABLE_DATA_PATH."""
    path = Path(path or get_settings().table_data_path or DEFAULT_TABLE_PATH)
    document = json.loads(path.read_text(encoding="utf-8"))
    rows = []
    for raw in document["rows"]:
        sigma = raw.get("sigma_value")
        rows.append(TableRow(
            fibration=raw["fibration"],
            genus=raw["genus"],
            type=tuple(raw["type"]),
            sigma=sigma if sigma is not None else parse_sigma(raw["sigma"]),
            q_omega_z=raw["q_omega_z"],
            q_spin_odd=raw["q_spin_odd"],
            q_spin_even=raw["q_spin_even"],
            expression=raw.get("expression"),
            note=raw.get("note", ""),
        ))
    logger.debug("Loaded %d table rows from %s", len(rows), path)
    return rows


@dataclass
class RowResult:
    row: TableRow
    class_string: str = ""
    computed: ClassSummary | None = None
    type: tuple[int, int] | None = None
    sigma_meyer: int | None = None
    sigma_form: int | None = None
    definite_disclaimer: bool = False
    error: str = ""
    checks: dict[str, bool] = field(default_factory=dict)

    @property
    def computed_row(self) -> bool:
        return self.computed is not None

    @property
    def passed(self) -> bool:
        return self.computed_row and all(self.checks.values())

    def to_dict(self) -> dict[str, Any]:
        return {
            "fibration": self.row.name,
            "genus": self.row.genus,
            "expression": self.row.expression,
            "expected": {
                "type": list(self.row.type),
                "sigma": self.row.sigma,
                "q_omega_z": normalize_tex(self.row.q_omega_z).strip(),
            },
            "computed": None if not self.computed_row else {
                "type": list(self.type),
                "sigma_meyer": self.sigma_meyer,
                "sigma_form": self.sigma_form,
                "q_omega_z": self.class_string,
                "definite_disclaimer": self.definite_disclaimer,
            },
            "checks": self.checks,
            "passed": self.passed,
            "error": self.error or None,
            "note": self.row.note or None,
        }


def compute_row(row: TableRow, fuzz_steps: int = 0, seed: int = 0) -> RowResult:
    """Recompute one row; fuzz_steps random relations are applied to the tuple first."""
    if not row.computable:
        return RowResult(row)
    settings = get_settings()
    try:
        t = parse_tuple_expression(row.expression, row.genus)
        if fuzz_steps:
            t = hurwitz.random_walk(
                t, fuzz_steps, seed,
                conjugation_probability=settings.conjugation_probability,
                max_conjugator_length=settings.max_conjugator_length,
            )
        rep = symplectic_rep(row.genus, ZZ, block_size=settings.word_block_size)
        result = compute_invariant(t, rep, certify=False)
        report = fibration_signature(t, rep, result)
    except HurwitzFormsError as e:
        logger.error("Row %s failed: %s", row.name, e.message)
        return RowResult(row, error=f"{e.error_type}: {e.message}", checks={"computed": False})
    computed = summarize(result.form_class)
    expected = row.expected
    checks = {
        "type": result.type_count == row.type,
        "class": computed == expected,
        "sigma_meyer": report.sigma_meyer == row.sigma,
        "sigma_form": report.sigma_form == row.sigma,
    }
    logger.info("Row %s (g=%d): %s", row.name, row.genus, result.form_class.class_string)
    return RowResult(
        row,
        class_string=result.form_class.class_string,
        computed=computed,
        type=result.type_count,
        sigma_meyer=report.sigma_meyer,
        sigma_form=report.sigma_form,
        definite_disclaimer=result.form_class.definite_disclaimer,
        checks=checks,
    )


def _compute_row_args(args: tuple[TableRow, int, int]) -> RowResult:
    return compute_row(*args)


def compute_table(
    genus: int | None = None,
    workers: int | None = None,
    fuzz_steps: int = 0,
    seed: int = 0,
    path: str | Path | None = None,
) -> list[RowResult]:
    """All rows (optionally one genus) in table order; rows run in worker processes when workers > 1."""
    rows = [row for row in load_table(path) if genus is None or row.genus == genus]
    workers = workers or get_settings().table_workers
    jobs = [(row, fuzz_steps, seed) for row in rows]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_compute_row_args, jobs))
    return [compute_row(*job) for job in jobs]


def _mark(ok: bool) -> str:
    return "✓" if ok else "✗"


def render_table(results: list[RowResult]) -> str:
    """Fixed-width text rendering; byte-stable for a fixed set of results."""
    header = ("fibration", "g", "type", "sigma", "Q_omega_Z (computed)", "Q_omega_Z (printed)", "quantum")
    lines = [header]
    for result in results:
        row = result.row
        printed = " ".join(normalize_tex(row.q_omega_z).split())
        if not result.computed_row:
            reason = result.error or NOT_COMPUTED_MONODROMY
            lines.append((row.name, str(row.genus), f"{row.type}", str(row.sigma), reason, printed, NOT_COMPUTED_QUANTUM))
            continue
        checks = result.checks
        type_cell = f"{result.type} {_mark(checks['type'])}"
        sigma_cell = f"{result.sigma_meyer}/{result.sigma_form} {_mark(checks['sigma_meyer'] and checks['sigma_form'])}"
        class_cell = f"{result.class_string}{' *' if result.definite_disclaimer else ''} {_mark(checks['class'])}"
        lines.append((row.name, str(row.genus), type_cell, sigma_cell, class_cell, printed, NOT_COMPUTED_QUANTUM))
    widths = [max(len(line[i]) for line in lines) for i in range(len(header))]
    rendered = [" | ".join(cell.ljust(width) for cell, width in zip(line, widths)).rstrip() for line in lines]
    rendered.insert(1, "-+-".join("-" * width for width in widths))
    if any(result.definite_disclaimer for result in results):
        rendered.append("* definite even form of rank >= 16: the class string records rank, signature and parity only")
    return "\n".join(rendered) + "\n"
