"""
Hurwitz-invariance fuzzing.

A seeded random walk of moves and global conjugations is applied to a tuple.
After every step the evaluated product must be unchanged; every check_every
steps (and after the last one) the invariant is recomputed and compared with
the starting one, and the base-change map of the latest move is checked on
random kernel vectors: B must carry Ker Gamma into the new kernel and keep the
Gram matrix of Q.
"""

import logging
import random
from dataclasses import dataclass, field
from typing import Any

from app.config import get_settings
from app.services import hurwitz
from app.services.errors import HurwitzFormsError
from app.services.hurwitz import HurwitzTuple, MoveSpec
from app.services.invariant import (
    base_change_map,
    compute_invariant,
    in_kernel,
    kernel,
    pairing_matrix,
    random_kernel_vectors,
)
from app.services.linalg import Matrix
from app.services.representations import Representation, product_check

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FuzzFailure:
    step: int
    check: str
    move: str
    detail: str

    def to_dict(self) -> dict[str, Any]:
        return {"step": self.step, "check": self.check, "move": self.move, "detail": self.detail}


@dataclass
class FuzzReport:
    label: str
    steps: int
    seed: int
    baseline: str
    checks: dict[str, int] = field(default_factory=lambda: {"product": 0, "invariant": 0, "base_change": 0})
    failures: list[FuzzFailure] = field(default_factory=list)
    final_conjugator_length: int = 0

    @property
    def passed(self) -> bool:
        return not self.failures

    def fail(self, step: int, check: str, move: MoveSpec, detail: str) -> None:
        logger.warning("Step %d (%s): %s check failed: %s", step, move, check, detail)
        self.failures.append(FuzzFailure(step, check, str(move), detail))

    def summary(self) -> str:
        counts = ", ".join(f"{name} {count}" for name, count in self.checks.items())
        verdict = "PASS" if self.passed else f"FAIL ({len(self.failures)} failures)"
        return f"{self.label or 'tuple'}: {self.steps} steps, seed {self.seed}; checks: {counts}; {verdict}"

    def to_dict(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "steps": self.steps,
            "seed": self.seed,
            "baseline": self.baseline,
            "checks": dict(self.checks),
            "failures": [failure.to_dict() for failure in self.failures],
            "passed": self.passed,
            "final_conjugator_length": self.final_conjugator_length,
        }


def _vectors(rows: list[tuple], template: Matrix) -> Matrix:
    return Matrix(template.ring, len(rows), template.cols, tuple(rows))


def check_base_change(
    before: HurwitzTuple,
    after: HurwitzTuple,
    rep: Representation,
    move: MoveSpec,
    rng: random.Random,
    pairs: int,
    psi: Matrix | None = None,
) -> str | None:
    """None if B maps kernel vectors into the new kernel and keeps Q; otherwise what went wrong."""
    data = kernel(before, rep)
    if data.rank == 0:
        return None
    b = base_change_map(before, rep, move)
    left = _vectors(random_kernel_vectors(data, pairs, rng), data.basis)
    right = _vectors(random_kernel_vectors(data, pairs, rng), data.basis)
    moved_left, moved_right = left @ b, right @ b
    product = product_check(after, rep)
    for row in moved_left.data + moved_right.data:
        if not in_kernel(row, after, rep, product):
            return "image of a kernel vector left the new kernel"
    if pairing_matrix(left, before, rep, psi, others=right) != pairing_matrix(moved_left, after, rep, psi, others=moved_right):
        return "Gram matrix changed under base change"
    return None


def run_fuzz(
    t: HurwitzTuple,
    rep: Representation,
    steps: int | None = None,
    seed: int | None = None,
    check_every: int | None = None,
    move_pairs: int | None = None,
    psi: Matrix | None = None,
) -> FuzzReport:
    """Random walk on t with the invariance checks; unset parameters come from settings."""
    settings = get_settings()
    steps = settings.fuzz_steps if steps is None else steps
    seed = settings.fuzz_seed if seed is None else seed
    check_every = check_every or settings.fuzz_check_every
    move_pairs = move_pairs or settings.fuzz_move_pairs
    if steps < 1:
        raise HurwitzFormsError("STEPS", "Fuzzing needs at least one step", steps=steps)

    baseline = compute_invariant(t, rep, psi, certify=False)
    baseline_key = baseline.invariant_key()
    baseline_product = rep.product(t)
    report = FuzzReport(t.label, steps, seed, baseline.form_class.class_string)
    logger.info("Fuzzing %s for %d steps (seed %d): baseline %s", t.label or "tuple", steps, seed, report.baseline)

    rng = random.Random(seed)
    check_rng = random.Random(seed + 1)
    before = t
    walk = hurwitz.random_moves(
        t, steps, rng,
        conjugation_probability=settings.conjugation_probability,
        max_conjugator_length=settings.max_conjugator_length,
    )
    for step, (move, after) in enumerate(walk, start=1):
        logger.debug("Step %d: %s", step, move)
        report.checks["product"] += 1
        if rep.product(after) != baseline_product:
            report.fail(step, "product", move, "evaluated product changed")
        if step % check_every == 0 or step == steps:
            report.checks["invariant"] += 1
            try:
                key = compute_invariant(after, rep, psi, certify=False).invariant_key()
            except HurwitzFormsError as e:
                report.fail(step, "invariant", move, f"{e.error_type}: {e.message}")
            else:
                if key != baseline_key:
                    report.fail(step, "invariant", move, f"invariant changed to {key}")
            report.checks["base_change"] += 1
            problem = check_base_change(before, after, rep, move, check_rng, move_pairs, psi)
            if problem:
                report.fail(step, "base_change", move, problem)
        before = after
    report.final_conjugator_length = before.max_conjugator_length()
    logger.info(report.summary())
    return report


def run_move_checks(
    t: HurwitzTuple,
    rep: Representation,
    moves: int,
    seed: int,
    pairs: int | None = None,
    psi: Matrix | None = None,
) -> list[FuzzFailure]:
    """Base-change verification on independent single random moves of t."""
    settings = get_settings()
    pairs = pairs or settings.fuzz_move_pairs
    rng = random.Random(seed)
    failures = []
    for number in range(1, moves + 1):
        (move, after), = hurwitz.random_moves(
            t, 1, rng,
            conjugation_probability=settings.conjugation_probability,
            max_conjugator_length=settings.max_conjugator_length,
        )
        problem = check_base_change(t, after, rep, move, rng, pairs, psi)
        if problem:
            failures.append(FuzzFailure(number, "base_change", str(move), problem))
    return failures
