"""
Command-line entry point.

    python -m app.cli invariant --genus 2 --builtin xi1
    python -m app.cli table --genus 3 --fuzz 100 --seed 7
    python -m app.cli signature --genus 2 --builtin "xi1 #d xi1"
    python -m app.cli fuzz --genus 2 --builtin xi1 --steps 500
    python -m app.cli moves --tuple-file t.json --script moves.txt --out moved.json
    python -m app.cli serve

Exit status: 0 when every requested check passes, 1 on a failed check or a
computation error, 2 on usage errors (bad flags, unreadable or empty tuples).
"""

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from app.config import get_settings
from app.services import hurwitz
from app.services.errors import HurwitzFormsError
from app.services.fuzz import run_fuzz, run_move_checks
from app.services.invariant import InvariantResult, compute_invariant
from app.services.meyer import fibration_signature
from app.services.sources import REPRESENTATION_SOURCES, resolve_representation, resolve_tuple
from app.services.table import compute_table, render_table

logger = logging.getLogger("app.cli")

USAGE_ERRORS = ("SCHEMA", "PARSE", "EMPTY", "SOURCE", "NEGATIVE_LETTER")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    """One run: command, genus, ring, tuple and representation sources, output."""

    command: str
    genus: int
    ring: str
    seed: int
    json: bool = False
    out: str | None = None
    builtin: str | None = None
    tuple_file: str | None = None
    word: str | None = None
    rep: str = "symplectic"
    rep_file: str | None = None
    reduce: bool = False
    psi_file: str | None = None
    ell: int = 1
    ell_sweep: bool = False
    certify: bool = True
    steps: int = 0
    check_every: int | None = None
    move_pairs: int | None = None
    single_moves: int = 0
    fuzz: int = 0
    workers: int | None = None
    table_genus: int | None = None
    script: str | None = None

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        settings = get_settings()
        genus = args.genus if args.genus is not None else settings.default_genus
        return cls(
            command=args.command,
            genus=genus,
            ring=args.ring or settings.default_ring,
            seed=args.seed if args.seed is not None else settings.fuzz_seed,
            json=args.json,
            out=args.out,
            builtin=getattr(args, "builtin", None),
            tuple_file=getattr(args, "tuple_file", None),
            word=getattr(args, "word", None),
            rep=getattr(args, "rep", "symplectic"),
            rep_file=getattr(args, "rep_file", None),
            reduce=getattr(args, "reduce", False),
            psi_file=getattr(args, "psi_file", None),
            ell=getattr(args, "ell", None) or settings.default_ell,
            ell_sweep=getattr(args, "ell_sweep", False),
            certify=not getattr(args, "no_certify", False),
            steps=settings.fuzz_steps if getattr(args, "steps", None) is None else args.steps,
            check_every=getattr(args, "check_every", None),
            move_pairs=getattr(args, "move_pairs", None),
            single_moves=getattr(args, "single_moves", 0),
            fuzz=getattr(args, "fuzz", 0),
            workers=getattr(args, "workers", None),
            table_genus=args.genus,
            script=getattr(args, "script", None),
        )

    def load_tuple(self) -> hurwitz.HurwitzTuple:
        sources = [s for s in (self.builtin, self.tuple_file, self.word) if s is not None]
        if len(sources) != 1:
            raise UsageError("give exactly one of --builtin, --tuple-file, --word")
        return resolve_tuple(self.genus, builtin=self.builtin, tuple_file=self.tuple_file, word=self.word)

    def representation(self):
        return resolve_representation(
            self.rep, self.genus, self.ring,
            reduce=self.reduce, psi_file=self.psi_file, rep_file=self.rep_file,
            block_size=get_settings().word_block_size,
        )


def _emit(config: RunConfig, text: str, data: dict[str, Any]) -> None:
    output = json.dumps(data, indent=2, ensure_ascii=False) + "\n" if config.json else text
    if config.out:
        Path(config.out).write_text(output, encoding="utf-8")
        logger.info("Wrote %s", config.out)
    else:
        sys.stdout.write(output)


def _format_invariant(result: InvariantResult) -> str:
    m_ns, m_sep = result.type_count
    lines = [
        f"tuple:        {result.label or 'tuple'} (m={result.m}, type ({m_ns}, {m_sep}))",
        f"ring:         {result.form_class.ring}",
        f"class:        {result.form_class.class_string}",
        f"kernel rank:  {result.kernel_rank}",
        f"M_z rank:     {result.mz_rank}",
        f"determinant:  {result.determinant}",
    ]
    if result.form_class.sigma is not None:
        lines.append(f"signature:    {result.form_class.sigma} (sigma + m - m_ns = {result.form_class.sigma + m_sep})")
    if result.b1 is not None:
        lines.append(f"b1:           {result.b1}")
    if result.predicted_ranks is not None:
        verdict = "ok" if result.predictions_hold else "MISMATCH"
        lines.append(f"predicted:    M_z {result.predicted_ranks[0]}, kernel {result.predicted_ranks[1]}: {verdict}")
    if result.torsion:
        lines.append(f"torsion:      {' '.join(str(d) for d in result.torsion)}")
    if result.ell_independent is not None:
        lines.append(f"ell sweep:    {'identical' if result.ell_independent else 'DIFFERENT'}")
    if result.certificate is not None:
        lines.append(f"certificate:  {result.certificate.certificate}")
    if result.form_class.definite_disclaimer:
        lines.append("note:         definite even form of rank >= 16; class recorded by rank, signature and parity")
    if result.experimental:
        lines.append("note:         experimental representation")
    return "\n".join(lines) + "\n"


def cmd_invariant(config: RunConfig) -> int:
    t, rep = config.load_tuple(), config.representation()
    result = compute_invariant(t, rep, ell=config.ell, ell_sweep=config.ell_sweep, certify=config.certify)
    _emit(config, _format_invariant(result), result.to_dict())
    return 0 if result.predictions_hold is not False and result.ell_independent is not False else 1


def cmd_table(config: RunConfig) -> int:
    if config.table_genus not in (None, 2, 3):
        raise UsageError("table rows exist for genus 2 and 3 only")
    results = compute_table(config.table_genus, workers=config.workers, fuzz_steps=config.fuzz, seed=config.seed)
    data = {"rows": [result.to_dict() for result in results]}
    _emit(config, render_table(results), data)
    return 0 if all(result.passed for result in results if result.row.computable) else 1


def cmd_signature(config: RunConfig) -> int:
    t, rep = config.load_tuple(), config.representation()
    report = fibration_signature(t, rep)
    text = (
        f"tuple:         {t.label or 'tuple'} (m={report.m}, m_ns={report.m_ns})\n"
        f"Meyer sum:     {report.sigma_meyer}\n"
        f"form route:    {report.sigma_form}\n"
        f"agree:         {'yes' if report.agree else 'NO'}\n"
    )
    _emit(config, text, {"label": t.label, **report.to_dict()})
    return 0 if report.agree else 1


def cmd_fuzz(config: RunConfig) -> int:
    if config.steps < 1:
        raise UsageError("--steps must be at least 1")
    t, rep = config.load_tuple(), config.representation()
    report = run_fuzz(t, rep, config.steps, config.seed, config.check_every, config.move_pairs)
    data = report.to_dict()
    text = report.summary() + "\n"
    failures = list(report.failures)
    if config.single_moves:
        single = run_move_checks(t, rep, config.single_moves, config.seed, config.move_pairs)
        failures.extend(single)
        data["single_moves"] = {"moves": config.single_moves, "failures": [f.to_dict() for f in single]}
        text += f"single moves: {config.single_moves}, failures {len(single)}\n"
    for failure in failures:
        text += f"  step {failure.step} ({failure.move}): {failure.check}: {failure.detail}\n"
    _emit(config, text, data)
    return 0 if not failures else 1


def cmd_moves(config: RunConfig) -> int:
    if config.tuple_file is None or config.script is None:
        raise UsageError("moves needs --tuple-file and --script")
    t = hurwitz.load_tuple(config.tuple_file)
    try:
        script = Path(config.script).read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read move script: {e}")
    result = hurwitz.apply_script(t, hurwitz.parse_move_script(script))
    document = result.to_json()
    _emit(config, json.dumps(document, indent=2) + "\n", document)
    return 0


def cmd_serve(config: RunConfig, host: str | None = None, port: int | None = None) -> int:
    import uvicorn

    settings = get_settings()
    uvicorn.run("app.main:app", host=host or settings.host, port=port or settings.port, reload=settings.debug)
    return 0


def _tuple_options(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--builtin", help="built-in expression, e.g. 'xi1', 'xi2 #d xi1', 'xi2 #c1^3*c3 xi1'")
    source.add_argument("--tuple-file", help="tuple document (JSON)")
    source.add_argument("--word", help="positive word, one entry per letter, e.g. 'c1 c2 | ^6'")
    parser.add_argument("--rep", default="symplectic",
                        help=f"representation: {', '.join(REPRESENTATION_SOURCES)} or a packaged name")
    parser.add_argument("--rep-file", help="representation document (JSON); overrides --rep")
    parser.add_argument("--reduce", action="store_true", help="reduce quantum-g1 to F_2[y]/(y^2)")
    parser.add_argument("--psi-file", help="JSON file with an invariant 'psi' matrix")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--ring", help="Z, Q, Zmod:P, Fpy:p or Zzeta16")
    common.add_argument("--genus", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--json", action="store_true", help="JSON output")
    common.add_argument("--out", help="write output to a file instead of stdout")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")

    parser = argparse.ArgumentParser(prog="hurwitz-forms", description=__doc__.split("\n\n")[0].strip())
    commands = parser.add_subparsers(dest="command", required=True)

    invariant = commands.add_parser("invariant", parents=[common], help="compute the bilinear-form invariant")
    _tuple_options(invariant)
    invariant.add_argument("--ell", type=int, help="offset of the pairing (1..m)")
    invariant.add_argument("--ell-sweep", action="store_true", help="check W for every offset")
    invariant.add_argument("--no-certify", action="store_true", help="skip the unimodularity certificate")

    table = commands.add_parser("table", parents=[common], help="recompute the invariants table")
    table.add_argument("--workers", type=int)
    table.add_argument("--fuzz", type=int, default=0, help="random relations applied to each tuple first")

    signature = commands.add_parser("signature", parents=[common], help="signature by Meyer sum and by the form")
    _tuple_options(signature)

    fuzz = commands.add_parser("fuzz", parents=[common], help="Hurwitz-invariance fuzzing")
    _tuple_options(fuzz)
    fuzz.add_argument("--steps", type=int)
    fuzz.add_argument("--check-every", type=int)
    fuzz.add_argument("--move-pairs", type=int)
    fuzz.add_argument("--single-moves", type=int, default=0, help="extra base-change checks on single moves")

    moves = commands.add_parser("moves", parents=[common], help="apply a move script to a tuple file")
    moves.add_argument("--tuple-file")
    moves.add_argument("--script", help="lines 'forward i', 'backward i', 'conjugate w'")

    serve = commands.add_parser("serve", parents=[common], help="run the HTTP service")
    serve.add_argument("--host")
    serve.add_argument("--port", type=int)
    return parser


COMMANDS = {
    "invariant": cmd_invariant,
    "table": cmd_table,
    "signature": cmd_signature,
    "fuzz": cmd_fuzz,
    "moves": cmd_moves,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    settings = get_settings()
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else settings.log_level,
        format="%(asctime)s [%(levelname)s] %(message)s",
        datefmt="%H:%M:%S",
    )
    config = RunConfig.from_args(args)
    try:
        if config.command == "serve":
            return cmd_serve(config, args.host, args.port)
        return COMMANDS[config.command](config)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2
    except HurwitzFormsError as e:
        print(f"error [{e.error_type}]: {e.message}", file=sys.stderr)
        return 2 if e.error_type in USAGE_ERRORS else 1


if __name__ == "__main__":
    sys.exit(main())
