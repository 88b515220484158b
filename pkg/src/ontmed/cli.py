"""Command-line front end: one subcommand per pipeline stage.

Data goes to stdout, diagnostics to stderr. Exit codes: 0 success,
1 quality failure under --strict, 2 usage/parse/IO errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import docio
from .align import compute_alignment
from .docio import ParseError
from .mediate import MediationError, UnanswerableQueryError, answer_query
from .merge import MergeError
from .model import OntologyError
from .pipeline import (
    PipelineError,
    StrictQualityError,
    run_pipeline,
    stores_from_abox_documents,
)
from .quality import lint

EXIT_OK = 0
EXIT_QUALITY = 1
EXIT_USAGE = 2


def _err(message: str) -> None:
    print(message, file=sys.stderr)


def _report_parse_error(exc: ParseError) -> int:
    for diagnostic in exc.diagnostics:
        _err(str(diagnostic))
    return EXIT_USAGE


def _read_text(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise PipelineError("read", f"cannot read {path}: {exc.strerror or exc}") from exc


def _default_out(explicit: str | None) -> Path | None:
    if explicit:
        return Path(explicit)
    env = os.environ.get("ONTMED_OUT")
    return Path(env) if env else None


def cmd_lint(args: argparse.Namespace) -> int:
    if args.chain_length < 2 or args.clump_size < 2:
        _err("--chain-length and --clump-size must be at least 2")
        return EXIT_USAGE
    path = Path(args.ontology)
    try:
        ontology = docio.parse_ontology(_read_text(path), file=str(path))
    except ParseError as exc:
        return _report_parse_error(exc)
    except (PipelineError, OntologyError) as exc:
        _err(str(exc))
        return EXIT_USAGE
    report = lint(ontology, chain_length=args.chain_length, clump_size=args.clump_size)
    if args.json:
        sys.stdout.write(docio.serialize_report(report))
    else:
        sys.stdout.write(report.render_text())
    if args.strict and report.errors():
        return EXIT_QUALITY
    return EXIT_OK


def cmd_align(args: argparse.Namespace) -> int:
    if not 0.0 <= args.theta <= 1.0:
        _err(f"--theta must be within [0,1], got {args.theta}")
        return EXIT_USAGE
    try:
        o1 = docio.parse_ontology(_read_text(Path(args.onto1)), file=args.onto1)
        o2 = docio.parse_ontology(_read_text(Path(args.onto2)), file=args.onto2)
        alignment = compute_alignment(o1, o2, args.theta)
    except ParseError as exc:
        return _report_parse_error(exc)
    except (PipelineError, OntologyError, ValueError) as exc:
        _err(str(exc))
        return EXIT_USAGE
    text = docio.serialize_alignment(alignment)
    out = _default_out(args.out)
    if out is None:
        sys.stdout.write(text)
        return EXIT_OK
    if out.is_dir() or not out.suffix:
        out.mkdir(parents=True, exist_ok=True)
        out = out / "alignment.json"
    try:
        out.write_text(text, encoding="utf-8")
    except OSError as exc:
        _err(f"cannot write {out}: {exc.strerror or exc}")
        return EXIT_USAGE
    return EXIT_OK


def cmd_merge(args: argparse.Namespace) -> int:
    out = _default_out(args.out)
    if out is None:
        _err("an output directory is required (--out or ONTMED_OUT)")
        return EXIT_USAGE
    manifest_path = Path(args.manifest)
    try:
        manifest = docio.parse_manifest(_read_text(manifest_path), file=str(manifest_path))
        run_pipeline(
            manifest.without_queries(),
            manifest_path.parent,
            out,
            repair=not args.no_repair,
        )
    except ParseError as exc:
        return _report_parse_error(exc)
    except (PipelineError, MergeError, OntologyError) as exc:
        _err(str(exc))
        return EXIT_USAGE
    return EXIT_OK


def cmd_query(args: argparse.Namespace) -> int:
    merged_dir = Path(args.merged_dir)
    try:
        global_ontology = docio.parse_ontology(
            _read_text(merged_dir / "merged.ttl"), file=str(merged_dir / "merged.ttl")
        )
        merged = docio.parse_provenance(
            _read_text(merged_dir / "provenance.json"),
            global_ontology,
            file=str(merged_dir / "provenance.json"),
        )
        query_path = Path(args.query)
        query = docio.parse_query(
            _read_text(query_path), query_id=query_path.stem, file=str(query_path)
        )
        documents = [(_read_text(Path(rel)), rel) for rel in args.aboxes]
        stores = stores_from_abox_documents(merged, documents)
        answers = answer_query(query, merged, stores)
    except ParseError as exc:
        return _report_parse_error(exc)
    except UnanswerableQueryError as exc:
        _err(str(exc))
        return EXIT_USAGE
    except (PipelineError, MediationError, MergeError, OntologyError) as exc:
        _err(str(exc))
        return EXIT_USAGE
    sys.stdout.write(docio.serialize_answer_set(answers))
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    out = _default_out(args.out)
    if out is None:
        _err("an output directory is required (--out or ONTMED_OUT)")
        return EXIT_USAGE
    manifest_path = Path(args.manifest)
    try:
        manifest = docio.parse_manifest(_read_text(manifest_path), file=str(manifest_path))
    except ParseError as exc:
        return _report_parse_error(exc)
    except PipelineError as exc:
        _err(str(exc))
        return EXIT_USAGE
    if manifest.references is None:
        _err("references required for eval")
        return EXIT_USAGE
    try:
        result = run_pipeline(manifest, manifest_path.parent, out)
    except ParseError as exc:
        return _report_parse_error(exc)
    except StrictQualityError as exc:
        _err(str(exc))
        return EXIT_QUALITY
    except (PipelineError, MergeError, OntologyError) as exc:
        _err(str(exc))
        return EXIT_USAGE
    if result.evaluation is not None:
        sys.stdout.write(docio.serialize_evaluation(result.evaluation))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ontmed",
        description="Merge local ontologies into a quality-checked global schema "
        "and answer conjunctive queries across the sources.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_lint = sub.add_parser("lint", help="run the quality detectors over one ontology")
    p_lint.add_argument("ontology")
    style = p_lint.add_mutually_exclusive_group()
    style.add_argument("--json", action="store_true", help="emit the report as JSON")
    style.add_argument("--text", action="store_true", help="emit the report as text (default)")
    p_lint.add_argument("--strict", action="store_true", help="exit 1 on Error findings")
    p_lint.add_argument("--chain-length", type=int, default=3)
    p_lint.add_argument("--clump-size", type=int, default=3)
    p_lint.set_defaults(func=cmd_lint)

    p_align = sub.add_parser("align", help="compute correspondences between two ontologies")
    p_align.add_argument("onto1")
    p_align.add_argument("onto2")
    p_align.add_argument("--theta", type=float, default=0.85, help="similarity threshold")
    p_align.add_argument("--out", help="alignment file (default: stdout, or ONTMED_OUT)")
    p_align.set_defaults(func=cmd_align)

    p_merge = sub.add_parser("merge", help="build the global ontology from a manifest")
    p_merge.add_argument("manifest")
    p_merge.add_argument("--out", help="output directory (default: ONTMED_OUT)")
    p_merge.add_argument(
        "--no-repair",
        action="store_true",
        help="skip alignment repair and redundancy repair",
    )
    p_merge.set_defaults(func=cmd_merge)

    p_query = sub.add_parser("query", help="answer one query against a merged directory")
    p_query.add_argument("merged_dir")
    p_query.add_argument("query")
    p_query.add_argument("aboxes", nargs="*", help="ABox documents, one or more per source")
    p_query.set_defaults(func=cmd_query)

    p_eval = sub.add_parser("eval", help="run the full pipeline and score against references")
    p_eval.add_argument("manifest")
    p_eval.add_argument("--out", help="output directory (default: ONTMED_OUT)")
    p_eval.set_defaults(func=cmd_eval)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
