"""Command-line entry point.

Subcommands mirror the pipeline stages (separate, annotate, stats, layout,
export) plus `serve` for the HTTP facade. Exit codes: 0 ok, 2 input error,
3 provider error, 4 validation error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .annotator import (
    AnnotationFailedError,
    ProviderConfig,
    ProviderError,
    ValidationFailedError,
)
from .layout import (
    BadStateError,
    ExpansionState,
    UnknownNodeError,
    Viewport,
    tree_payload,
)
from .model import (
    MalformedDocumentError,
    SchemaViolationError,
    StepCountMismatchError,
    StructuredTrace,
    decode_structured,
    encode_structured,
    validate,
)
from .separator import EmptyTraceError, MissingFieldError
from .service import (
    PipelineError,
    TraceStore,
    _layout_for,
    default_data_dir,
    run_pipeline,
    serve,
)
from .stats import compute_stats, stats_payload
from .svg import export_svg
from .taxonomy import UnknownSubcategoryError

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_PROVIDER = 3
EXIT_VALIDATION = 4

_INPUT_ERRORS = (
    FileNotFoundError,
    IsADirectoryError,
    PermissionError,
    UnicodeDecodeError,
    MalformedDocumentError,
    SchemaViolationError,
    MissingFieldError,
    EmptyTraceError,
    BadStateError,
    UnknownNodeError,
)
_PROVIDER_ERRORS = (ProviderError, AnnotationFailedError)
_VALIDATION_ERRORS = (
    ValidationFailedError,
    StepCountMismatchError,
    UnknownSubcategoryError,
)


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _write_output(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        Path(out).write_text(text, encoding="utf-8")


def _field_path_arg(value: str | None) -> str | None:
    # absent flag -> auto-detect; --field-path "" -> passthrough
    return value


def _add_ingest_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", "-i", required=True, help="input file or - for stdin")
    parser.add_argument(
        "--field-path",
        default=None,
        help="path to the reasoning text inside a provider JSON document "
        "(default: auto-detect; pass an empty string for plain-text input)",
    )
    parser.add_argument("--question", default="", help="task question override")
    parser.add_argument("--answer", default="", help="final answer override")
    parser.add_argument("--source-model", default="", help="trace-producing model label")


def _add_view_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--view", choices=("spacefill", "timeline"), default="spacefill"
    )
    parser.add_argument("--width", type=float, default=1200.0)
    parser.add_argument("--height", type=float, default=800.0)
    parser.add_argument("--expanded-phase", type=int, default=None)
    parser.add_argument("--expanded-subphase", default=None)


def _provider_from_args(args: argparse.Namespace) -> ProviderConfig:
    return ProviderConfig(
        endpoint=args.endpoint or os.environ.get("RETRACE_LLM_ENDPOINT", ""),
        model=args.model,
        credential=os.environ.get("RETRACE_LLM_API_KEY", ""),
        timeout=args.timeout,
        max_retries=args.max_retries,
        temperature=args.temperature,
    )


def _load_validated(path: str) -> StructuredTrace:
    structured = decode_structured(_read_input(path))
    report = validate(structured, structured.source)
    if not report.ok:
        raise ValidationFailedError(report)
    return structured


def _cmd_separate(args: argparse.Namespace) -> int:
    structured_input = _read_input(args.input)
    from .service import _ingest  # same ingestion rules as the HTTP facade
    from .separator import separate as split

    stepped = split(
        _ingest(
            structured_input,
            _field_path_arg(args.field_path),
            args.question,
            args.answer,
            args.source_model,
        )
    )
    if stepped.step_count == 1:
        print(
            "note: trace has a single step (no newline delimiters found)",
            file=sys.stderr,
        )
    payload = {
        "steps": list(stepped.steps),
        "question": stepped.question,
        "final_answer": stepped.final_answer,
        "source_model": stepped.source_model,
    }
    _write_output(json.dumps(payload, indent=2, ensure_ascii=False), args.out)
    return EXIT_OK


def _cmd_annotate(args: argparse.Namespace) -> int:
    structured = run_pipeline(
        _read_input(args.input),
        backend=args.backend,
        field_path=_field_path_arg(args.field_path),
        question=args.question,
        final_answer=args.answer,
        source_model=args.source_model,
        provider=_provider_from_args(args),
    )
    _write_output(encode_structured(structured), args.out)
    return EXIT_OK


def _cmd_stats(args: argparse.Namespace) -> int:
    structured = _load_validated(args.input)
    payload = stats_payload(compute_stats(structured))
    _write_output(json.dumps(payload, indent=2), args.out)
    return EXIT_OK


def _make_state(args: argparse.Namespace) -> ExpansionState:
    return ExpansionState(
        expanded_phase=args.expanded_phase,
        expanded_subphase=args.expanded_subphase,
    )


def _cmd_layout(args: argparse.Namespace) -> int:
    structured = _load_validated(args.input)
    tree = _layout_for(
        structured, args.view, _make_state(args), Viewport(args.width, args.height)
    )
    _write_output(json.dumps(tree_payload(tree), indent=2), args.out)
    return EXIT_OK


def _cmd_export(args: argparse.Namespace) -> int:
    structured = _load_validated(args.input)
    tree = _layout_for(
        structured, args.view, _make_state(args), Viewport(args.width, args.height)
    )
    _write_output(export_svg(tree), args.out)
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    store = TraceStore(args.data_dir)
    static_dir = args.static_dir
    if static_dir is None:
        bundled = Path("frontend") / "dist"
        static_dir = bundled if bundled.is_dir() else None
    serve(
        store,
        host=args.host,
        port=args.port,
        provider=None,
        static_dir=static_dir,
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="retrace",
        description="Structure, analyze, and lay out LRM reasoning traces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sep = sub.add_parser("separate", help="split a raw trace into indexed steps")
    _add_ingest_flags(p_sep)
    p_sep.add_argument("--out", default=None)
    p_sep.set_defaults(func=_cmd_separate)

    p_ann = sub.add_parser("annotate", help="produce a structured trace document")
    _add_ingest_flags(p_ann)
    p_ann.add_argument("--backend", choices=("heuristic", "llm"), default="heuristic")
    p_ann.add_argument("--endpoint", default="", help="LLM endpoint URL")
    p_ann.add_argument("--model", default="", help="LLM model id")
    p_ann.add_argument("--timeout", type=float, default=120.0)
    p_ann.add_argument("--max-retries", type=int, default=2)
    p_ann.add_argument("--temperature", type=float, default=0.0)
    p_ann.add_argument("--out", default=None)
    p_ann.set_defaults(func=_cmd_annotate)

    p_stats = sub.add_parser("stats", help="phase distribution of a structured trace")
    p_stats.add_argument("--input", "-i", required=True)
    p_stats.add_argument("--out", default=None)
    p_stats.set_defaults(func=_cmd_stats)

    p_layout = sub.add_parser("layout", help="compute render-tree geometry")
    p_layout.add_argument("--input", "-i", required=True)
    _add_view_flags(p_layout)
    p_layout.add_argument("--out", default=None)
    p_layout.set_defaults(func=_cmd_layout)

    p_export = sub.add_parser("export", help="export a view as SVG")
    p_export.add_argument("--input", "-i", required=True)
    _add_view_flags(p_export)
    p_export.add_argument("--out", default=None)
    p_export.set_defaults(func=_cmd_export)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--data-dir", default=str(default_data_dir()))
    p_serve.add_argument("--static-dir", default=None, help="UI bundle directory")
    p_serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PipelineError as exc:
        print(f"retrace: {exc}", file=sys.stderr)
        if exc.stage == "separator":
            return EXIT_INPUT
        if exc.stage == "validate":
            return EXIT_VALIDATION
        if isinstance(exc.error, ValueError):
            return EXIT_INPUT
        return EXIT_PROVIDER
    except _PROVIDER_ERRORS as exc:
        print(f"retrace: {exc}", file=sys.stderr)
        return EXIT_PROVIDER
    except _VALIDATION_ERRORS as exc:
        print(f"retrace: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except _INPUT_ERRORS as exc:
        print(f"retrace: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"retrace: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
