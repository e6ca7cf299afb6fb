"""HTTP facade and persistence: run the pipeline on submitted traces, store
the canonical documents content-addressed on disk, and serve stats, layouts,
SVG exports, and the static UI bundle.

The app is a plain WSGI callable so tests drive it in-process; `serve` wraps
it in wsgiref for the CLI. The server owns no UI state: expansion state
travels inside each layout request and records are immutable after write.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import tempfile
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterable
from urllib.parse import parse_qs

from .annotator import (
    AnnotationFailedError,
    ProviderConfig,
    ProviderError,
    Transport,
    ValidationFailedError,
    annotate_heuristic,
    annotate_llm,
    http_transport,
)
from .layout import (
    BadStateError,
    ExpansionState,
    UnknownNodeError,
    ViewKind,
    Viewport,
    layout_spacefill,
    layout_timeline,
    tree_payload,
)
from .model import (
    MalformedDocumentError,
    SchemaViolationError,
    StructuredTrace,
    encode_structured,
    decode_structured,
    validate,
)
from .separator import (
    EmptyTraceError,
    MissingFieldError,
    RawTrace,
    extract_reasoning,
    separate,
)
from .stats import compute_stats, stats_payload
from .svg import export_svg

__all__ = [
    "NotFoundError",
    "PipelineError",
    "TraceRecord",
    "TraceStore",
    "run_pipeline",
    "create_app",
    "serve",
    "default_data_dir",
]

_TRACE_ID_RE = re.compile(r"^[0-9a-f]{64}$")


class NotFoundError(KeyError):
    """No stored trace under this id."""


@dataclass(frozen=True)
class TraceRecord:
    """A stored trace: content-hash id, the decoded trace, and write-time
    metadata. The id is stable across re-submission of identical content."""

    trace_id: str
    structured: StructuredTrace
    created_at: str
    annotator: str


class PipelineError(Exception):
    """A pipeline stage failed; carries which stage and the original error."""

    def __init__(self, stage: str, error: Exception):
        super().__init__(f"{stage}: {error}")
        self.stage = stage
        self.error = error


def default_data_dir() -> Path:
    return Path(os.environ.get("RETRACE_DATA_DIR", "retrace-data"))


class TraceStore:
    """Content-addressed trace documents plus a small index file.

    The trace id is the SHA-256 of the canonical document, so re-submitting
    identical content lands on the same record.
    """

    def __init__(self, data_dir: Path | str):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)

    @property
    def index_path(self) -> Path:
        return self.data_dir / "index.json"

    def _trace_path(self, trace_id: str) -> Path:
        return self.data_dir / f"{trace_id}.json"

    def _write_atomic(self, path: Path, text: str) -> None:
        fd, tmp_name = tempfile.mkstemp(
            dir=self.data_dir, prefix=f".{path.name}.", suffix=".tmp"
        )
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                handle.write(text)
            os.replace(tmp_name, path)
        except BaseException:
            if os.path.exists(tmp_name):
                os.unlink(tmp_name)
            raise

    def _read_index(self) -> dict:
        if not self.index_path.exists():
            return {}
        return json.loads(self.index_path.read_text(encoding="utf-8"))

    def save(self, structured: StructuredTrace) -> str:
        document = encode_structured(structured)
        trace_id = hashlib.sha256(document.encode("utf-8")).hexdigest()
        path = self._trace_path(trace_id)
        if not path.exists():
            self._write_atomic(path, document)
            index = self._read_index()
            index[trace_id] = {
                "created_at": datetime.now(timezone.utc).isoformat(),
                "annotator": structured.provenance.value,
                "step_count": structured.step_count,
                "question": structured.source.question,
            }
            self._write_atomic(
                self.index_path, json.dumps(index, indent=2, sort_keys=True) + "\n"
            )
        return trace_id

    def document(self, trace_id: str) -> str:
        if not _TRACE_ID_RE.match(trace_id):
            raise NotFoundError(trace_id)
        path = self._trace_path(trace_id)
        if not path.exists():
            raise NotFoundError(trace_id)
        return path.read_text(encoding="utf-8")

    def load(self, trace_id: str) -> StructuredTrace:
        return decode_structured(self.document(trace_id))

    def record(self, trace_id: str) -> TraceRecord:
        structured = self.load(trace_id)
        entry = self._read_index().get(trace_id, {})
        return TraceRecord(
            trace_id=trace_id,
            structured=structured,
            created_at=entry.get("created_at", ""),
            annotator=entry.get("annotator", structured.provenance.value),
        )

    def ids(self) -> dict:
        return self._read_index()


def _ingest(
    body_text: str,
    field_path: str | None,
    question: str,
    final_answer: str,
    source_model: str,
) -> RawTrace:
    """Choose extraction mode: explicit path, explicit passthrough (empty
    path), or auto (JSON objects go through the default provider path,
    anything else is treated as plain trace text)."""
    if field_path is None:
        try:
            payload = json.loads(body_text)
        except json.JSONDecodeError:
            payload = None
        if not isinstance(payload, dict):
            return RawTrace(
                text=body_text,
                question=question,
                final_answer=final_answer,
                source_model=source_model,
            )
        return extract_reasoning(
            body_text,
            question=question,
            final_answer=final_answer,
            source_model=source_model,
        )
    return extract_reasoning(
        body_text,
        field_path,
        question=question,
        final_answer=final_answer,
        source_model=source_model,
    )


def run_pipeline(
    body_text: str,
    *,
    backend: str = "heuristic",
    field_path: str | None = None,
    question: str = "",
    final_answer: str = "",
    source_model: str = "",
    provider: ProviderConfig | None = None,
    transport: Transport | None = None,
) -> StructuredTrace:
    """separate -> annotate -> validate, with stage attribution on failure."""
    try:
        raw = _ingest(body_text, field_path, question, final_answer, source_model)
        stepped = separate(raw)
    except (EmptyTraceError, MissingFieldError, MalformedDocumentError) as exc:
        raise PipelineError("separator", exc) from exc

    if backend not in ("heuristic", "llm"):
        raise PipelineError("annotator", ValueError(f"unknown backend {backend!r}"))
    try:
        if backend == "heuristic":
            structured = annotate_heuristic(stepped)
        else:
            cfg = provider or ProviderConfig()
            chosen = transport
            if chosen is None:
                if not cfg.endpoint:
                    raise ProviderError("no provider endpoint configured", 0)
                chosen = http_transport
            structured = annotate_llm(stepped, cfg, chosen)
    except (ProviderError, AnnotationFailedError) as exc:
        raise PipelineError("annotator", exc) from exc

    report = validate(structured, stepped)
    if not report.ok:
        raise PipelineError("validate", ValidationFailedError(report))
    return structured


# --------------------------------------------------------------------------
# WSGI app
# --------------------------------------------------------------------------

_PLACEHOLDER_PAGE = """<!DOCTYPE html>
<html><head><meta charset="utf-8"><title>retrace</title></head>
<body>
<h1>retrace service</h1>
<p>No UI bundle is mounted. The JSON API lives under <code>/api/traces</code>.</p>
</body></html>
"""

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".mjs": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".svg": "image/svg+xml",
    ".map": "application/json",
    ".ico": "image/x-icon",
    ".png": "image/png",
}

_TRACE_PATH_RE = re.compile(
    r"^/api/traces/(?P<trace_id>[0-9a-fA-F]+)(?P<rest>/stats|/layout|/export\.svg)?$"
)

Response = tuple[str, list[tuple[str, str]], bytes]
StartResponse = Callable[[str, list[tuple[str, str]]], object]


def _json_response(status: str, payload: dict) -> Response:
    body = json.dumps(payload, indent=2, sort_keys=True).encode("utf-8")
    return status, [("Content-Type", "application/json")], body


def _error(status: str, error: str, detail: str, **extra: object) -> Response:
    payload: dict = {"error": error, "detail": detail}
    payload.update(extra)
    return _json_response(status, payload)


def _read_body(environ: dict) -> bytes:
    try:
        length = int(environ.get("CONTENT_LENGTH") or 0)
    except ValueError:
        length = 0
    if length <= 0:
        return b""
    return environ["wsgi.input"].read(length)


def _query(environ: dict) -> dict[str, str]:
    parsed = parse_qs(environ.get("QUERY_STRING", ""), keep_blank_values=True)
    return {key: values[0] for key, values in parsed.items()}


def _pipeline_error_response(exc: PipelineError) -> Response:
    detail = str(exc.error)
    name = type(exc.error).__name__.removesuffix("Error")
    if exc.stage == "separator":
        return _error("400 Bad Request", name, detail, stage=exc.stage)
    if exc.stage == "validate":
        return _error("422 Unprocessable Entity", name, detail, stage=exc.stage)
    if isinstance(exc.error, ValueError):
        return _error("400 Bad Request", name, detail, stage=exc.stage)
    return _error("502 Bad Gateway", name, detail, stage=exc.stage)


def _layout_for(
    structured: StructuredTrace, view: str, state: ExpansionState, vp: Viewport
):
    if view == ViewKind.SPACE_FILL.value:
        return layout_spacefill(structured, state, vp)
    if view == ViewKind.TIMELINE.value:
        return layout_timeline(structured, state, vp)
    raise BadStateError(f"unknown view {view!r}")


def _parse_state(raw: object) -> ExpansionState:
    if raw is None:
        return ExpansionState()
    if not isinstance(raw, dict):
        raise BadStateError("state must be an object")
    phase = raw.get("expanded_phase")
    sub = raw.get("expanded_subphase")
    if phase is not None and not isinstance(phase, int):
        raise BadStateError("expanded_phase must be an integer or null")
    if sub is not None and not isinstance(sub, str):
        raise BadStateError("expanded_subphase must be a string or null")
    return ExpansionState(expanded_phase=phase, expanded_subphase=sub)


def _parse_viewport(raw: object) -> Viewport:
    if raw is None:
        return Viewport(1200.0, 800.0)
    if not isinstance(raw, dict):
        raise BadStateError("viewport must be an object")
    try:
        return Viewport(float(raw.get("width", 1200)), float(raw.get("height", 800)))
    except (TypeError, ValueError) as exc:
        raise BadStateError(f"bad viewport: {exc}") from exc


def create_app(
    store: TraceStore,
    *,
    provider: ProviderConfig | None = None,
    transport: Transport | None = None,
    static_dir: Path | str | None = None,
):
    """Build the WSGI application over one trace store.

    `transport` overrides the LLM backend transport (tests inject recorded
    fixtures); `static_dir` mounts a built UI bundle at the root.
    """
    static_root = Path(static_dir).resolve() if static_dir else None

    def handle_submit(environ: dict) -> Response:
        query = _query(environ)
        try:
            body_text = _read_body(environ).decode("utf-8")
        except UnicodeDecodeError:
            return _error("400 Bad Request", "BadEncoding", "body must be UTF-8")
        try:
            structured = run_pipeline(
                body_text,
                backend=query.get("backend", "heuristic"),
                field_path=query.get("field_path"),
                question=query.get("question", ""),
                final_answer=query.get("final_answer", ""),
                source_model=query.get("source_model", ""),
                provider=provider,
                transport=transport,
            )
        except PipelineError as exc:
            return _pipeline_error_response(exc)
        trace_id = store.save(structured)
        return _json_response("200 OK", {"trace_id": trace_id})

    def handle_get_document(trace_id: str) -> Response:
        document = store.document(trace_id)
        return "200 OK", [("Content-Type", "application/json")], document.encode("utf-8")

    def handle_stats(trace_id: str) -> Response:
        structured = store.load(trace_id)
        return _json_response("200 OK", stats_payload(compute_stats(structured)))

    def handle_layout(trace_id: str, environ: dict) -> Response:
        structured = store.load(trace_id)
        raw_body = _read_body(environ)
        try:
            payload = json.loads(raw_body.decode("utf-8")) if raw_body else {}
        except (json.JSONDecodeError, UnicodeDecodeError):
            return _error("400 Bad Request", "MalformedDocument", "body must be JSON")
        if not isinstance(payload, dict):
            return _error("400 Bad Request", "MalformedDocument", "body must be an object")
        view = payload.get("view", ViewKind.SPACE_FILL.value)
        try:
            state = _parse_state(payload.get("state"))
            vp = _parse_viewport(payload.get("viewport"))
            tree = _layout_for(structured, view, state, vp)
        except (BadStateError, ValueError) as exc:
            return _error("400 Bad Request", "BadState", str(exc))
        return _json_response("200 OK", tree_payload(tree))

    def handle_export(trace_id: str, environ: dict) -> Response:
        structured = store.load(trace_id)
        query = _query(environ)
        view = query.get("view", ViewKind.SPACE_FILL.value)
        try:
            vp = Viewport(
                float(query.get("width", 1200)), float(query.get("height", 800))
            )
            phase = query.get("expanded_phase")
            state = ExpansionState(
                expanded_phase=int(phase) if phase not in (None, "") else None,
                expanded_subphase=query.get("expanded_subphase") or None,
            )
            tree = _layout_for(structured, view, state, vp)
        except (BadStateError, ValueError) as exc:
            return _error("400 Bad Request", "BadState", str(exc))
        body = export_svg(tree).encode("utf-8")
        return "200 OK", [("Content-Type", "image/svg+xml")], body

    def handle_static(path: str) -> Response:
        if static_root is None:
            if path in ("/", "/index.html"):
                return (
                    "200 OK",
                    [("Content-Type", "text/html; charset=utf-8")],
                    _PLACEHOLDER_PAGE.encode("utf-8"),
                )
            raise NotFoundError(path)
        relative = "index.html" if path == "/" else path.lstrip("/")
        candidate = (static_root / relative).resolve()
        if not str(candidate).startswith(str(static_root)) or not candidate.is_file():
            raise NotFoundError(path)
        content_type = _CONTENT_TYPES.get(candidate.suffix, "application/octet-stream")
        return "200 OK", [("Content-Type", content_type)], candidate.read_bytes()

    def dispatch(environ: dict) -> Response:
        method = environ.get("REQUEST_METHOD", "GET")
        path = environ.get("PATH_INFO", "/")

        if path == "/api/traces":
            if method != "POST":
                return _error("405 Method Not Allowed", "MethodNotAllowed", path)
            return handle_submit(environ)

        match = _TRACE_PATH_RE.match(path)
        if match:
            trace_id = match.group("trace_id").lower()
            rest = match.group("rest")
            if rest is None and method == "GET":
                return handle_get_document(trace_id)
            if rest == "/stats" and method == "GET":
                return handle_stats(trace_id)
            if rest == "/layout" and method == "POST":
                return handle_layout(trace_id, environ)
            if rest == "/export.svg" and method == "GET":
                return handle_export(trace_id, environ)
            return _error("405 Method Not Allowed", "MethodNotAllowed", path)

        if method == "GET":
            return handle_static(path)
        return _error("405 Method Not Allowed", "MethodNotAllowed", path)

    def app(environ: dict, start_response: StartResponse) -> Iterable[bytes]:
        try:
            status, headers, body = dispatch(environ)
        except NotFoundError as exc:
            status, headers, body = _error(
                "404 Not Found", "NotFound", str(exc).strip("'")
            )
        except (MalformedDocumentError, SchemaViolationError) as exc:
            status, headers, body = _error(
                "500 Internal Server Error", "CorruptRecord", str(exc)
            )
        headers = headers + [("Content-Length", str(len(body)))]
        start_response(status, headers)
        return [body]

    return app


def serve(
    store: TraceStore,
    host: str = "127.0.0.1",
    port: int = 8000,
    *,
    provider: ProviderConfig | None = None,
    static_dir: Path | str | None = None,
) -> None:
    """Run the app under wsgiref until interrupted."""
    from wsgiref.simple_server import make_server

    app = create_app(store, provider=provider, static_dir=static_dir)
    with make_server(host, port, app) as httpd:
        print(f"retrace service on http://{host}:{port}/ (data: {store.data_dir})")
        httpd.serve_forever()
