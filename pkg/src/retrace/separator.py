"""Stage one of the pipeline: pull raw reasoning text out of a provider
response document and split it into indexed steps.

Splitting is deliberately dumb: newline-delimited, trimmed, blanks dropped.
Everything smarter (sentence segmentation, token counting) is out of scope.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Any

from .model import MalformedDocumentError, SteppedTrace

__all__ = [
    "RawTrace",
    "EmptyTraceError",
    "MissingFieldError",
    "DEFAULT_REASONING_PATH",
    "DEFAULT_ANSWER_PATH",
    "DEFAULT_QUESTION_PATHS",
    "separate",
    "extract_reasoning",
]

DEFAULT_REASONING_PATH = "choices[0].message.reasoning_content"
DEFAULT_ANSWER_PATH = "choices[0].message.content"
# Question is only present when the provider echoes the request; probe a few
# common shapes and fall back to empty (callers may supply it explicitly).
DEFAULT_QUESTION_PATHS = (
    "question",
    "request.messages[-1].content",
    "messages[-1].content",
)


@dataclass(frozen=True)
class RawTrace:
    """The undivided reasoning monologue plus task metadata."""

    text: str
    question: str = ""
    final_answer: str = ""
    source_model: str = ""


class EmptyTraceError(ValueError):
    """No non-empty reasoning content survived splitting."""


class MissingFieldError(KeyError):
    """A field path did not resolve inside the provider document."""

    def __init__(self, field_path: str, detail: str = ""):
        message = field_path if not detail else f"{field_path} ({detail})"
        super().__init__(message)
        self.field_path = field_path


def separate(raw: RawTrace) -> SteppedTrace:
    """Split the monologue on newlines into trimmed, non-empty steps."""
    normalized = raw.text.replace("\r\n", "\n").replace("\r", "\n")
    steps = tuple(piece.strip() for piece in normalized.split("\n") if piece.strip())
    if not steps:
        raise EmptyTraceError("reasoning text contains no non-empty lines")
    return SteppedTrace(
        steps=steps,
        question=raw.question,
        final_answer=raw.final_answer,
        source_model=raw.source_model,
    )


_SEGMENT_RE = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)((?:\[-?\d+\])*)$")
_INDEX_RE = re.compile(r"\[(-?\d+)\]")


def _walk_path(payload: Any, field_path: str) -> Any:
    """Evaluate a dot/bracket path like ``choices[0].message.content``."""
    current = payload
    for segment in field_path.split("."):
        match = _SEGMENT_RE.match(segment)
        if match is None:
            raise MissingFieldError(field_path, f"bad path segment {segment!r}")
        name, brackets = match.group(1), match.group(2)
        if not isinstance(current, dict) or name not in current:
            raise MissingFieldError(field_path, f"no key {name!r}")
        current = current[name]
        for index_text in _INDEX_RE.findall(brackets):
            index = int(index_text)
            if not isinstance(current, list):
                raise MissingFieldError(field_path, f"{name!r} is not an array")
            try:
                current = current[index]
            except IndexError:
                raise MissingFieldError(
                    field_path, f"index {index} out of range in {name!r}"
                ) from None
    return current


def _probe(payload: Any, field_path: str) -> str:
    try:
        value = _walk_path(payload, field_path)
    except MissingFieldError:
        return ""
    return value if isinstance(value, str) else ""


def extract_reasoning(
    document: str,
    field_path: str = DEFAULT_REASONING_PATH,
    *,
    question: str = "",
    final_answer: str = "",
    source_model: str = "",
    answer_path: str = DEFAULT_ANSWER_PATH,
    question_paths: tuple[str, ...] = DEFAULT_QUESTION_PATHS,
) -> RawTrace:
    """Build a RawTrace from a provider response document.

    With ``field_path=""`` the whole document is taken verbatim as the
    reasoning text (plain-text ingestion). Otherwise the document must parse
    as JSON and the path must resolve to a string; companion fields
    (question, answer, model id) are probed softly and explicit keyword
    values win over probed ones.
    """
    if field_path == "":
        return RawTrace(
            text=document,
            question=question,
            final_answer=final_answer,
            source_model=source_model,
        )

    try:
        payload = json.loads(document)
    except json.JSONDecodeError as exc:
        raise MalformedDocumentError(
            f"provider document is not valid JSON: {exc}"
        ) from exc

    text = _walk_path(payload, field_path)
    if not isinstance(text, str):
        raise MissingFieldError(field_path, "path does not resolve to text")

    if not final_answer:
        final_answer = _probe(payload, answer_path)
    if not question:
        for candidate in question_paths:
            question = _probe(payload, candidate)
            if question:
                break
    if not source_model:
        source_model = _probe(payload, "model")

    return RawTrace(
        text=text,
        question=question,
        final_answer=final_answer,
        source_model=source_model,
    )
