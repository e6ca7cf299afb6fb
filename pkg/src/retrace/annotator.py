"""Stage two of the pipeline: turn a stepped trace into a structured trace.

Two interchangeable backends:

* an external-LLM backend (prompt build -> transport -> parse -> repair ->
  reconcile, with retries), where the transport is injected so tests run
  against recorded response fixtures, and
* a deterministic heuristic backend driven by taxonomy cue phrases and a
  monotone phase cursor, so the whole pipeline works offline.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from enum import Enum
from typing import Callable

from .model import (
    MANDATORY_PHASE_MIN_STEPS,
    PhaseGroup,
    Provenance,
    SchemaViolationError,
    SteppedTrace,
    StructuredTrace,
    Subphase,
    ValidationReport,
    _expect,
    _get,
    subphase_id,
    validate,
)
from .prompt import PROMPT_SLOT, PROMPT_TEMPLATE
from .taxonomy import (
    Phase,
    Subcategory,
    UnknownSubcategoryError,
    bears_cue,
    find_cue_match,
    resolve_subcategory,
)

__all__ = [
    "PhaseCursor",
    "StepPosition",
    "classify_step",
    "summarize",
    "annotate_heuristic",
    "SkeletonSubphase",
    "AnnotationSkeleton",
    "build_prompt",
    "parse_annotation",
    "repair",
    "reconcile",
    "annotate_llm",
    "ProviderConfig",
    "NoJsonFoundError",
    "IrreparableError",
    "ValidationFailedError",
    "ProviderError",
    "AnnotationFailedError",
    "http_transport",
]

logger = logging.getLogger(__name__)

SUMMARY_MAX_CHARS = 140
_ELLIPSIS = "..."


# --------------------------------------------------------------------------
# heuristic backend
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PhaseCursor:
    """Lowest phase still eligible for classification. Never decreases."""

    current: int = 0

    def advanced_to(self, ordinal: int) -> "PhaseCursor":
        return PhaseCursor(max(self.current, ordinal))


class StepPosition(Enum):
    FIRST = "first"
    MIDDLE = "middle"
    LAST = "last"


_CONTINUATION_DEFAULTS = {
    0: Subcategory.REPHRASE,
    1: Subcategory.DECOMPOSITION_EXECUTION,
    2: Subcategory.RE_EXAMINE,
    3: Subcategory.PREPARING_OUTPUT,
}


def classify_step(
    text: str, cursor: PhaseCursor, position: StepPosition
) -> tuple[Subcategory, PhaseCursor]:
    """Assign one subcategory to a step and advance the phase cursor.

    The first step is pinned to the opening phase: only its cues are
    scanned, and when none anchor it the window closes immediately (the
    cursor moves on to exploration). The last step is forced into the final
    phase unless a final-phase cue already put it there. In between, cues are
    scanned in priority order (later phases first) over subcategories whose
    parent phase is at or past the cursor; a cue-less step continues its
    phase with that phase's default action.
    """
    if position is StepPosition.FIRST:
        match = find_cue_match(text, min_phase=0, max_phase=0)
        if match is not None:
            return match, cursor
        return Subcategory.REPHRASE, cursor.advanced_to(1)

    match = find_cue_match(text, min_phase=cursor.current, max_phase=3)
    if match is not None:
        sub, new_cursor = match, cursor.advanced_to(match.parent.ordinal)
    else:
        sub, new_cursor = _CONTINUATION_DEFAULTS[cursor.current], cursor

    if position is StepPosition.LAST and sub.parent.ordinal < 3:
        return Subcategory.PREPARING_OUTPUT, cursor.advanced_to(3)
    return sub, new_cursor


def summarize(steps: list[str] | tuple[str, ...], subcategory: Subcategory) -> str:
    """Extractive summary: first sentence of the first step, capped at 140
    characters. The subcategory is part of the call contract so alternative
    summarizers can specialize; the extractive one ignores it."""
    del subcategory
    if not steps:
        raise ValueError("cannot summarize zero steps")
    text = steps[0].strip()
    for idx, ch in enumerate(text):
        if ch in ".?!":
            text = text[: idx + 1]
            break
    if len(text) > SUMMARY_MAX_CHARS:
        text = text[: SUMMARY_MAX_CHARS - len(_ELLIPSIS)] + _ELLIPSIS
    return text


def _phase0_fill_label(text: str) -> Subcategory:
    if bears_cue(text, Subcategory.FIRST_ANSWER):
        return Subcategory.FIRST_ANSWER
    return Subcategory.DECOMPOSITION_EXECUTION


def _fill_exploration_phase(
    steps: tuple[str, ...], labels: list[Subcategory]
) -> list[Subcategory]:
    """Guarantee the exploration phase is non-empty for 4+ step traces.

    Preference order: reassign the cue-less tail of the opening run (those
    steps were only defaults), else promote the boundary step right after the
    opening run. Promoted steps become FirstAnswer when they bear its cue,
    Decomposition & Execution otherwise.
    """
    labels = list(labels)
    n = len(labels)
    run0_end = 0
    while run0_end + 1 < n and labels[run0_end + 1].parent.ordinal == 0:
        run0_end += 1

    tail_start = run0_end + 1
    for i in range(run0_end, 0, -1):
        if bears_cue(steps[i], Subcategory.REPHRASE) or bears_cue(
            steps[i], Subcategory.DEFINE_GOAL
        ):
            break
        tail_start = i
    if tail_start <= run0_end:
        for i in range(tail_start, run0_end + 1):
            labels[i] = _phase0_fill_label(steps[i])
        return labels

    boundary = run0_end + 1
    if boundary >= n - 1:
        # stealing the forced last step would empty the final phase;
        # take the closing step of the opening run instead
        boundary = run0_end
    labels[boundary] = _phase0_fill_label(steps[boundary])
    return labels


def annotate_heuristic(stepped: SteppedTrace) -> StructuredTrace:
    """Deterministic cue-phrase annotation. Output always passes validation."""
    n = stepped.step_count
    if n == 0:
        raise ValueError("cannot annotate a trace with no steps")

    if n == 1:
        labels = [Subcategory.PREPARING_OUTPUT]
    else:
        labels = []
        cursor = PhaseCursor(0)
        for i, text in enumerate(stepped.steps):
            if i == 0:
                position = StepPosition.FIRST
            elif i == n - 1:
                position = StepPosition.LAST
            else:
                position = StepPosition.MIDDLE
            sub, cursor = classify_step(text, cursor, position)
            labels.append(sub)
        if n >= MANDATORY_PHASE_MIN_STEPS and not any(
            s.parent.ordinal == 1 for s in labels
        ):
            labels = _fill_exploration_phase(stepped.steps, labels)

    runs: list[tuple[Subcategory, list[int]]] = []
    for i, sub in enumerate(labels):
        if runs and runs[-1][0] is sub:
            runs[-1][1].append(i)
        else:
            runs.append((sub, [i]))

    groups: dict[int, list[Subphase]] = {0: [], 1: [], 2: [], 3: []}
    for k, (sub, indices) in enumerate(runs, start=1):
        run_steps = [stepped.steps[i] for i in indices]
        groups[sub.parent.ordinal].append(
            Subphase(
                id=subphase_id(k),
                subcategory=sub,
                summary=summarize(run_steps, sub),
                step_indices=tuple(indices),
            )
        )

    phase_groups = []
    for phase in Phase:
        subs = tuple(groups[phase.ordinal])
        if subs:
            phase_steps = [
                stepped.steps[i] for s in subs for i in s.step_indices
            ]
            summary = summarize(phase_steps, subs[0].subcategory)
        else:
            summary = ""
        phase_groups.append(
            PhaseGroup(phase=phase, main_phase_summary=summary, subphases=subs)
        )

    structured = StructuredTrace(
        groups=tuple(phase_groups),
        step_count=n,
        provenance=Provenance.HEURISTIC_ANNOTATED,
        source=stepped,
    )
    report = validate(structured, stepped)
    if not report.ok:
        raise RuntimeError(
            f"heuristic annotation produced an invalid trace: {report.describe()}"
        )
    return structured


# --------------------------------------------------------------------------
# LLM backend
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SkeletonSubphase:
    """Subphase as parsed from an annotation response: label still raw text,
    indices not yet trusted."""

    id: str
    label: str
    summary: str
    step_indices: tuple[int, ...]
    reference_subphase_id: str | None = None


@dataclass(frozen=True)
class AnnotationSkeleton:
    """A structured trace before verbatim steps are attached and before any
    semantic invariant is guaranteed."""

    phase_summaries: tuple[str, str, str, str]
    subphases: tuple[tuple[SkeletonSubphase, ...], ...]

    def flattened(self) -> tuple[tuple[int, SkeletonSubphase], ...]:
        """(phase ordinal, subphase) pairs in document order."""
        out: list[tuple[int, SkeletonSubphase]] = []
        for ordinal, subs in enumerate(self.subphases):
            out.extend((ordinal, s) for s in subs)
        return tuple(out)


class NoJsonFoundError(ValueError):
    """The response text contains no parseable JSON object."""


class IrreparableError(ValueError):
    """Index repair cannot restore a valid phase ordering."""


class ValidationFailedError(ValueError):
    """A reconciled trace still violates structural invariants."""

    def __init__(self, report: ValidationReport):
        super().__init__(report.describe())
        self.report = report


def build_prompt(stepped: SteppedTrace) -> str:
    """Render the annotation system prompt for one stepped trace."""
    payload = {
        "question": stepped.question,
        "reasoning_steps": list(stepped.steps),
    }
    return PROMPT_TEMPLATE.replace(
        PROMPT_SLOT, json.dumps(payload, ensure_ascii=False)
    )


def _first_json_object(response: str) -> dict:
    decoder = json.JSONDecoder()
    for match in re.finditer(r"\{", response):
        try:
            obj, _ = decoder.raw_decode(response, match.start())
        except json.JSONDecodeError:
            continue
        if isinstance(obj, dict):
            return obj
    raise NoJsonFoundError("response contains no JSON object")


def _decode_skeleton_subphase(obj: object, path: str) -> SkeletonSubphase:
    _expect(obj, dict, path)
    assert isinstance(obj, dict)
    raw_indices = _get(obj, "step_indices", list, path)
    indices = tuple(
        _expect(v, int, f"{path}.step_indices[{i}]") for i, v in enumerate(raw_indices)
    )
    ref = obj.get("reference_subphase_id")
    if ref is not None:
        ref = _expect(ref, str, f"{path}.reference_subphase_id")
    return SkeletonSubphase(
        id=_get(obj, "id", str, path),
        label=_get(obj, "subcategory", str, path),
        summary=_get(obj, "summary", str, path),
        step_indices=indices,
        reference_subphase_id=ref,
    )


def parse_annotation(response: str) -> AnnotationSkeleton:
    """Extract and schema-check the first JSON object in a response.

    Code fences and surrounding prose are tolerated; subcategory labels stay
    raw for later alias resolution.
    """
    payload = _first_json_object(response)
    if "reasoning_analysis" not in payload:
        raise SchemaViolationError("reasoning_analysis")
    analysis = _expect(payload["reasoning_analysis"], dict, "reasoning_analysis")

    summaries: list[str] = []
    per_phase: list[tuple[SkeletonSubphase, ...]] = []
    for phase in Phase:
        child_path = f"reasoning_analysis.{phase.json_key}"
        child = _get(analysis, phase.json_key, dict, "reasoning_analysis")
        summaries.append(_get(child, "main_phase_summary", str, child_path))
        raw_subs = _get(child, "subphases", list, child_path)
        per_phase.append(
            tuple(
                _decode_skeleton_subphase(s, f"{child_path}.subphases[{i}]")
                for i, s in enumerate(raw_subs)
            )
        )
    return AnnotationSkeleton(
        phase_summaries=(summaries[0], summaries[1], summaries[2], summaries[3]),
        subphases=tuple(per_phase),
    )


def repair(skeleton: AnnotationSkeleton, step_count: int) -> AnnotationSkeleton:
    """Coerce a skeleton into a partition of [0, step_count) with consecutive
    runs, or raise IrreparableError when phase order cannot survive.

    In order: out-of-range indices are discarded; an index claimed by several
    subphases stays with the earliest claimant in document order; each
    subphase is trimmed to its first consecutive run; unassigned indices are
    appended to the subphase owning the preceding index (the leading gap, if
    any, is prepended to the earliest-claiming subphase); emptied subphases
    are dropped and ids renumbered. Summaries are never rewritten; every
    index move is logged instead.
    """
    flat = skeleton.flattened()
    if not flat:
        raise IrreparableError("skeleton contains no subphases")
    if step_count <= 0:
        raise IrreparableError("step count must be positive")

    adjustments: list[str] = []
    cleaned: list[list[int]] = []
    for _, sub in flat:
        in_range = sorted({i for i in sub.step_indices if 0 <= i < step_count})
        if len(in_range) != len(sub.step_indices):
            adjustments.append(f"{sub.id}: discarded out-of-range or duplicate indices")
        cleaned.append(in_range)

    claim: list[int | None] = [None] * step_count
    for s_idx, indices in enumerate(cleaned):
        for i in indices:
            if claim[i] is None:
                claim[i] = s_idx
            else:
                adjustments.append(
                    f"{flat[s_idx][1].id}: index {i} kept by earlier "
                    f"{flat[claim[i]][1].id}"
                )

    # trim every subphase to its first consecutive run of surviving claims
    for s_idx in range(len(flat)):
        owned = [i for i in range(step_count) if claim[i] == s_idx]
        if not owned:
            continue
        run_end = owned[0]
        for i in owned[1:]:
            if i == run_end + 1:
                run_end = i
            else:
                break
        for i in owned:
            if i > run_end:
                claim[i] = None
                adjustments.append(
                    f"{flat[s_idx][1].id}: index {i} detached from a split run"
                )

    if all(c is None for c in claim):
        raise IrreparableError("no subphase claims any in-range step index")

    first_claimed = next(i for i in range(step_count) if claim[i] is not None)
    for i in range(step_count):
        if claim[i] is not None:
            continue
        owner = claim[i - 1] if i > 0 else claim[first_claimed]
        claim[i] = owner
        adjustments.append(f"index {i} filled into {flat[owner][1].id}")  # type: ignore[index]

    ordinal_sequence = [flat[c][0] for c in claim]  # type: ignore[index]
    for prev, cur in zip(ordinal_sequence, ordinal_sequence[1:]):
        if cur < prev:
            raise IrreparableError(
                f"phase order inverts (phase {prev} followed by phase {cur})"
            )

    if adjustments:
        logger.info("repair adjusted %d assignment(s): %s", len(adjustments),
                    "; ".join(adjustments))

    surviving: list[tuple[int, SkeletonSubphase, list[int]]] = []
    for s_idx, (ordinal, sub) in enumerate(flat):
        owned = [i for i in range(step_count) if claim[i] == s_idx]
        if owned:
            surviving.append((ordinal, sub, owned))
    surviving.sort(key=lambda item: item[2][0])

    per_phase: list[list[SkeletonSubphase]] = [[], [], [], []]
    for k, (ordinal, sub, owned) in enumerate(surviving, start=1):
        per_phase[ordinal].append(
            SkeletonSubphase(
                id=subphase_id(k),
                label=sub.label,
                summary=sub.summary,
                step_indices=tuple(owned),
                reference_subphase_id=sub.reference_subphase_id,
            )
        )
    return AnnotationSkeleton(
        phase_summaries=skeleton.phase_summaries,
        subphases=tuple(tuple(subs) for subs in per_phase),
    )


def reconcile(skeleton: AnnotationSkeleton, stepped: SteppedTrace) -> StructuredTrace:
    """Resolve labels, attach verbatim steps, and validate.

    Raises UnknownSubcategoryError for unresolvable labels and
    ValidationFailedError when the assembled trace breaks an invariant.
    """
    groups = []
    for phase in Phase:
        subs = tuple(
            Subphase(
                id=s.id,
                subcategory=resolve_subcategory(s.label),
                summary=s.summary,
                step_indices=s.step_indices,
                reference_subphase_id=s.reference_subphase_id,
            )
            for s in skeleton.subphases[phase.ordinal]
        )
        groups.append(
            PhaseGroup(
                phase=phase,
                main_phase_summary=skeleton.phase_summaries[phase.ordinal],
                subphases=subs,
            )
        )
    structured = StructuredTrace(
        groups=tuple(groups),
        step_count=stepped.step_count,
        provenance=Provenance.LLM_ANNOTATED,
        source=stepped,
    )
    report = validate(structured, stepped)
    if not report.ok:
        raise ValidationFailedError(report)
    return structured


@dataclass(frozen=True)
class ProviderConfig:
    """Connection settings for the annotation LLM endpoint."""

    endpoint: str = ""
    model: str = ""
    credential: str = ""
    timeout: float = 120.0
    max_retries: int = 2
    temperature: float = 0.0

    def __post_init__(self) -> None:
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")


Transport = Callable[[str, ProviderConfig], str]


class ProviderError(RuntimeError):
    """The transport kept failing; no usable response was ever received."""

    def __init__(self, message: str, attempts: int):
        super().__init__(message)
        self.attempts = attempts


class AnnotationFailedError(RuntimeError):
    """Responses arrived but none survived parse/repair/reconcile."""

    def __init__(self, message: str, attempts: int):
        super().__init__(message)
        self.attempts = attempts


_RETRYABLE = (
    NoJsonFoundError,
    SchemaViolationError,
    IrreparableError,
    UnknownSubcategoryError,
    ValidationFailedError,
)


def annotate_llm(
    stepped: SteppedTrace, cfg: ProviderConfig, transport: Transport
) -> StructuredTrace:
    """Run the LLM annotation ladder with retries on the identical prompt."""
    prompt = build_prompt(stepped)
    attempts = 0
    last_exc: Exception | None = None
    transport_failed = False

    for attempt in range(cfg.max_retries + 1):
        attempts = attempt + 1
        try:
            response = transport(prompt, cfg)
        except Exception as exc:  # transport failures are opaque to us
            logger.warning("transport failed on attempt %d: %s", attempts, exc)
            last_exc, transport_failed = exc, True
            continue
        try:
            structured = reconcile(
                repair(parse_annotation(response), stepped.step_count), stepped
            )
        except _RETRYABLE as exc:
            logger.warning("annotation attempt %d rejected: %s", attempts, exc)
            last_exc, transport_failed = exc, False
            continue
        logger.info("annotation succeeded after %d attempt(s)", attempts)
        return structured

    if transport_failed:
        raise ProviderError(
            f"provider transport failed on all {attempts} attempts: {last_exc}",
            attempts,
        ) from last_exc
    raise AnnotationFailedError(
        f"no valid annotation after {attempts} attempts: {last_exc}", attempts
    ) from last_exc


def http_transport(prompt: str, cfg: ProviderConfig) -> str:
    """Minimal chat-completions transport for OpenAI-compatible endpoints."""
    import urllib.request

    body = json.dumps(
        {
            "model": cfg.model,
            "temperature": cfg.temperature,
            "messages": [{"role": "user", "content": prompt}],
        }
    ).encode("utf-8")
    request = urllib.request.Request(
        cfg.endpoint,
        data=body,
        headers={
            "Content-Type": "application/json",
            "Authorization": f"Bearer {cfg.credential}",
        },
    )
    with urllib.request.urlopen(request, timeout=cfg.timeout) as response:
        payload = json.loads(response.read().decode("utf-8"))
    return payload["choices"][0]["message"]["content"]
