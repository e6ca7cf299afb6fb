"""Domain types for structured reasoning traces, plus validation and the
canonical JSON document form.

A structured trace partitions the 0-indexed steps of a stepped trace into
subphases (consecutive index runs with one subcategory each), grouped under
the four fixed phases. `validate` reports every broken invariant instead of
stopping at the first; `encode_structured`/`decode_structured` are exact
inverses on validated traces and byte-deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Any

from .taxonomy import Phase, Subcategory, resolve_subcategory

__all__ = [
    "SteppedTrace",
    "Subphase",
    "PhaseGroup",
    "Provenance",
    "StructuredTrace",
    "ViolationCode",
    "Violation",
    "ValidationReport",
    "StepCountMismatchError",
    "MalformedDocumentError",
    "SchemaViolationError",
    "validate",
    "decode_structured",
    "encode_structured",
    "subphase_id",
]

MANDATORY_PHASE_MIN_STEPS = 4  # below this, empty mandatory phases are tolerated


@dataclass(frozen=True)
class SteppedTrace:
    """Indexed verbatim reasoning steps plus task metadata."""

    steps: tuple[str, ...]
    question: str = ""
    final_answer: str = ""
    source_model: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "steps", tuple(self.steps))

    @property
    def step_count(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class Subphase:
    """A run of consecutive steps performing one fine-grained action.

    `reference_subphase_id` is opaque pass-through metadata; it is preserved
    on decode/encode but never interpreted.
    """

    id: str
    subcategory: Subcategory
    summary: str
    step_indices: tuple[int, ...]
    reference_subphase_id: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "step_indices", tuple(self.step_indices))

    @property
    def first_index(self) -> int:
        return min(self.step_indices)

    @property
    def last_index(self) -> int:
        return max(self.step_indices)


@dataclass(frozen=True)
class PhaseGroup:
    phase: Phase
    main_phase_summary: str
    subphases: tuple[Subphase, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "subphases", tuple(self.subphases))

    @property
    def step_count(self) -> int:
        return sum(len(s.step_indices) for s in self.subphases)

    @property
    def step_indices(self) -> tuple[int, ...]:
        out: list[int] = []
        for sub in self.subphases:
            out.extend(sub.step_indices)
        return tuple(out)


class Provenance(Enum):
    LLM_ANNOTATED = "LlmAnnotated"
    HEURISTIC_ANNOTATED = "HeuristicAnnotated"


@dataclass(frozen=True)
class StructuredTrace:
    """Four phase groups over a stepped trace. Construction only enforces the
    fixed four-slot shape; everything else is `validate`'s job."""

    groups: tuple[PhaseGroup, ...]
    step_count: int
    provenance: Provenance
    source: SteppedTrace

    def __post_init__(self) -> None:
        object.__setattr__(self, "groups", tuple(self.groups))
        if len(self.groups) != 4 or any(
            g.phase.ordinal != i for i, g in enumerate(self.groups)
        ):
            raise ValueError("a structured trace needs exactly 4 groups in phase order")

    def group(self, phase: Phase) -> PhaseGroup:
        return self.groups[phase.ordinal]

    def subphases(self) -> tuple[Subphase, ...]:
        out: list[Subphase] = []
        for g in self.groups:
            out.extend(g.subphases)
        return tuple(out)

    def find_subphase(self, sub_id: str) -> tuple[Phase, Subphase] | None:
        for g in self.groups:
            for sub in g.subphases:
                if sub.id == sub_id:
                    return g.phase, sub
        return None


def subphase_id(k: int) -> str:
    """Canonical id of the k-th subphase (1-based, document order)."""
    return f"subphase_{k}"


class ViolationCode(Enum):
    EMPTY_STEP = "EmptyStep"
    DISJOINTNESS_VIOLATION = "DisjointnessViolation"
    COVERAGE_GAP = "CoverageGap"
    NON_CONSECUTIVE_RUN = "NonConsecutiveRun"
    PHASE_ORDER_VIOLATION = "PhaseOrderViolation"
    EMPTY_MANDATORY_PHASE = "EmptyMandatoryPhase"
    BAD_SUBPHASE_ID = "BadSubphaseId"
    EMPTY_SUMMARY = "EmptySummary"
    UNKNOWN_SUBCATEGORY = "UnknownSubcategory"
    SUBCATEGORY_PHASE_MISMATCH = "SubcategoryPhaseMismatch"


@dataclass(frozen=True)
class Violation:
    code: ViolationCode
    detail: str
    step_indices: tuple[int, ...] = ()


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def codes(self) -> set[ViolationCode]:
        return {v.code for v in self.violations}

    def describe(self) -> str:
        if self.ok:
            return "ok"
        return "; ".join(f"{v.code.value}: {v.detail}" for v in self.violations)


class StepCountMismatchError(ValueError):
    """Caller wiring error: structured.step_count disagrees with the stepped
    trace. Distinct from report violations on purpose."""


def validate(structured: StructuredTrace, stepped: SteppedTrace) -> ValidationReport:
    """Check every structural invariant and report all violations found."""
    if structured.step_count != stepped.step_count:
        raise StepCountMismatchError(
            f"structured trace covers {structured.step_count} steps, "
            f"stepped trace has {stepped.step_count}"
        )

    violations: list[Violation] = []
    n = structured.step_count

    for i, text in enumerate(stepped.steps):
        if not text.strip():
            violations.append(
                Violation(ViolationCode.EMPTY_STEP, f"step {i} is empty", (i,))
            )

    subs = structured.subphases()

    for sub in subs:
        if not isinstance(sub.subcategory, Subcategory):
            violations.append(
                Violation(
                    ViolationCode.UNKNOWN_SUBCATEGORY,
                    f"{sub.id} carries non-canonical subcategory {sub.subcategory!r}",
                )
            )
        if not sub.summary.strip():
            violations.append(
                Violation(
                    ViolationCode.EMPTY_SUMMARY,
                    f"{sub.id} has an empty summary",
                    tuple(sub.step_indices),
                )
            )
        if not sub.step_indices:
            violations.append(
                Violation(
                    ViolationCode.NON_CONSECUTIVE_RUN,
                    f"{sub.id} lists no step indices",
                )
            )
        elif list(sub.step_indices) != list(
            range(sub.step_indices[0], sub.step_indices[0] + len(sub.step_indices))
        ):
            violations.append(
                Violation(
                    ViolationCode.NON_CONSECUTIVE_RUN,
                    f"{sub.id} indices {list(sub.step_indices)} are not an ascending consecutive run",
                    tuple(sub.step_indices),
                )
            )

    for group in structured.groups:
        if group.subphases and not group.main_phase_summary.strip():
            violations.append(
                Violation(
                    ViolationCode.EMPTY_SUMMARY,
                    f"non-empty group {group.phase.json_key} has an empty main_phase_summary",
                )
            )
        if group.phase.ordinal != Phase.ITERATIVE_REFINEMENT_VERIFICATION.ordinal:
            if n >= MANDATORY_PHASE_MIN_STEPS and not group.subphases:
                violations.append(
                    Violation(
                        ViolationCode.EMPTY_MANDATORY_PHASE,
                        f"group {group.phase.json_key} has no subphases",
                    )
                )
        for sub in group.subphases:
            if (
                isinstance(sub.subcategory, Subcategory)
                and sub.subcategory.parent is not group.phase
            ):
                violations.append(
                    Violation(
                        ViolationCode.SUBCATEGORY_PHASE_MISMATCH,
                        f"{sub.id} subcategory {sub.subcategory.value} belongs to "
                        f"{sub.subcategory.parent.json_key}, not {group.phase.json_key}",
                        tuple(sub.step_indices),
                    )
                )

    # Partition: each index in [0, n) claimed exactly once.
    claims: dict[int, list[str]] = {}
    for sub in subs:
        for i in sub.step_indices:
            claims.setdefault(i, []).append(sub.id)
    for i in sorted(claims):
        owners = claims[i]
        if not 0 <= i < n:
            violations.append(
                Violation(
                    ViolationCode.COVERAGE_GAP,
                    f"index {i} claimed by {owners[0]} lies outside [0, {n})",
                    (i,),
                )
            )
        elif len(owners) > 1:
            violations.append(
                Violation(
                    ViolationCode.DISJOINTNESS_VIOLATION,
                    f"index {i} appears in {', '.join(owners)}",
                    (i,),
                )
            )
    missing = [i for i in range(n) if i not in claims]
    if missing:
        violations.append(
            Violation(
                ViolationCode.COVERAGE_GAP,
                f"indices {missing} are not assigned to any subphase",
                tuple(missing),
            )
        )

    # Phase monotonicity: indices flattened in document order strictly increase.
    flattened: list[tuple[int, str]] = []
    for group in structured.groups:
        for sub in group.subphases:
            for i in sub.step_indices:
                flattened.append((i, sub.id))
    for (prev_i, prev_id), (cur_i, cur_id) in zip(flattened, flattened[1:]):
        if cur_i <= prev_i:
            violations.append(
                Violation(
                    ViolationCode.PHASE_ORDER_VIOLATION,
                    f"index {cur_i} in {cur_id} does not follow index {prev_i} in {prev_id}",
                    (prev_i, cur_i),
                )
            )
            break

    for k, sub in enumerate(subs, start=1):
        if sub.id != subphase_id(k):
            violations.append(
                Violation(
                    ViolationCode.BAD_SUBPHASE_ID,
                    f"subphase {k} in document order has id {sub.id!r}, expected {subphase_id(k)!r}",
                )
            )
            break

    return ValidationReport(tuple(violations))


class MalformedDocumentError(ValueError):
    """Input text is not parseable as a JSON document."""


class SchemaViolationError(ValueError):
    """A mandatory key is missing or carries the wrong type."""

    def __init__(self, path: str, detail: str = ""):
        message = path if not detail else f"{path}: {detail}"
        super().__init__(message)
        self.path = path
        self.detail = detail


def _expect(value: Any, kind: type, path: str) -> Any:
    if kind is int and isinstance(value, bool):
        raise SchemaViolationError(path, "expected an integer, got a boolean")
    if not isinstance(value, kind):
        raise SchemaViolationError(
            path, f"expected {kind.__name__}, got {type(value).__name__}"
        )
    return value


def _get(obj: dict, key: str, kind: type, path: str) -> Any:
    if key not in obj:
        raise SchemaViolationError(f"{path}.{key}" if path else key)
    return _expect(obj[key], kind, f"{path}.{key}" if path else key)


def _decode_subphase(obj: Any, path: str) -> Subphase:
    _expect(obj, dict, path)
    sub_id = _get(obj, "id", str, path)
    label = _get(obj, "subcategory", str, path)
    summary = _get(obj, "summary", str, path)
    raw_indices = _get(obj, "step_indices", list, path)
    indices = tuple(
        _expect(v, int, f"{path}.step_indices[{i}]") for i, v in enumerate(raw_indices)
    )
    ref = obj.get("reference_subphase_id")
    if ref is not None:
        ref = _expect(ref, str, f"{path}.reference_subphase_id")
    return Subphase(
        id=sub_id,
        subcategory=resolve_subcategory(label),
        summary=summary,
        step_indices=indices,
        reference_subphase_id=ref,
    )


def _decode_analysis(analysis: Any, path: str) -> tuple[PhaseGroup, ...]:
    _expect(analysis, dict, path)
    groups: list[PhaseGroup] = []
    for phase in Phase:
        child_path = f"{path}.{phase.json_key}"
        child = _get(analysis, phase.json_key, dict, path)
        summary = _get(child, "main_phase_summary", str, child_path)
        raw_subs = _get(child, "subphases", list, child_path)
        subphases = tuple(
            _decode_subphase(s, f"{child_path}.subphases[{i}]")
            for i, s in enumerate(raw_subs)
        )
        groups.append(
            PhaseGroup(phase=phase, main_phase_summary=summary, subphases=subphases)
        )
    return tuple(groups)


def decode_structured(document: str) -> StructuredTrace:
    """Parse the canonical envelope document. Does not validate; callers
    compose decode + validate."""
    try:
        payload = json.loads(document)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MalformedDocumentError(f"document is not valid JSON: {exc}") from exc
    _expect(payload, dict, "")

    raw_steps = _get(payload, "steps", list, "")
    steps = tuple(
        _expect(s, str, f"steps[{i}]") for i, s in enumerate(raw_steps)
    )
    question = _get(payload, "question", str, "")
    final_answer = _get(payload, "final_answer", str, "")
    source_model = _get(payload, "source_model", str, "")
    provenance_label = _get(payload, "provenance", str, "")
    try:
        provenance = Provenance(provenance_label)
    except ValueError as exc:
        raise SchemaViolationError(
            "provenance", f"unknown provenance label {provenance_label!r}"
        ) from exc

    groups = _decode_analysis(payload["reasoning_analysis"], "reasoning_analysis") \
        if "reasoning_analysis" in payload else None
    if groups is None:
        raise SchemaViolationError("reasoning_analysis")

    stepped = SteppedTrace(
        steps=steps,
        question=question,
        final_answer=final_answer,
        source_model=source_model,
    )
    return StructuredTrace(
        groups=groups,
        step_count=len(steps),
        provenance=provenance,
        source=stepped,
    )


def _subphase_payload(sub: Subphase) -> dict[str, Any]:
    payload: dict[str, Any] = {
        "id": sub.id,
        "subcategory": sub.subcategory.value,
        "summary": sub.summary,
        "step_indices": list(sub.step_indices),
    }
    if sub.reference_subphase_id is not None:
        payload["reference_subphase_id"] = sub.reference_subphase_id
    return payload


def structured_payload(structured: StructuredTrace) -> dict[str, Any]:
    """The envelope document as plain data, in canonical key order."""
    analysis = {
        group.phase.json_key: {
            "main_phase_summary": group.main_phase_summary,
            "subphases": [_subphase_payload(s) for s in group.subphases],
        }
        for group in structured.groups
    }
    return {
        "steps": list(structured.source.steps),
        "question": structured.source.question,
        "final_answer": structured.source.final_answer,
        "source_model": structured.source.source_model,
        "provenance": structured.provenance.value,
        "reasoning_analysis": analysis,
    }


def encode_structured(structured: StructuredTrace) -> str:
    """Serialize to the canonical document: fixed key order, two-space
    indentation, UTF-8 text, trailing newline. Byte-stable for equal traces."""
    return json.dumps(structured_payload(structured), indent=2, ensure_ascii=False) + "\n"
