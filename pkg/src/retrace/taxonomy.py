"""Fixed reasoning vocabulary: four phases, twelve subcategories, cue phrases.

The vocabulary is the backbone of every other module: annotation assigns
subcategories to steps, validation checks subcategory/phase consistency, and
the layouts color by phase. Cue phrases are stored normalized (lowercase,
punctuation stripped) so matching is a plain token-sequence containment test.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

__all__ = [
    "Phase",
    "Subcategory",
    "TaxonomyEntry",
    "TAXONOMY",
    "UnknownSubcategoryError",
    "normalize_text",
    "resolve_subcategory",
    "subcategories_for",
    "cue_scan_order",
    "find_cue_match",
    "bears_cue",
]


class Phase(Enum):
    """The four consecutive top-level reasoning phases, ordinal 0..3."""

    PROBLEM_DEFINITION_SCOPING = 0
    INITIAL_SOLUTION_EXPLORATION = 1
    ITERATIVE_REFINEMENT_VERIFICATION = 2
    FINAL_DECISION = 3

    @property
    def ordinal(self) -> int:
        return self.value

    @property
    def display_name(self) -> str:
        return _PHASE_DISPLAY[self]

    @property
    def json_key(self) -> str:
        return _PHASE_JSON_KEY[self]

    @classmethod
    def from_ordinal(cls, ordinal: int) -> "Phase":
        return cls(ordinal)


_PHASE_DISPLAY = {
    Phase.PROBLEM_DEFINITION_SCOPING: "Problem Definition & Scoping",
    Phase.INITIAL_SOLUTION_EXPLORATION: "Initial Solution & Exploration",
    Phase.ITERATIVE_REFINEMENT_VERIFICATION: "Iterative Refinement & Verification",
    Phase.FINAL_DECISION: "Final Decision",
}

_PHASE_JSON_KEY = {
    Phase.PROBLEM_DEFINITION_SCOPING: "problem_definition_and_scoping",
    Phase.INITIAL_SOLUTION_EXPLORATION: "initial_solution_and_exploration",
    Phase.ITERATIVE_REFINEMENT_VERIFICATION: "iterative_refinement_and_verification",
    Phase.FINAL_DECISION: "final_decision",
}


class Subcategory(Enum):
    """Fine-grained step actions. Declaration order is the table row order,
    which doubles as the within-phase cue scan order."""

    REPHRASE = "Rephrase"
    DEFINE_GOAL = "DefineGoal"
    DECOMPOSITION_EXECUTION = "DecompositionExecution"
    FIRST_ANSWER = "FirstAnswer"
    CONFIDENCE_QUALIFICATION = "ConfidenceQualification"
    PAUSING_TO_RETHINK = "PausingToRethink"
    CORRECTION = "Correction"
    RE_EXAMINE = "ReExamine"
    TRY_ALTERNATIVE = "TryAlternative"
    ABANDONMENT = "Abandonment"
    STATING_CONFIDENCE = "StatingConfidence"
    PREPARING_OUTPUT = "PreparingOutput"

    @property
    def parent(self) -> Phase:
        return TAXONOMY[self].parent

    @property
    def display_name(self) -> str:
        return _SUBCATEGORY_DISPLAY[self]


_SUBCATEGORY_DISPLAY = {
    Subcategory.REPHRASE: "Rephrase",
    Subcategory.DEFINE_GOAL: "Define Goal",
    Subcategory.DECOMPOSITION_EXECUTION: "Decomposition & Execution",
    Subcategory.FIRST_ANSWER: "First Answer",
    Subcategory.CONFIDENCE_QUALIFICATION: "Confidence Qualification",
    Subcategory.PAUSING_TO_RETHINK: "Pausing to Rethink",
    Subcategory.CORRECTION: "Correction",
    Subcategory.RE_EXAMINE: "Re-examine",
    Subcategory.TRY_ALTERNATIVE: "Try Alternative",
    Subcategory.ABANDONMENT: "Abandonment",
    Subcategory.STATING_CONFIDENCE: "Stating Confidence",
    Subcategory.PREPARING_OUTPUT: "Preparing Output",
}

_NON_WORD = re.compile(r"[^a-z0-9\s]+")


def normalize_text(text: str) -> str:
    """Lowercase, strip punctuation, collapse whitespace.

    Apostrophes are removed rather than spaced out so contractions keep
    matching their apostrophe-free spellings ("I'm" -> "im").
    """
    return " ".join(_NON_WORD.sub("", text.lower()).split())


@dataclass(frozen=True)
class TaxonomyEntry:
    parent: Phase
    cues: tuple[str, ...]
    definition: str


def _entry(parent: Phase, definition: str, *cues: str) -> TaxonomyEntry:
    normalized = tuple(normalize_text(c) for c in cues)
    if not normalized or any(not c for c in normalized):
        raise ValueError("every subcategory needs non-empty cue phrases")
    return TaxonomyEntry(parent=parent, cues=normalized, definition=definition)


TAXONOMY: dict[Subcategory, TaxonomyEntry] = {
    Subcategory.REPHRASE: _entry(
        Phase.PROBLEM_DEFINITION_SCOPING,
        "Restates the task to confirm understanding",
        "Let me restate the problem",
        "Basically, the goal is",
        "So, what I need to do is",
    ),
    Subcategory.DEFINE_GOAL: _entry(
        Phase.PROBLEM_DEFINITION_SCOPING,
        "Specifies the required objective or output",
        "I need to find",
        "The aim is to",
    ),
    Subcategory.DECOMPOSITION_EXECUTION: _entry(
        Phase.INITIAL_SOLUTION_EXPLORATION,
        "Breaks the problem into steps and proceeds",
        "First, I should",
        "Let's break this down",
    ),
    Subcategory.FIRST_ANSWER: _entry(
        Phase.INITIAL_SOLUTION_EXPLORATION,
        "States a complete initial result",
        "So, the answer is",
        "Therefore, the result is",
        "The initial answer is",
    ),
    Subcategory.CONFIDENCE_QUALIFICATION: _entry(
        Phase.INITIAL_SOLUTION_EXPLORATION,
        "Gives a quick plausibility check",
        "Hm, let me verify that",
        "Does that make sense",
        "That seems right",
    ),
    Subcategory.PAUSING_TO_RETHINK: _entry(
        Phase.ITERATIVE_REFINEMENT_VERIFICATION,
        "Stops to reconsider direction",
        "Wait",
        "Hold on",
    ),
    Subcategory.CORRECTION: _entry(
        Phase.ITERATIVE_REFINEMENT_VERIFICATION,
        "Fixes assumptions or calculations",
        "Let me correct that",
        "Let me recalculate that part",
        "Ah, that calculation was wrong",
    ),
    Subcategory.RE_EXAMINE: _entry(
        Phase.ITERATIVE_REFINEMENT_VERIFICATION,
        "Re-checks prior work without progress",
        "Let me check that again",
        "Let me review the steps",
    ),
    Subcategory.TRY_ALTERNATIVE: _entry(
        Phase.ITERATIVE_REFINEMENT_VERIFICATION,
        "Explores a different approach",
        "Alternatively",
        "Another way to see this is",
        "Another way to look at this is",
        "What if we try a different formula",
    ),
    Subcategory.ABANDONMENT: _entry(
        Phase.ITERATIVE_REFINEMENT_VERIFICATION,
        "Drops an unproductive line",
        "This approach is a dead end",
        "I'll drop this path and try another",
        "No, that won't work",
    ),
    Subcategory.STATING_CONFIDENCE: _entry(
        Phase.FINAL_DECISION,
        "Expresses certainty in the answer",
        "I'm confident this is correct",
        "I think this is right now",
        "So, I think I'm sure now",
    ),
    Subcategory.PREPARING_OUTPUT: _entry(
        Phase.FINAL_DECISION,
        "Formats and delivers the result",
        "So, the final answer is",
        "Here's the result",
        "To summarize, the result is",
    ),
}


def subcategories_for(phase: Phase) -> tuple[Subcategory, ...]:
    """Subcategories of one phase, in table row order."""
    return tuple(s for s in Subcategory if TAXONOMY[s].parent is phase)


def cue_scan_order() -> tuple[tuple[str, Subcategory], ...]:
    """(cue, subcategory) pairs in match priority order.

    Later phases outrank earlier ones: a step reading like a final decision
    is a stronger transition signal than one echoing problem setup. Within a
    phase, table row order breaks ties.
    """
    pairs: list[tuple[str, Subcategory]] = []
    for phase in sorted(Phase, key=lambda p: -p.ordinal):
        for sub in subcategories_for(phase):
            for cue in TAXONOMY[sub].cues:
                pairs.append((cue, sub))
    return tuple(pairs)


_CUE_SCAN_ORDER = None


def find_cue_match(text: str, min_phase: int = 0, max_phase: int = 3) -> Subcategory | None:
    """First cue hit in priority order whose parent phase lies in the window."""
    global _CUE_SCAN_ORDER
    if _CUE_SCAN_ORDER is None:
        _CUE_SCAN_ORDER = cue_scan_order()
    padded = f" {normalize_text(text)} "
    for cue, sub in _CUE_SCAN_ORDER:
        ordinal = TAXONOMY[sub].parent.ordinal
        if not min_phase <= ordinal <= max_phase:
            continue
        if f" {cue} " in padded:
            return sub
    return None


def bears_cue(text: str, subcategory: Subcategory) -> bool:
    """Does the text contain any cue of this one subcategory?"""
    padded = f" {normalize_text(text)} "
    return any(f" {cue} " in padded for cue in TAXONOMY[subcategory].cues)


class UnknownSubcategoryError(ValueError):
    """A subcategory label matched neither canonical names nor aliases."""

    def __init__(self, label: str):
        super().__init__(f"unknown subcategory label: {label!r}")
        self.label = label


def _alias_table() -> dict[str, Subcategory]:
    table: dict[str, Subcategory] = {}

    def put(label: str, sub: Subcategory) -> None:
        table[normalize_text(label)] = sub

    for sub in Subcategory:
        put(sub.value, sub)  # canonical CamelCase, e.g. "DecompositionExecution"
        put(sub.display_name, sub)  # table spelling, e.g. "Decomposition & Execution"
    # underscore spellings used by annotation prompts
    put("Define_Goal", Subcategory.DEFINE_GOAL)
    put("Decomposition_&_Execution", Subcategory.DECOMPOSITION_EXECUTION)
    put("First_Answer", Subcategory.FIRST_ANSWER)
    put("Confidence_Qualification", Subcategory.CONFIDENCE_QUALIFICATION)
    put("Pausing_to_Rethink", Subcategory.PAUSING_TO_RETHINK)
    put("Re-examine", Subcategory.RE_EXAMINE)
    put("Try_Alternative", Subcategory.TRY_ALTERNATIVE)
    put("Stating_Confidence", Subcategory.STATING_CONFIDENCE)
    put("Preparing_Output", Subcategory.PREPARING_OUTPUT)
    # drifted labels observed in real annotation responses
    put("Starting_to_Think", Subcategory.REPHRASE)
    put("Reading_the_Question", Subcategory.REPHRASE)
    put("Making_a_Plan", Subcategory.DECOMPOSITION_EXECUTION)
    put("Try_Alternative_(Rebloom)", Subcategory.TRY_ALTERNATIVE)
    put("Reexamines_(Rumination)", Subcategory.RE_EXAMINE)
    put("Reexamine", Subcategory.RE_EXAMINE)
    put("Settling_on_Solution", Subcategory.STATING_CONFIDENCE)
    return table


_ALIASES = _alias_table()


def resolve_subcategory(label: str) -> Subcategory:
    """Map a free-form subcategory label to the canonical vocabulary.

    Raises UnknownSubcategoryError when nothing matches.
    """
    sub = _ALIASES.get(normalize_text(label))
    if sub is None:
        raise UnknownSubcategoryError(label)
    return sub
