"""Shared fixtures: the toy-9 trace, randomized trace/skeleton generators,
and a tiny in-process WSGI client."""

from __future__ import annotations

import random
from io import BytesIO
from pathlib import Path

import pytest

from retrace.annotator import AnnotationSkeleton, SkeletonSubphase, annotate_heuristic
from retrace.layout import ExpansionState
from retrace.model import (
    PhaseGroup,
    Provenance,
    SteppedTrace,
    StructuredTrace,
    Subphase,
    subphase_id,
)
from retrace.taxonomy import Phase, Subcategory, subcategories_for

GOLDEN_DIR = Path(__file__).parent / "golden"

TOY9_STEPS = (
    "Let me restate the problem: a shop sold 48 mugs in April and half as many in May.",
    "I need to find the total mugs sold across both months.",
    "First, I should compute May: half of 48 is 24.",
    "So, the answer is 48 plus 24, which is 72.",
    "Hm, let me verify that before settling.",
    "Wait, is half of 48 really 24?",
    "Let me check that again: 48 divided by 2 is 24, and 48 plus 24 is 72.",
    "I'm confident this is correct now.",
    "So, the final answer is 72.",
)
TOY9_QUESTION = (
    "A shop sold 48 mugs in April and half as many in May. "
    "How many mugs did it sell in April and May together?"
)
TOY9_ANSWER = "72"
TOY9_MODEL = "example-lrm"

# hand labels derived from the cue table, used as the heuristic oracle
TOY9_ORACLE_SUBCATEGORIES = (
    Subcategory.REPHRASE,
    Subcategory.DEFINE_GOAL,
    Subcategory.DECOMPOSITION_EXECUTION,
    Subcategory.FIRST_ANSWER,
    Subcategory.CONFIDENCE_QUALIFICATION,
    Subcategory.PAUSING_TO_RETHINK,
    Subcategory.RE_EXAMINE,
    Subcategory.STATING_CONFIDENCE,
    Subcategory.PREPARING_OUTPUT,
)
TOY9_ORACLE_GROUPS = ((0, 1), (2, 3, 4), (5, 6), (7, 8))


@pytest.fixture
def toy9_raw_text() -> str:
    return "\n".join(TOY9_STEPS)


@pytest.fixture
def toy9_stepped() -> SteppedTrace:
    return SteppedTrace(
        steps=TOY9_STEPS,
        question=TOY9_QUESTION,
        final_answer=TOY9_ANSWER,
        source_model=TOY9_MODEL,
    )


@pytest.fixture
def toy9_structured(toy9_stepped: SteppedTrace) -> StructuredTrace:
    return annotate_heuristic(toy9_stepped)


def make_random_structured(rng: random.Random) -> StructuredTrace:
    """A random trace that satisfies every structural invariant."""
    n = rng.randint(4, 60)
    cuts = sorted(rng.sample(range(1, n), 3))
    sizes = [cuts[0], cuts[1] - cuts[0], cuts[2] - cuts[1], n - cuts[2]]
    if rng.random() < 0.2:
        sizes[1] += sizes[2]
        sizes[2] = 0

    steps = tuple(f"reasoning step {i} text" for i in range(n))
    groups: list[PhaseGroup] = []
    next_index = 0
    sub_counter = 0
    for phase in Phase:
        size = sizes[phase.ordinal]
        subs: list[Subphase] = []
        remaining = size
        while remaining > 0:
            chunk = rng.randint(1, min(remaining, 5))
            sub_counter += 1
            indices = tuple(range(next_index, next_index + chunk))
            subs.append(
                Subphase(
                    id=subphase_id(sub_counter),
                    subcategory=rng.choice(subcategories_for(phase)),
                    summary=f"summary of run {sub_counter}",
                    step_indices=indices,
                )
            )
            next_index += chunk
            remaining -= chunk
        groups.append(
            PhaseGroup(
                phase=phase,
                main_phase_summary=f"phase {phase.ordinal} overview" if subs else "",
                subphases=tuple(subs),
            )
        )
    stepped = SteppedTrace(
        steps=steps, question="q?", final_answer="a", source_model="fuzz"
    )
    return StructuredTrace(
        groups=tuple(groups),
        step_count=n,
        provenance=Provenance.HEURISTIC_ANNOTATED,
        source=stepped,
    )


def make_random_state(rng: random.Random, structured: StructuredTrace) -> ExpansionState:
    roll = rng.random()
    if roll < 0.3:
        return ExpansionState()
    phase = rng.randrange(4)
    group = structured.groups[phase]
    if roll < 0.65 or not group.subphases:
        return ExpansionState(expanded_phase=phase)
    sub = rng.choice(group.subphases)
    return ExpansionState(expanded_phase=phase, expanded_subphase=sub.id)


def make_corrupted_skeleton(
    rng: random.Random,
) -> tuple[AnnotationSkeleton, StructuredTrace, bool]:
    """A skeleton with injected gaps/overlaps (and sometimes phase-order
    corruption), plus an independent verdict on whether a genuine phase-order
    inversion exists among the surviving first claims.

    The first index of every mandatory phase is left untouched so that a
    repairable skeleton always reconciles into a fully valid trace.
    """
    base = make_random_structured(rng)
    n = base.step_count
    protected = {
        group.subphases[0].first_index
        for group in base.groups
        if group.phase.ordinal != 2 and group.subphases
    }

    per_phase: list[list[list[int]]] = [[], [], [], []]
    labels: list[list[str]] = [[], [], [], []]
    for group in base.groups:
        for sub in group.subphases:
            per_phase[group.phase.ordinal].append(list(sub.step_indices))
            labels[group.phase.ordinal].append(sub.subcategory.value)

    flat: list[tuple[int, list[int]]] = []
    for ordinal in range(4):
        for indices in per_phase[ordinal]:
            flat.append((ordinal, indices))

    # gaps
    for _, indices in flat:
        for i in list(indices):
            if i not in protected and rng.random() < 0.12:
                indices.remove(i)
    # overlaps
    for src_pos, (_, indices) in enumerate(flat):
        for i in list(indices):
            if i not in protected and rng.random() < 0.08:
                target = rng.randrange(len(flat))
                if target != src_pos:
                    flat[target][1].append(i)
    # out-of-range noise
    if rng.random() < 0.3:
        _, indices = flat[rng.randrange(len(flat))]
        indices.append(n + rng.randint(0, 4))
    # deliberate order corruption; never move a mandatory phase's anchor index
    swap_candidates = [
        pos for pos, (_, indices) in enumerate(flat) if not (set(indices) & protected)
    ]
    if rng.random() < 0.25 and len(swap_candidates) >= 2:
        a, b = rng.sample(swap_candidates, 2)
        flat[a][1][:], flat[b][1][:] = flat[b][1][:], flat[a][1][:]

    # oracle verdict: are the surviving first claims phase-monotone?
    claim_phase: dict[int, int] = {}
    for ordinal, indices in flat:
        for i in sorted(set(indices)):
            if 0 <= i < n and i not in claim_phase:
                claim_phase[i] = ordinal
    claimed = [claim_phase[i] for i in sorted(claim_phase)]
    has_inversion = any(b < a for a, b in zip(claimed, claimed[1:])) or not claimed

    skeletons: list[tuple[SkeletonSubphase, ...]] = []
    position = 0
    counter = 0
    for ordinal in range(4):
        subs = []
        for indices in per_phase[ordinal]:
            counter += 1
            subs.append(
                SkeletonSubphase(
                    id=subphase_id(counter),
                    label=labels[ordinal][len(subs)],
                    summary=f"summary of run {counter}",
                    step_indices=tuple(flat[position][1]),
                )
            )
            position += 1
        skeletons.append(tuple(subs))

    skeleton = AnnotationSkeleton(
        phase_summaries=tuple(
            g.main_phase_summary if g.main_phase_summary else "phase overview"
            for g in base.groups
        ),
        subphases=tuple(skeletons),
    )
    return skeleton, base, has_inversion


def call_app(app, method: str, path: str, *, body: bytes = b"", query: str = ""):
    """Drive a WSGI app in-process; returns (status, headers dict, body bytes)."""
    environ = {
        "REQUEST_METHOD": method,
        "PATH_INFO": path,
        "QUERY_STRING": query,
        "CONTENT_LENGTH": str(len(body)),
        "wsgi.input": BytesIO(body),
    }
    captured: dict = {}

    def start_response(status, headers):
        captured["status"] = status
        captured["headers"] = headers

    chunks = app(environ, start_response)
    return captured["status"], dict(captured["headers"]), b"".join(chunks)
