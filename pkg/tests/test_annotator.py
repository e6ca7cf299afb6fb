from __future__ import annotations

import random

import pytest

from conftest import (
    GOLDEN_DIR,
    TOY9_ORACLE_GROUPS,
    TOY9_ORACLE_SUBCATEGORIES,
    make_corrupted_skeleton,
)
from retrace.annotator import (
    AnnotationFailedError,
    AnnotationSkeleton,
    IrreparableError,
    NoJsonFoundError,
    PhaseCursor,
    ProviderConfig,
    ProviderError,
    SkeletonSubphase,
    StepPosition,
    ValidationFailedError,
    annotate_heuristic,
    annotate_llm,
    build_prompt,
    classify_step,
    parse_annotation,
    reconcile,
    repair,
    summarize,
)
from retrace.model import (
    Provenance,
    SchemaViolationError,
    SteppedTrace,
    ViolationCode,
    validate,
)
from retrace.taxonomy import Phase, Subcategory


# --------------------------------------------------------------------------
# classify_step
# --------------------------------------------------------------------------

def test_classify_wait_advances_to_refinement():
    sub, cursor = classify_step(
        "Wait, is half of 48 really 24?", PhaseCursor(1), StepPosition.MIDDLE
    )
    assert sub is Subcategory.PAUSING_TO_RETHINK
    assert cursor == PhaseCursor(2)


def test_classify_final_answer_advances_to_decision():
    sub, cursor = classify_step(
        "So, the final answer is 72.", PhaseCursor(2), StepPosition.MIDDLE
    )
    assert sub is Subcategory.PREPARING_OUTPUT
    assert cursor == PhaseCursor(3)


def test_classify_no_cue_uses_continuation_default():
    sub, cursor = classify_step(
        "Carrying on with arithmetic.", PhaseCursor(1), StepPosition.MIDDLE
    )
    assert sub is Subcategory.DECOMPOSITION_EXECUTION
    assert cursor == PhaseCursor(1)


def test_classify_first_position_stays_in_opening_phase():
    sub, cursor = classify_step(
        "Wait, what is going on here?", PhaseCursor(0), StepPosition.FIRST
    )
    assert sub is Subcategory.REPHRASE  # refinement cue ignored at the opener
    assert cursor == PhaseCursor(1)  # cue-less opener closes the opening window

    sub, cursor = classify_step(
        "Let me restate the problem.", PhaseCursor(0), StepPosition.FIRST
    )
    assert sub is Subcategory.REPHRASE
    assert cursor == PhaseCursor(0)


def test_classify_last_position_forces_output():
    sub, cursor = classify_step("and so on", PhaseCursor(1), StepPosition.LAST)
    assert sub is Subcategory.PREPARING_OUTPUT
    assert cursor == PhaseCursor(3)


def test_classify_last_position_keeps_confidence_cue():
    sub, _ = classify_step(
        "I'm confident this is correct.", PhaseCursor(1), StepPosition.LAST
    )
    assert sub is Subcategory.STATING_CONFIDENCE


def test_cursor_is_monotone_over_random_folds():
    rng = random.Random(99)
    vocabulary = [
        "Let me restate the problem once more.",
        "I need to find the answer.",
        "First, I should simplify.",
        "So, the answer is 9.",
        "Wait, that seems off.",
        "Let me check that again.",
        "plain continuation text",
        "I'm confident this is correct.",
        "So, the final answer is 9.",
    ]
    for _ in range(200):
        n = rng.randint(2, 30)
        cursor = PhaseCursor(0)
        previous = 0
        for i in range(n):
            position = (
                StepPosition.FIRST
                if i == 0
                else StepPosition.LAST
                if i == n - 1
                else StepPosition.MIDDLE
            )
            _, cursor = classify_step(rng.choice(vocabulary), cursor, position)
            assert cursor.current >= previous
            previous = cursor.current


# --------------------------------------------------------------------------
# summarize
# --------------------------------------------------------------------------

def test_summarize_takes_first_sentence():
    text = summarize(
        ["Wait, is half of 48 really 24?", "Let me check."],
        Subcategory.PAUSING_TO_RETHINK,
    )
    assert text == "Wait, is half of 48 really 24?"


def test_summarize_truncates_long_unpunctuated_text():
    step = "x" * 300
    text = summarize([step], Subcategory.RE_EXAMINE)
    assert len(text) == 140
    assert text == "x" * 137 + "..."


def test_summarize_short_passthrough():
    assert summarize(["Ok."], Subcategory.CORRECTION) == "Ok."


def test_summaries_are_prefix_derived():
    rng = random.Random(3)
    for _ in range(100):
        step = "".join(rng.choice("abc .?!") for _ in range(rng.randint(1, 200)))
        step = step.strip() or "a"
        out = summarize([step], Subcategory.RE_EXAMINE)
        core = out[:-3] if out.endswith("...") and len(out) == 140 else out
        assert step.startswith(core)


# --------------------------------------------------------------------------
# annotate_heuristic
# --------------------------------------------------------------------------

def test_toy9_matches_hand_label_oracle(toy9_structured):
    subs = toy9_structured.subphases()
    assert tuple(s.subcategory for s in subs) == TOY9_ORACLE_SUBCATEGORIES
    grouped = tuple(
        tuple(i for s in g.subphases for i in s.step_indices)
        for g in toy9_structured.groups
    )
    assert grouped == TOY9_ORACLE_GROUPS
    assert toy9_structured.provenance is Provenance.HEURISTIC_ANNOTATED


def test_single_step_trace_lands_in_final_phase():
    structured = annotate_heuristic(SteppedTrace(steps=("The answer is 5.",)))
    assert [len(g.subphases) for g in structured.groups] == [0, 0, 0, 1]
    only = structured.groups[3].subphases[0]
    assert only.subcategory is Subcategory.PREPARING_OUTPUT
    assert only.step_indices == (0,)
    assert validate(structured, structured.source).ok


def test_cueless_trace_uses_continuation_defaults_and_forcing():
    stepped = SteppedTrace(
        steps=tuple(f"plain continuation line {i}" for i in range(6))
    )
    structured = annotate_heuristic(stepped)
    grouped = tuple(
        tuple(i for s in g.subphases for i in s.step_indices)
        for g in structured.groups
    )
    assert grouped == ((0,), (1, 2, 3, 4), (), (5,))


def test_heuristic_output_validates_on_random_text():
    rng = random.Random(41)
    words = ["wait", "so", "first", "value", "check", "therefore", "maybe", "sum"]
    for _ in range(150):
        n = rng.randint(4, 40)
        steps = tuple(
            " ".join(rng.choice(words) for _ in range(rng.randint(1, 10)))
            for _ in range(n)
        )
        structured = annotate_heuristic(SteppedTrace(steps=steps))
        assert validate(structured, structured.source).ok


def test_heuristic_is_deterministic(toy9_stepped):
    from retrace.model import encode_structured

    one = encode_structured(annotate_heuristic(toy9_stepped))
    two = encode_structured(annotate_heuristic(toy9_stepped))
    assert one == two


# --------------------------------------------------------------------------
# build_prompt / parse_annotation
# --------------------------------------------------------------------------

def test_prompt_embeds_serialized_steps():
    stepped = SteppedTrace(steps=("alpha", "beta"), question="q?")
    prompt = build_prompt(stepped)
    assert '"reasoning_steps": ["alpha", "beta"]' in prompt
    assert '"question": "q?"' in prompt


def test_prompt_contains_partition_constraint():
    stepped = SteppedTrace(steps=("alpha",))
    prompt = build_prompt(stepped)
    assert "Every reasoning step must be assigned to exactly one subphase." in prompt


def test_prompt_matches_golden_file(toy9_stepped):
    expected = (GOLDEN_DIR / "toy9_prompt.txt").read_text(encoding="utf-8")
    assert build_prompt(toy9_stepped) == expected


def test_parse_annotation_reads_fenced_response():
    response = (GOLDEN_DIR / "toy9_response.txt").read_text(encoding="utf-8")
    skeleton = parse_annotation(response)
    assert [len(subs) for subs in skeleton.subphases] == [2, 3, 2, 2]
    assert skeleton.subphases[2][1].label == "Reexamines_(Rumination)"
    assert skeleton.subphases[2][1].reference_subphase_id == "subphase_6"


def test_parse_annotation_rejects_prose():
    with pytest.raises(NoJsonFoundError):
        parse_annotation("I could not produce the analysis, sorry.")


def test_parse_annotation_rejects_string_indices():
    response = """{"reasoning_analysis": {
        "problem_definition_and_scoping": {"main_phase_summary": "s", "subphases": [
            {"id": "subphase_1", "subcategory": "Rephrase", "summary": "s", "step_indices": "0-2"}
        ]},
        "initial_solution_and_exploration": {"main_phase_summary": "s", "subphases": []},
        "iterative_refinement_and_verification": {"main_phase_summary": "s", "subphases": []},
        "final_decision": {"main_phase_summary": "s", "subphases": []}
    }}"""
    with pytest.raises(SchemaViolationError):
        parse_annotation(response)


def test_parse_annotation_skips_leading_non_object_braces():
    response = 'noise {"unclosed": [} more noise\n{"reasoning_analysis": ' + (
        '{"problem_definition_and_scoping": {"main_phase_summary": "s", "subphases": []},'
        '"initial_solution_and_exploration": {"main_phase_summary": "s", "subphases": []},'
        '"iterative_refinement_and_verification": {"main_phase_summary": "s", "subphases": []},'
        '"final_decision": {"main_phase_summary": "s", "subphases": []}}}'
    )
    skeleton = parse_annotation(response)
    assert skeleton.phase_summaries == ("s", "s", "s", "s")


# --------------------------------------------------------------------------
# repair
# --------------------------------------------------------------------------

def _skeleton(groups: list[tuple[int, list[int]]]) -> AnnotationSkeleton:
    """Build a skeleton from (phase ordinal, indices) pairs in document order."""
    per_phase: list[list[SkeletonSubphase]] = [[], [], [], []]
    names = {
        0: "Rephrase",
        1: "DecompositionExecution",
        2: "ReExamine",
        3: "PreparingOutput",
    }
    for k, (ordinal, indices) in enumerate(groups, start=1):
        per_phase[ordinal].append(
            SkeletonSubphase(
                id=f"subphase_{k}",
                label=names[ordinal],
                summary=f"run {k}",
                step_indices=tuple(indices),
            )
        )
    return AnnotationSkeleton(
        phase_summaries=("p0", "p1", "p2", "p3"),
        subphases=tuple(tuple(s) for s in per_phase),
    )


def _flat_indices(skeleton: AnnotationSkeleton) -> list[list[int]]:
    return [list(s.step_indices) for _, s in skeleton.flattened()]


def test_repair_fills_gap_by_appending_to_preceding_run():
    repaired = repair(_skeleton([(0, [0, 1]), (1, [3, 4])]), 5)
    assert _flat_indices(repaired) == [[0, 1, 2], [3, 4]]


def test_repair_keeps_earliest_claim_on_overlap():
    repaired = repair(_skeleton([(0, [0, 1, 2]), (1, [2, 3])]), 4)
    assert _flat_indices(repaired) == [[0, 1, 2], [3]]


def test_repair_rejects_phase_inversion():
    with pytest.raises(IrreparableError):
        repair(_skeleton([(3, [0, 1]), (0, [2, 3])]), 4)


def test_repair_discards_out_of_range_indices():
    repaired = repair(_skeleton([(0, [0, 99]), (1, [1, 2])]), 3)
    assert _flat_indices(repaired) == [[0], [1, 2]]


def test_repair_prepends_leading_gap():
    repaired = repair(_skeleton([(1, [2, 3])]), 4)
    assert _flat_indices(repaired) == [[0, 1, 2, 3]]


def test_repair_splits_go_to_predecessor():
    # second run non-consecutive: 3 detaches, lands with the run holding 2
    repaired = repair(_skeleton([(1, [2]), (1, [0, 1, 3])]), 4)
    assert _flat_indices(repaired) == [[0, 1], [2, 3]]


def test_repair_renumbers_ids_in_step_order():
    repaired = repair(_skeleton([(1, [1]), (1, [2, 0])]), 3)
    flat = repaired.flattened()
    ids = [s.id for _, s in flat]
    assert ids == ["subphase_1", "subphase_2"]
    assert _flat_indices(repaired) == [[0], [1, 2]]


def test_repair_converges_on_fuzz_corpus():
    # a pre-repair inversion can be benign (a stray late index handed to an
    # early subphase gets trimmed), but IrreparableError must always trace
    # back to a genuine one
    rng = random.Random(20250808)
    irreparable = 0
    for _ in range(300):
        skeleton, base, has_inversion = make_corrupted_skeleton(rng)
        try:
            repaired = repair(skeleton, base.step_count)
        except IrreparableError:
            irreparable += 1
            assert has_inversion
            continue
        claimed = sorted(
            i for _, sub in repaired.flattened() for i in sub.step_indices
        )
        assert claimed == list(range(base.step_count))
        for _, sub in repaired.flattened():
            run = list(sub.step_indices)
            assert run == list(range(run[0], run[0] + len(run)))
        structured = reconcile(repaired, base.source)
        assert validate(structured, base.source).ok
    assert irreparable > 0  # the corpus must exercise the inversion branch


# --------------------------------------------------------------------------
# reconcile / annotate_llm
# --------------------------------------------------------------------------

def _toy9_skeleton() -> AnnotationSkeleton:
    response = (GOLDEN_DIR / "toy9_response.txt").read_text(encoding="utf-8")
    return parse_annotation(response)


def test_reconcile_builds_validated_trace(toy9_stepped):
    structured = reconcile(repair(_toy9_skeleton(), 9), toy9_stepped)
    assert structured.provenance is Provenance.LLM_ANNOTATED
    assert validate(structured, toy9_stepped).ok
    assert structured.groups[1].subphases[0].subcategory is Subcategory.DECOMPOSITION_EXECUTION


def test_reconcile_resolves_plan_alias(toy9_stepped):
    structured = reconcile(repair(_toy9_skeleton(), 9), toy9_stepped)
    # "Making_a_Plan" arrives as Decomposition & Execution
    assert structured.groups[1].subphases[0].id == "subphase_3"


def test_reconcile_rejects_empty_mandatory_phase(toy9_stepped):
    skeleton = _skeleton([(0, [0, 1]), (2, [2, 3, 4, 5, 6]), (3, [7, 8])])
    with pytest.raises(ValidationFailedError) as excinfo:
        reconcile(skeleton, toy9_stepped)
    assert ViolationCode.EMPTY_MANDATORY_PHASE in excinfo.value.report.codes()


def test_annotate_llm_first_try(toy9_stepped):
    response = (GOLDEN_DIR / "toy9_response.txt").read_text(encoding="utf-8")
    calls: list[str] = []

    def transport(prompt: str, cfg: ProviderConfig) -> str:
        calls.append(prompt)
        return response

    structured = annotate_llm(toy9_stepped, ProviderConfig(), transport)
    assert len(calls) == 1
    assert validate(structured, toy9_stepped).ok


def test_annotate_llm_retries_then_succeeds(toy9_stepped):
    response = (GOLDEN_DIR / "toy9_response.txt").read_text(encoding="utf-8")
    replies = iter(["garbage", "also garbage", response])
    calls: list[str] = []

    def transport(prompt: str, cfg: ProviderConfig) -> str:
        calls.append(prompt)
        return next(replies)

    structured = annotate_llm(
        toy9_stepped, ProviderConfig(max_retries=2), transport
    )
    assert len(calls) == 3
    assert len(set(calls)) == 1  # identical prompt reused on retries
    assert structured.provenance is Provenance.LLM_ANNOTATED


def test_annotate_llm_retry_exhaustion_is_annotation_failure(toy9_stepped):
    def transport(prompt: str, cfg: ProviderConfig) -> str:
        return "no json here"

    with pytest.raises(AnnotationFailedError) as excinfo:
        annotate_llm(toy9_stepped, ProviderConfig(max_retries=1), transport)
    assert excinfo.value.attempts == 2


def test_annotate_llm_transport_failure_is_provider_error(toy9_stepped):
    calls: list[int] = []

    def transport(prompt: str, cfg: ProviderConfig) -> str:
        calls.append(1)
        raise TimeoutError("simulated timeout")

    with pytest.raises(ProviderError) as excinfo:
        annotate_llm(toy9_stepped, ProviderConfig(max_retries=2), transport)
    assert excinfo.value.attempts == 3
    assert len(calls) == 3


def test_provider_config_rejects_bad_values():
    with pytest.raises(ValueError):
        ProviderConfig(max_retries=-1)
    with pytest.raises(ValueError):
        ProviderConfig(timeout=0)
