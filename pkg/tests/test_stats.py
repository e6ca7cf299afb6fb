from __future__ import annotations

import random
from fractions import Fraction

from conftest import make_random_structured
from retrace.model import (
    PhaseGroup,
    Provenance,
    SteppedTrace,
    StructuredTrace,
    Subphase,
    decode_structured,
    encode_structured,
    subphase_id,
    validate,
)
from retrace.stats import compute_stats, format_percent, stats_payload
from retrace.taxonomy import Phase, Subcategory


def _uniform_trace(sizes: tuple[int, int, int, int]) -> StructuredTrace:
    """One subphase per non-empty phase, sized as requested."""
    n = sum(sizes)
    steps = tuple(f"step {i}" for i in range(n))
    groups = []
    next_index = 0
    counter = 0
    fillers = {
        0: Subcategory.REPHRASE,
        1: Subcategory.DECOMPOSITION_EXECUTION,
        2: Subcategory.RE_EXAMINE,
        3: Subcategory.PREPARING_OUTPUT,
    }
    for phase in Phase:
        size = sizes[phase.ordinal]
        subs = ()
        if size:
            counter += 1
            subs = (
                Subphase(
                    id=subphase_id(counter),
                    subcategory=fillers[phase.ordinal],
                    summary=f"run {counter}",
                    step_indices=tuple(range(next_index, next_index + size)),
                ),
            )
            next_index += size
        groups.append(
            PhaseGroup(
                phase=phase,
                main_phase_summary="overview" if subs else "",
                subphases=subs,
            )
        )
    structured = StructuredTrace(
        groups=tuple(groups),
        step_count=n,
        provenance=Provenance.HEURISTIC_ANNOTATED,
        source=SteppedTrace(steps=steps),
    )
    assert validate(structured, structured.source).ok
    return structured


def test_toy9_stats(toy9_structured):
    stats = compute_stats(toy9_structured)
    assert stats.step_counts == (2, 3, 2, 2)
    assert stats.subphase_counts == (2, 3, 2, 2)
    assert stats.verification_share == Fraction(2, 9)
    assert stats.confidence_step == 7


def test_verification_share_matches_reported_gsm8k_figure():
    structured = _uniform_trace((20, 20, 98, 12))
    stats = compute_stats(structured)
    assert stats.verification_share == Fraction(98, 150)
    assert format_percent(stats.verification_share) == "65.3%"


def test_reported_drop_figure_renders_too():
    assert format_percent(Fraction(883, 1000)) == "88.3%"


def test_empty_refinement_phase_has_zero_share():
    structured = _uniform_trace((2, 3, 0, 2))
    stats = compute_stats(structured)
    assert stats.verification_share == 0
    assert stats.step_counts[2] == 0


def test_confidence_step_prefers_stating_confidence(toy9_structured):
    # toy-9's final group opens with a Stating Confidence subphase at step 7
    stats = compute_stats(toy9_structured)
    group = toy9_structured.groups[3]
    assert stats.confidence_step == group.subphases[0].first_index


def test_confidence_step_falls_back_to_group_start():
    structured = _uniform_trace((2, 3, 1, 3))
    stats = compute_stats(structured)
    # final group has only a PreparingOutput subphase
    assert stats.confidence_step == 6


def test_shares_sum_to_one_exactly_on_fuzz_traces():
    rng = random.Random(11)
    for _ in range(200):
        structured = make_random_structured(rng)
        stats = compute_stats(structured)
        assert sum(stats.step_shares, Fraction(0)) == 1
        final = structured.groups[3].step_indices
        assert stats.confidence_step in final


def test_stats_invariant_under_reencoding(toy9_structured):
    reencoded = decode_structured(encode_structured(toy9_structured))
    assert compute_stats(reencoded) == compute_stats(toy9_structured)


def test_payload_shape(toy9_structured):
    payload = stats_payload(compute_stats(toy9_structured))
    assert set(payload) == {
        "step_shares",
        "step_shares_pct",
        "subphase_counts",
        "step_counts",
        "verification_share",
        "verification_share_pct",
        "confidence_step",
    }
    assert payload["step_counts"] == [2, 3, 2, 2]
    assert payload["verification_share_pct"] == "22.2%"
    assert payload["confidence_step"] == 7


def test_rounding_is_half_up():
    assert format_percent(Fraction(1, 8)) == "12.5%"
    assert format_percent(Fraction(1293, 2000)) == "64.7%"  # 64.65 rounds up
    assert format_percent(Fraction(1, 1)) == "100.0%"
    assert format_percent(Fraction(0, 1)) == "0.0%"
