"""Phase distribution figures for a validated structured trace.

Shares are carried as exact rationals so they always sum to one; decimal
rendering happens only at the display edge (one decimal place, half-up),
matching how trace statistics are conventionally reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .model import StructuredTrace
from .taxonomy import Phase, Subcategory

__all__ = ["TraceStats", "compute_stats", "format_percent", "stats_payload"]


@dataclass(frozen=True)
class TraceStats:
    step_shares: tuple[Fraction, Fraction, Fraction, Fraction]
    subphase_counts: tuple[int, int, int, int]
    step_counts: tuple[int, int, int, int]
    verification_share: Fraction
    confidence_step: int | None


def compute_stats(structured: StructuredTrace) -> TraceStats:
    """Count steps and subphases per phase and locate the confidence step.

    The confidence step is the first index of the earliest Stating Confidence
    subphase in the final phase, falling back to the final group's first
    index (None only for degenerate tiny traces with an empty final phase).
    """
    step_counts = tuple(g.step_count for g in structured.groups)
    subphase_counts = tuple(len(g.subphases) for g in structured.groups)
    total = structured.step_count
    shares = tuple(Fraction(c, total) for c in step_counts)

    final_group = structured.group(Phase.FINAL_DECISION)
    confidence_step: int | None = None
    for sub in final_group.subphases:
        if sub.subcategory is Subcategory.STATING_CONFIDENCE:
            confidence_step = sub.first_index
            break
    if confidence_step is None and final_group.subphases:
        confidence_step = final_group.subphases[0].first_index

    return TraceStats(
        step_shares=shares,  # type: ignore[arg-type]
        subphase_counts=subphase_counts,  # type: ignore[arg-type]
        step_counts=step_counts,  # type: ignore[arg-type]
        verification_share=shares[Phase.ITERATIVE_REFINEMENT_VERIFICATION.ordinal],
        confidence_step=confidence_step,
    )


def format_percent(share: Fraction) -> str:
    """Render a share as a percentage with one decimal place, rounding
    half-up: Fraction(98, 150) -> \"65.3%\"."""
    tenths = math.floor(share * 1000 + Fraction(1, 2))
    whole, tenth = divmod(tenths, 10)
    return f"{whole}.{tenth}%"


def stats_payload(stats: TraceStats) -> dict:
    """JSON-ready view: float shares plus display-ready percent strings."""
    return {
        "step_shares": [round(float(s), 6) for s in stats.step_shares],
        "step_shares_pct": [format_percent(s) for s in stats.step_shares],
        "subphase_counts": list(stats.subphase_counts),
        "step_counts": list(stats.step_counts),
        "verification_share": round(float(stats.verification_share), 6),
        "verification_share_pct": format_percent(stats.verification_share),
        "confidence_step": stats.confidence_step,
    }
