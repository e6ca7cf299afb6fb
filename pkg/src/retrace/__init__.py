"""retrace: structure, analyze, and lay out LRM reasoning traces.

Pipeline: `separator` splits raw provider output into indexed steps,
`annotator` groups steps into a taxonomy-structured trace (LLM-backed or
heuristic), `stats` computes phase distributions, `layout`/`svg` turn the
structure into deterministic view geometry, and `service` persists traces
and serves everything over HTTP.
"""

from .annotator import (
    AnnotationSkeleton,
    ProviderConfig,
    annotate_heuristic,
    annotate_llm,
    build_prompt,
    classify_step,
    parse_annotation,
    reconcile,
    repair,
    summarize,
)
from .layout import (
    ExpansionState,
    RenderNode,
    RenderTree,
    Viewport,
    layout_spacefill,
    layout_timeline,
    toggle,
)
from .model import (
    PhaseGroup,
    Provenance,
    SteppedTrace,
    StructuredTrace,
    Subphase,
    ValidationReport,
    decode_structured,
    encode_structured,
    validate,
)
from .separator import RawTrace, extract_reasoning, separate
from .stats import TraceStats, compute_stats, format_percent
from .svg import export_svg
from .taxonomy import TAXONOMY, Phase, Subcategory, resolve_subcategory

__version__ = "0.1.0"

__all__ = [
    "AnnotationSkeleton",
    "ExpansionState",
    "Phase",
    "PhaseGroup",
    "Provenance",
    "ProviderConfig",
    "RawTrace",
    "RenderNode",
    "RenderTree",
    "SteppedTrace",
    "StructuredTrace",
    "Subcategory",
    "Subphase",
    "TAXONOMY",
    "TraceStats",
    "ValidationReport",
    "Viewport",
    "annotate_heuristic",
    "annotate_llm",
    "build_prompt",
    "classify_step",
    "compute_stats",
    "decode_structured",
    "encode_structured",
    "export_svg",
    "extract_reasoning",
    "format_percent",
    "layout_spacefill",
    "layout_timeline",
    "parse_annotation",
    "reconcile",
    "repair",
    "resolve_subcategory",
    "separate",
    "summarize",
    "toggle",
    "validate",
    "__version__",
]
