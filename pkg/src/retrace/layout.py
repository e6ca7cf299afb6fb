"""Deterministic geometry for the two trace views.

Both layouts are pure functions of (structured trace, expansion state,
viewport) and emit a visualization-agnostic RenderTree. Proportional space
division runs on exact rationals and converts to floats only at the node
boundary, so sibling rects tile their parent to within float rounding and
repeated calls are byte-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Sequence

from .model import PhaseGroup, StructuredTrace, Subphase
from .stats import format_percent
from .taxonomy import Phase

__all__ = [
    "Viewport",
    "ExpansionState",
    "BadStateError",
    "UnknownNodeError",
    "NodeKind",
    "ViewKind",
    "RenderNode",
    "RenderTree",
    "allocate",
    "layout_spacefill",
    "layout_timeline",
    "toggle",
    "tree_payload",
    "EXPANSION_FRACTION",
    "TIMELINE_BAR_HEIGHT",
    "MIN_SEGMENT_WIDTH",
    "MIN_SUBPHASE_HEIGHT",
    "STEP_ROW_HEIGHT",
]

EXPANSION_FRACTION = 0.7  # width share of the expanded space-filling block
TIMELINE_BAR_HEIGHT = 48.0
MIN_SEGMENT_WIDTH = 60.0  # tiny phases stay clickable
MIN_SUBPHASE_HEIGHT = 40.0
STEP_ROW_HEIGHT = 28.0  # fixed row; client scrolls/clips overflow
SUMMARY_BOX_WIDTH = 220.0
SUMMARY_BOX_HEIGHT = 96.0
SUMMARY_BOX_GAP = 24.0

MIN_VIEWPORT_WIDTH = 320.0
MIN_VIEWPORT_HEIGHT = 240.0


class BadStateError(ValueError):
    """An expansion state violates its invariants for the given trace."""


class UnknownNodeError(KeyError):
    """A node id names neither a phase block nor a subphase block."""


@dataclass(frozen=True)
class Viewport:
    width: float
    height: float

    def __post_init__(self) -> None:
        if self.width < MIN_VIEWPORT_WIDTH or self.height < MIN_VIEWPORT_HEIGHT:
            raise ValueError(
                f"viewport must be at least {MIN_VIEWPORT_WIDTH:g}x{MIN_VIEWPORT_HEIGHT:g}"
            )


@dataclass(frozen=True)
class ExpansionState:
    """Which phase / subphase is drilled open. At most one of each; a subphase
    can only be open inside an open phase."""

    expanded_phase: int | None = None
    expanded_subphase: str | None = None

    def __post_init__(self) -> None:
        if self.expanded_phase is not None and not 0 <= self.expanded_phase <= 3:
            raise BadStateError(f"phase ordinal {self.expanded_phase} out of range")
        if self.expanded_subphase is not None and self.expanded_phase is None:
            raise BadStateError("a subphase cannot be expanded without its phase")

    def check(self, structured: StructuredTrace) -> None:
        """Verify the subphase, when present, belongs to the expanded phase."""
        if self.expanded_subphase is None:
            return
        found = structured.find_subphase(self.expanded_subphase)
        if found is None:
            raise BadStateError(f"no subphase {self.expanded_subphase!r} in trace")
        phase, _ = found
        if phase.ordinal != self.expanded_phase:
            raise BadStateError(
                f"{self.expanded_subphase!r} belongs to phase {phase.ordinal}, "
                f"not expanded phase {self.expanded_phase}"
            )


class NodeKind(Enum):
    PHASE_BLOCK = "PhaseBlock"
    SUBPHASE_BLOCK = "SubphaseBlock"
    STEP_TEXT = "StepText"
    SUMMARY_BOX = "SummaryBox"
    AXIS_SEGMENT = "AxisSegment"
    LINK_LINE = "LinkLine"
    LEGEND_ENTRY = "LegendEntry"
    DISTRIBUTION_BAR = "DistributionBar"


class ViewKind(Enum):
    SPACE_FILL = "spacefill"
    TIMELINE = "timeline"


Rect = tuple[float, float, float, float]


@dataclass(frozen=True)
class RenderNode:
    id: str
    kind: NodeKind
    rect: Rect
    color_key: int
    label: str = ""
    body: str = ""
    meta: dict = field(default_factory=dict)
    children: tuple["RenderNode", ...] = ()


@dataclass(frozen=True)
class RenderTree:
    view: ViewKind
    nodes: tuple[RenderNode, ...]
    legend: tuple[RenderNode, ...]
    viewport: Viewport


def allocate(
    total: float | Fraction, counts: Sequence[int], minimum: float | Fraction
) -> list[Fraction]:
    """Divide `total` proportionally to `counts` with a minimum share.

    Items below the minimum (including zero counts) are pinned to it and the
    remainder is re-shared proportionally until a fixpoint. When the minimum
    is unsatisfiable (minimum * n >= total) everything falls back to an equal
    split. Results are exact rationals summing to `total`.
    """
    n = len(counts)
    if n == 0:
        return []
    total_f, min_f = Fraction(total), Fraction(minimum)
    if min_f * n >= total_f:
        return [total_f / n] * n

    pinned: set[int] = {i for i, c in enumerate(counts) if c <= 0}
    while True:
        free = [i for i in range(n) if i not in pinned]
        if not free:
            return [total_f / n] * n
        remaining = total_f - min_f * len(pinned)
        weight = sum(counts[i] for i in free)
        shares = {i: remaining * counts[i] / weight for i in free}
        violators = [i for i in free if shares[i] < min_f]
        if not violators:
            return [min_f if i in pinned else shares[i] for i in range(n)]
        pinned.update(violators)


def _phase_meta(group: PhaseGroup, total_steps: int) -> dict:
    indices = group.step_indices
    return {
        "phase": group.phase.ordinal,
        "subphase_count": len(group.subphases),
        "step_count": group.step_count,
        "step_range": [min(indices), max(indices)] if indices else None,
        "share_pct": format_percent(Fraction(group.step_count, total_steps)),
        "empty": not group.subphases,
    }


def _subphase_meta(sub: Subphase) -> dict:
    return {
        "step_count": len(sub.step_indices),
        "step_range": [sub.first_index, sub.last_index],
        "subcategory": sub.subcategory.value,
    }


def _step_text_nodes(
    structured: StructuredTrace,
    sub: Subphase,
    x: float,
    width: float,
    first_row_y: float,
    color_key: int,
) -> tuple[RenderNode, ...]:
    rows = []
    for row, idx in enumerate(sub.step_indices):
        rows.append(
            RenderNode(
                id=f"{sub.id}_step_{idx}",
                kind=NodeKind.STEP_TEXT,
                rect=(x, first_row_y + row * STEP_ROW_HEIGHT, width, STEP_ROW_HEIGHT),
                color_key=color_key,
                label=f"step {idx}",
                body=structured.source.steps[idx],
                meta={"step_index": idx},
            )
        )
    return tuple(rows)


def _legend(vp: Viewport) -> tuple[RenderNode, ...]:
    del vp  # geometry is nominal; clients place the legend in their chrome
    entries = []
    for phase in Phase:
        entries.append(
            RenderNode(
                id=f"legend_{phase.ordinal}",
                kind=NodeKind.LEGEND_ENTRY,
                rect=(8.0 + phase.ordinal * 180.0, 8.0, 12.0, 12.0),
                color_key=phase.ordinal,
                label=phase.display_name,
            )
        )
    return tuple(entries)


def _spacefill_children(
    structured: StructuredTrace,
    group: PhaseGroup,
    rect: Rect,
    state: ExpansionState,
) -> tuple[RenderNode, ...]:
    subs = group.subphases
    if not subs:
        return ()
    x, y, w, h = rect
    heights = allocate(Fraction(h), [len(s.step_indices) for s in subs],
                       Fraction(MIN_SUBPHASE_HEIGHT))
    children = []
    offset = Fraction(0)
    for sub, height in zip(subs, heights):
        sub_rect = (x, y + float(offset), w, float(height))
        step_children: tuple[RenderNode, ...] = ()
        if state.expanded_subphase == sub.id:
            step_children = _step_text_nodes(
                structured, sub, x, w, sub_rect[1], group.phase.ordinal
            )
        children.append(
            RenderNode(
                id=sub.id,
                kind=NodeKind.SUBPHASE_BLOCK,
                rect=sub_rect,
                color_key=group.phase.ordinal,
                label=sub.subcategory.display_name,
                body=sub.summary,
                meta=_subphase_meta(sub),
                children=step_children,
            )
        )
        offset += height
    return tuple(children)


def layout_spacefill(
    structured: StructuredTrace,
    state: ExpansionState,
    vp: Viewport,
    expansion_fraction: float = EXPANSION_FRACTION,
) -> RenderTree:
    """Quadrant view: equal 2x2 grid collapsed; an expanded phase takes a
    full-height column of `expansion_fraction` width while the other three
    stack in the remaining column. Children tile their parent exactly."""
    state.check(structured)
    w, h = vp.width, vp.height
    total = structured.step_count

    rects: dict[int, Rect] = {}
    if state.expanded_phase is None:
        for ordinal in range(4):
            rects[ordinal] = (
                (ordinal % 2) * (w / 2),
                (ordinal // 2) * (h / 2),
                w / 2,
                h / 2,
            )
    else:
        expanded = state.expanded_phase
        expanded_width = expansion_fraction * w
        rects[expanded] = (0.0, 0.0, expanded_width, h)
        rest = [o for o in range(4) if o != expanded]
        for slot, ordinal in enumerate(rest):
            rects[ordinal] = (
                expanded_width,
                slot * (h / 3),
                w - expanded_width,  # exact complement keeps the tiling airtight
                h / 3,
            )

    nodes = []
    for group in structured.groups:
        ordinal = group.phase.ordinal
        children: tuple[RenderNode, ...] = ()
        if state.expanded_phase == ordinal:
            children = _spacefill_children(structured, group, rects[ordinal], state)
        nodes.append(
            RenderNode(
                id=f"phase_{ordinal}",
                kind=NodeKind.PHASE_BLOCK,
                rect=rects[ordinal],
                color_key=ordinal,
                label=group.phase.display_name,
                body=group.main_phase_summary,
                meta=_phase_meta(group, total),
                children=children,
            )
        )
    return RenderTree(
        view=ViewKind.SPACE_FILL,
        nodes=tuple(nodes),
        legend=_legend(vp),
        viewport=vp,
    )


def _summary_box(
    owner_id: str,
    label: str,
    body: str,
    color_key: int,
    center_x: float,
    vp: Viewport,
    target: str,
) -> tuple[RenderNode, RenderNode]:
    bar_y = vp.height - TIMELINE_BAR_HEIGHT
    box_y = bar_y - SUMMARY_BOX_GAP - SUMMARY_BOX_HEIGHT
    box_x = min(max(center_x - SUMMARY_BOX_WIDTH / 2, 0.0), vp.width - SUMMARY_BOX_WIDTH)
    box = RenderNode(
        id=f"summary_{owner_id}",
        kind=NodeKind.SUMMARY_BOX,
        rect=(box_x, box_y, SUMMARY_BOX_WIDTH, SUMMARY_BOX_HEIGHT),
        color_key=color_key,
        label=label,
        body=body,
        meta={"target": target},
    )
    box_center = box_x + SUMMARY_BOX_WIDTH / 2
    x1, y1 = center_x, bar_y
    x2, y2 = box_center, box_y + SUMMARY_BOX_HEIGHT
    link = RenderNode(
        id=f"link_{owner_id}",
        kind=NodeKind.LINK_LINE,
        rect=(min(x1, x2), min(y1, y2), abs(x2 - x1), abs(y2 - y1)),
        color_key=color_key,
        meta={"x1": x1, "y1": y1, "x2": x2, "y2": y2, "target": target},
    )
    return box, link


def layout_timeline(
    structured: StructuredTrace, state: ExpansionState, vp: Viewport
) -> RenderTree:
    """Chronological view: a bottom bar split into four segments whose widths
    encode step counts (minimum-width clamped), summary boxes linked above
    segment midpoints, and drill-down sub-segments / step rows on expansion."""
    state.check(structured)
    w, h = vp.width, vp.height
    total = structured.step_count
    bar_y = h - TIMELINE_BAR_HEIGHT

    widths = allocate(
        Fraction(w),
        [g.step_count for g in structured.groups],
        Fraction(MIN_SEGMENT_WIDTH),
    )
    segments: list[RenderNode] = []
    boxes: list[RenderNode] = []
    steps: list[RenderNode] = []
    offset = Fraction(0)
    for group, seg_width in zip(structured.groups, widths):
        ordinal = group.phase.ordinal
        seg_x = float(offset)
        seg_w = float(seg_width)
        children: tuple[RenderNode, ...] = ()

        if state.expanded_phase == ordinal and group.subphases:
            sub_widths = allocate(
                seg_width,
                [len(s.step_indices) for s in group.subphases],
                Fraction(MIN_SEGMENT_WIDTH),
            )
            sub_nodes = []
            sub_offset = offset
            for sub, sub_width in zip(group.subphases, sub_widths):
                sub_x, sub_w = float(sub_offset), float(sub_width)
                sub_nodes.append(
                    RenderNode(
                        id=sub.id,
                        kind=NodeKind.SUBPHASE_BLOCK,
                        rect=(sub_x, bar_y, sub_w, TIMELINE_BAR_HEIGHT),
                        color_key=ordinal,
                        label=sub.subcategory.display_name,
                        body=sub.summary,
                        meta=_subphase_meta(sub),
                    )
                )
                box, link = _summary_box(
                    sub.id,
                    sub.subcategory.display_name,
                    sub.summary,
                    ordinal,
                    sub_x + sub_w / 2,
                    vp,
                    target=sub.id,
                )
                boxes.extend((box, link))
                if state.expanded_subphase == sub.id:
                    count = len(sub.step_indices)
                    first_row_y = bar_y - STEP_ROW_HEIGHT * count
                    steps.extend(
                        _step_text_nodes(
                            structured, sub, sub_x, sub_w, first_row_y, ordinal
                        )
                    )
                sub_offset += sub_width
            children = tuple(sub_nodes)
        else:
            box, link = _summary_box(
                f"phase_{ordinal}",
                group.phase.display_name,
                group.main_phase_summary,
                ordinal,
                seg_x + seg_w / 2,
                vp,
                target=f"phase_{ordinal}",
            )
            boxes.extend((box, link))

        segments.append(
            RenderNode(
                id=f"phase_{ordinal}",
                kind=NodeKind.AXIS_SEGMENT,
                rect=(seg_x, bar_y, seg_w, TIMELINE_BAR_HEIGHT),
                color_key=ordinal,
                label=group.phase.display_name,
                body=group.main_phase_summary,
                meta=_phase_meta(group, total),
                children=children,
            )
        )
        offset += seg_width

    return RenderTree(
        view=ViewKind.TIMELINE,
        nodes=tuple(segments) + tuple(boxes) + tuple(steps),
        legend=_legend(vp),
        viewport=vp,
    )


def toggle(
    state: ExpansionState, node_id: str, structured: StructuredTrace
) -> ExpansionState:
    """Progressive-disclosure click rules.

    A collapsed phase expands (collapsing any other and clearing the open
    subphase); the expanded phase collapses; a subphase of the expanded phase
    toggles; a subphase of any other phase expands both at once.
    """
    if node_id.startswith("phase_") and node_id[len("phase_"):].isdigit():
        ordinal = int(node_id[len("phase_"):])
        if not 0 <= ordinal <= 3:
            raise UnknownNodeError(node_id)
        if state.expanded_phase == ordinal:
            return ExpansionState()
        return ExpansionState(expanded_phase=ordinal)

    found = structured.find_subphase(node_id)
    if found is None:
        raise UnknownNodeError(node_id)
    phase, sub = found
    if state.expanded_phase == phase.ordinal and state.expanded_subphase == sub.id:
        return ExpansionState(expanded_phase=phase.ordinal)
    return ExpansionState(expanded_phase=phase.ordinal, expanded_subphase=sub.id)


def _node_payload(node: RenderNode) -> dict:
    return {
        "id": node.id,
        "kind": node.kind.value,
        "rect": list(node.rect),
        "color_key": node.color_key,
        "label": node.label,
        "body": node.body,
        "meta": node.meta,
        "children": [_node_payload(c) for c in node.children],
    }


def tree_payload(tree: RenderTree) -> dict:
    """JSON-ready form of a render tree."""
    return {
        "view": tree.view.value,
        "viewport": {"width": tree.viewport.width, "height": tree.viewport.height},
        "legend": [_node_payload(n) for n in tree.legend],
        "nodes": [_node_payload(n) for n in tree.nodes],
    }
