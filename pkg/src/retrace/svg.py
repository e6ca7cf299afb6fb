"""Static SVG export of render trees.

Output is byte-stable: numbers go through one fixed formatter, attributes are
emitted in a fixed order, and element order follows tree order. Colors come
from a four-entry palette keyed by phase ordinal; callers may pass their own.
"""

from __future__ import annotations

from xml.sax.saxutils import escape, quoteattr

from .layout import NodeKind, RenderNode, RenderTree

__all__ = ["DEFAULT_PALETTE", "export_svg"]

# one color per phase ordinal 0..3 (documented in the README, overridable)
DEFAULT_PALETTE = ("#4C78A8", "#F58518", "#54A24B", "#B279A2")

_TEXT_DARK = "#1f1f1f"
_TEXT_LIGHT = "#ffffff"


def _fmt(value: float) -> str:
    if abs(value - round(value)) < 1e-9:
        return str(int(round(value)))
    return f"{value:.2f}"


def _rect(x: float, y: float, w: float, h: float, fill: str, extra: str = "") -> str:
    return (
        f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(w)}" height="{_fmt(h)}" '
        f'fill={quoteattr(fill)}{extra}/>'
    )


def _text(x: float, y: float, content: str, size: int, fill: str, bold: bool = False) -> str:
    weight = ' font-weight="bold"' if bold else ""
    return (
        f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-family="sans-serif" '
        f'font-size="{size}" fill={quoteattr(fill)}{weight}>{escape(content)}</text>'
    )


def _counts_line(meta: dict) -> str:
    if "subphase_count" in meta:
        return f"{meta['subphase_count']} subphases, {meta['step_count']} steps"
    if "step_count" in meta:
        return f"{meta['step_count']} steps"
    return ""


def _emit_node(node: RenderNode, palette: tuple[str, ...], out: list[str]) -> None:
    x, y, w, h = node.rect
    color = palette[node.color_key]
    kind = node.kind

    if kind in (NodeKind.PHASE_BLOCK, NodeKind.AXIS_SEGMENT):
        out.append(_rect(x, y, w, h, color, ' stroke="#ffffff" stroke-width="2"'))
        out.append(_text(x + 8, y + 18, node.label, 14, _TEXT_LIGHT, bold=True))
        if node.body and kind is NodeKind.PHASE_BLOCK:
            # axis segments are short; their summary lives in the linked box
            out.append(_text(x + 8, y + 36, node.body, 12, _TEXT_LIGHT))
        counts = _counts_line(node.meta)
        if counts:
            share = node.meta.get("share_pct")
            if share:
                counts = f"{counts} ({share})"
            out.append(_text(x + 8, y + h - 8, counts, 11, _TEXT_LIGHT))
    elif kind is NodeKind.SUBPHASE_BLOCK:
        out.append(
            _rect(x, y, w, h, color, ' fill-opacity="0.72" stroke="#ffffff" stroke-width="1.5"')
        )
        out.append(_text(x + 8, y + 16, node.label, 12, _TEXT_LIGHT, bold=True))
        if node.body:
            out.append(_text(x + 8, y + 32, node.body, 11, _TEXT_LIGHT))
    elif kind is NodeKind.STEP_TEXT:
        out.append(_rect(x, y, w, h, "#ffffff", ' fill-opacity="0.92"'))
        out.append(_text(x + 6, y + 18, f"[{node.label}] {node.body}", 11, _TEXT_DARK))
    elif kind is NodeKind.SUMMARY_BOX:
        out.append(
            _rect(x, y, w, h, "#ffffff", f' stroke={quoteattr(color)} stroke-width="2"')
        )
        out.append(_text(x + 8, y + 18, node.label, 12, _TEXT_DARK, bold=True))
        if node.body:
            out.append(_text(x + 8, y + 36, node.body, 11, _TEXT_DARK))
    elif kind is NodeKind.LINK_LINE:
        meta = node.meta
        out.append(
            f'<line x1="{_fmt(meta["x1"])}" y1="{_fmt(meta["y1"])}" '
            f'x2="{_fmt(meta["x2"])}" y2="{_fmt(meta["y2"])}" '
            f'stroke={quoteattr(color)} stroke-width="1.5"/>'
        )
    elif kind is NodeKind.LEGEND_ENTRY:
        out.append(_rect(x, y, w, h, color))
        out.append(_text(x + w + 6, y + h - 2, node.label, 11, _TEXT_DARK))
    elif kind is NodeKind.DISTRIBUTION_BAR:
        out.append(_rect(x, y, w, h, color))

    for child in node.children:
        _emit_node(child, palette, out)


def export_svg(tree: RenderTree, palette: tuple[str, ...] = DEFAULT_PALETTE) -> str:
    """Serialize a render tree to an SVG 1.1 document."""
    if len(palette) != 4:
        raise ValueError("palette must name exactly 4 colors")
    width, height = tree.viewport.width, tree.viewport.height
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" '
        f'height="{_fmt(height)}" viewBox="0 0 {_fmt(width)} {_fmt(height)}">',
        _rect(0, 0, width, height, "#ffffff"),
    ]
    for node in tree.nodes:
        _emit_node(node, palette, out)
    for entry in tree.legend:
        _emit_node(entry, palette, out)
    out.append("</svg>")
    return "\n".join(out) + "\n"
