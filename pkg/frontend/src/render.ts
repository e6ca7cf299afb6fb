/** Render a service-computed RenderTree as SVG.
 *
 * One element per node, geometry taken verbatim; children paint after their
 * parent so expanded detail stays in the foreground. Click resolution is
 * data-attribute based: the controller reads node id/kind/phase back off the
 * clicked element.
 */

import type { RenderNode, RenderTree } from "./types.js";

export const PALETTE = ["#4C78A8", "#F58518", "#54A24B", "#B279A2"];

const SVG_NS = "http://www.w3.org/2000/svg";

class MalformedTreeError extends Error {}

function assertTree(tree: RenderTree): void {
  if (!tree || !Array.isArray(tree.nodes) || !Array.isArray(tree.legend)) {
    throw new MalformedTreeError("layout document has no nodes");
  }
  if (!tree.viewport || !(tree.viewport.width > 0) || !(tree.viewport.height > 0)) {
    throw new MalformedTreeError("layout document has no viewport");
  }
}

function svgElement(tag: string): SVGElement {
  return document.createElementNS(SVG_NS, tag);
}

function text(
  x: number,
  y: number,
  content: string,
  size: number,
  fill: string,
  bold = false,
): SVGElement {
  const el = svgElement("text");
  el.setAttribute("x", String(x));
  el.setAttribute("y", String(y));
  el.setAttribute("font-size", String(size));
  el.setAttribute("fill", fill);
  el.setAttribute("font-family", "system-ui, sans-serif");
  if (bold) el.setAttribute("font-weight", "600");
  el.setAttribute("pointer-events", "none");
  el.textContent = content;
  return el;
}

function clippedText(
  node: RenderNode,
  content: string,
  dy: number,
  size: number,
  fill: string,
  bold = false,
): SVGElement {
  const [x, y, w] = node.rect;
  const el = text(x + 8, y + dy, content, size, fill, bold);
  // crude clip: drop characters that cannot fit the box width
  const capacity = Math.max(0, Math.floor((w - 16) / (size * 0.55)));
  if (content.length > capacity) {
    el.textContent = capacity > 3 ? `${content.slice(0, capacity - 3)}...` : "";
  }
  return el;
}

function rectFor(node: RenderNode, fill: string, extra?: (el: SVGElement) => void): SVGElement {
  const [x, y, w, h] = node.rect;
  const el = svgElement("rect");
  el.setAttribute("x", String(x));
  el.setAttribute("y", String(y));
  el.setAttribute("width", String(Math.max(w, 0)));
  el.setAttribute("height", String(Math.max(h, 0)));
  el.setAttribute("fill", fill);
  el.dataset.nodeId = node.id;
  el.dataset.kind = node.kind;
  el.dataset.phase = String(node.color_key);
  if (extra) extra(el);
  return el;
}

function countsLine(node: RenderNode): string {
  const meta = node.meta as { subphase_count?: number; step_count?: number; share_pct?: string };
  if (meta.subphase_count === undefined || meta.step_count === undefined) return "";
  const share = meta.share_pct ? ` (${meta.share_pct})` : "";
  return `${meta.subphase_count} subphases, ${meta.step_count} steps${share}`;
}

function renderNode(node: RenderNode, into: SVGElement): void {
  const color = PALETTE[node.color_key] ?? PALETTE[0];
  const [x, y, , h] = node.rect;

  switch (node.kind) {
    case "PhaseBlock":
    case "AxisSegment": {
      into.appendChild(
        rectFor(node, color, (el) => {
          el.setAttribute("stroke", "#ffffff");
          el.setAttribute("stroke-width", "2");
          el.classList.add("clickable");
        }),
      );
      into.appendChild(clippedText(node, node.label, 20, 14, "#ffffff", true));
      if (node.kind === "PhaseBlock" && node.body) {
        into.appendChild(clippedText(node, node.body, 40, 12, "#ffffff"));
      }
      const counts = countsLine(node);
      if (counts) into.appendChild(clippedText(node, counts, h - 10, 11, "#ffffff"));
      const empty = (node.meta as { empty?: boolean }).empty;
      if (empty) into.appendChild(clippedText(node, "(empty)", h / 2, 11, "#ffffff"));
      break;
    }
    case "SubphaseBlock": {
      into.appendChild(
        rectFor(node, color, (el) => {
          el.setAttribute("fill-opacity", "0.72");
          el.setAttribute("stroke", "#ffffff");
          el.setAttribute("stroke-width", "1.5");
          el.classList.add("clickable");
        }),
      );
      into.appendChild(clippedText(node, node.label, 16, 12, "#ffffff", true));
      if (node.body) into.appendChild(clippedText(node, node.body, 32, 11, "#ffffff"));
      break;
    }
    case "StepText": {
      into.appendChild(
        rectFor(node, "#ffffff", (el) => el.setAttribute("fill-opacity", "0.92")),
      );
      into.appendChild(
        clippedText(node, `[${node.label}] ${node.body}`, 18, 11, "#1f1f1f"),
      );
      break;
    }
    case "SummaryBox": {
      into.appendChild(
        rectFor(node, "#ffffff", (el) => {
          el.setAttribute("stroke", color);
          el.setAttribute("stroke-width", "2");
          el.classList.add("clickable");
          const target = (node.meta as { target?: string }).target;
          if (target) el.dataset.target = target;
        }),
      );
      into.appendChild(clippedText(node, node.label, 20, 12, "#1f1f1f", true));
      if (node.body) into.appendChild(clippedText(node, node.body, 38, 11, "#1f1f1f"));
      break;
    }
    case "LinkLine": {
      const meta = node.meta as { x1: number; y1: number; x2: number; y2: number };
      const line = svgElement("line");
      line.setAttribute("x1", String(meta.x1));
      line.setAttribute("y1", String(meta.y1));
      line.setAttribute("x2", String(meta.x2));
      line.setAttribute("y2", String(meta.y2));
      line.setAttribute("stroke", color);
      line.setAttribute("stroke-width", "1.5");
      line.dataset.nodeId = node.id;
      line.dataset.kind = node.kind;
      into.appendChild(line);
      break;
    }
    default: {
      into.appendChild(rectFor(node, color));
      break;
    }
  }
  void x;
  void y;
  for (const child of node.children) renderNode(child, into);
}

/** Build the full SVG scene for a tree. Throws on malformed documents so the
 * caller can keep the previous scene visible. */
export function renderTree(tree: RenderTree): SVGSVGElement {
  assertTree(tree);
  const svg = svgElement("svg") as SVGSVGElement;
  svg.setAttribute("xmlns", SVG_NS);
  svg.setAttribute(
    "viewBox",
    `0 0 ${tree.viewport.width} ${tree.viewport.height}`,
  );
  svg.setAttribute("width", "100%");
  svg.setAttribute("height", "100%");
  svg.dataset.view = tree.view;

  const scene = svgElement("g");
  scene.classList.add("scene");
  for (const node of tree.nodes) renderNode(node, scene);
  svg.appendChild(scene);
  return svg;
}

/** Legend chips as plain HTML; stays visible regardless of scene state. */
export function renderLegend(tree: RenderTree, into: HTMLElement): void {
  into.replaceChildren();
  for (const entry of tree.legend) {
    const chip = document.createElement("span");
    chip.className = "legend-entry";
    chip.dataset.kind = entry.kind;
    const swatch = document.createElement("span");
    swatch.className = "legend-swatch";
    swatch.style.backgroundColor = PALETTE[entry.color_key] ?? PALETTE[0];
    const label = document.createElement("span");
    label.textContent = entry.label;
    chip.append(swatch, label);
    into.appendChild(chip);
  }
}
