/** Controller: owns the UI session (view choice, expansion state, drawer),
 * requests layouts, and renders scenes.
 *
 * One in-flight layout request at a time semantically: every request carries
 * a sequence number and responses that arrive for a superseded state are
 * dropped, so a slow earlier response can never clobber a newer scene.
 */

import type { TraceApi } from "./api.js";
import { Drawer } from "./drawer.js";
import { renderLegend, renderTree } from "./render.js";
import { COLLAPSED, isValidState, nextState } from "./state.js";
import type {
  ExpansionState,
  NodeKind,
  RenderTree,
  TraceDocument,
  TraceStats,
  ViewName,
} from "./types.js";

export interface AppElements {
  scene: HTMLElement;
  legend: HTMLElement;
  drawer: HTMLElement;
  error: HTMLElement;
  viewButtons: Record<ViewName, HTMLButtonElement>;
}

export class App {
  private traceId: string | null = null;
  private view: ViewName = "spacefill";
  private expansion: ExpansionState = COLLAPSED;
  private document_: TraceDocument | null = null;
  private stats: TraceStats | null = null;
  private sequence = 0;
  private readonly drawer: Drawer;
  /** pan/zoom transform applied client-side over the delivered scene */
  private transform = { x: 0, y: 0, scale: 1 };

  constructor(
    private readonly api: TraceApi,
    private readonly elements: AppElements,
    private readonly viewportSize: () => { width: number; height: number },
  ) {
    this.drawer = new Drawer(elements.drawer);
    elements.viewButtons.spacefill.addEventListener("click", () => {
      void this.setView("spacefill");
    });
    elements.viewButtons.timeline.addEventListener("click", () => {
      void this.setView("timeline");
    });
    elements.scene.addEventListener("click", (event) => {
      void this.handleClick(event);
    });
  }

  async load(traceId: string): Promise<void> {
    this.traceId = traceId;
    this.expansion = COLLAPSED;
    const [document_, stats] = await Promise.all([
      this.api.getDocument(traceId),
      this.api.getStats(traceId),
    ]);
    this.document_ = document_;
    this.stats = stats;
    await this.refresh();
  }

  getExpansion(): ExpansionState {
    return this.expansion;
  }

  getView(): ViewName {
    return this.view;
  }

  async setView(view: ViewName): Promise<void> {
    if (view === this.view) return;
    this.view = view;
    // drill-down state carries across views; only the geometry changes
    await this.refresh();
  }

  /** Resolve a scene click to a disclosure change and re-render. */
  async handleClick(event: Event): Promise<void> {
    const target = event.target as Element | null;
    if (!target || !(target instanceof Element)) return;
    const carrier = target.closest<Element>("[data-node-id]");
    if (!carrier) return;

    let nodeId = (carrier as HTMLElement).dataset.nodeId ?? "";
    let kind = ((carrier as HTMLElement).dataset.kind ?? "") as NodeKind;
    const phase = Number((carrier as HTMLElement).dataset.phase ?? "-1");
    const boxTarget = (carrier as HTMLElement).dataset.target;
    if (kind === "SummaryBox" && boxTarget) {
      // clicking a summary box acts on the node it describes
      nodeId = boxTarget;
      kind = boxTarget.startsWith("phase_")
        ? this.view === "timeline"
          ? "AxisSegment"
          : "PhaseBlock"
        : "SubphaseBlock";
    }

    const next = nextState(this.expansion, { nodeId, kind, phase });
    if (next === null || !isValidState(next)) return;
    this.expansion = next;
    await this.refresh();
  }

  /** Request the layout for the current session; stale responses are
   * discarded by sequence number. */
  async refresh(): Promise<void> {
    if (!this.traceId) return;
    const requested = ++this.sequence;
    let tree: RenderTree;
    try {
      tree = await this.api.getLayout(
        this.traceId,
        this.view,
        this.expansion,
        this.viewportSize(),
      );
    } catch (error) {
      this.showError(String(error));
      return;
    }
    if (requested !== this.sequence) {
      return; // superseded while in flight
    }
    this.renderScene(tree);
  }

  private renderScene(tree: RenderTree): void {
    let svg: SVGSVGElement;
    try {
      svg = renderTree(tree);
    } catch (error) {
      this.showError(`malformed layout document: ${String(error)}`);
      return; // previous scene stays up
    }
    this.clearError();
    this.attachPanZoom(svg);
    this.elements.scene.replaceChildren(svg);
    renderLegend(tree, this.elements.legend);
    if (this.document_ && this.stats) {
      this.drawer.update(this.document_, this.stats, this.view);
    }
  }

  private applyTransform(svg: SVGSVGElement): void {
    const scene = svg.querySelector<SVGGElement>("g.scene");
    if (scene) {
      const { x, y, scale } = this.transform;
      scene.setAttribute("transform", `translate(${x} ${y}) scale(${scale})`);
    }
  }

  private attachPanZoom(svg: SVGSVGElement): void {
    this.applyTransform(svg);
    svg.addEventListener("wheel", (event) => {
      event.preventDefault();
      const factor = event.deltaY < 0 ? 1.1 : 1 / 1.1;
      this.transform.scale = Math.min(8, Math.max(0.25, this.transform.scale * factor));
      this.applyTransform(svg);
    });
    let dragging: { x: number; y: number } | null = null;
    svg.addEventListener("mousedown", (event) => {
      dragging = { x: event.clientX - this.transform.x, y: event.clientY - this.transform.y };
    });
    svg.addEventListener("mousemove", (event) => {
      if (!dragging) return;
      this.transform.x = event.clientX - dragging.x;
      this.transform.y = event.clientY - dragging.y;
      this.applyTransform(svg);
    });
    svg.addEventListener("mouseup", () => {
      dragging = null;
    });
    svg.addEventListener("mouseleave", () => {
      dragging = null;
    });
  }

  private showError(message: string): void {
    this.elements.error.hidden = false;
    this.elements.error.textContent = message;
  }

  private clearError(): void {
    this.elements.error.hidden = true;
    this.elements.error.textContent = "";
  }
}
