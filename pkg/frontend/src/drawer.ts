/** Collapsible bottom drawer: the exact question given to the model, its
 * final answer, and (in the space-filling view only) the phase distribution
 * bar built from the stats document. The timeline carries its distribution
 * in the axis itself, so the bar is omitted there. */

import { PALETTE } from "./render.js";
import type { TraceDocument, TraceStats, ViewName } from "./types.js";

export class Drawer {
  private open = true;
  private readonly body: HTMLElement;
  private readonly toggleButton: HTMLButtonElement;

  constructor(private readonly root: HTMLElement) {
    this.toggleButton = document.createElement("button");
    this.toggleButton.className = "drawer-toggle";
    this.toggleButton.addEventListener("click", () => this.setOpen(!this.open));
    this.body = document.createElement("div");
    this.body.className = "drawer-body";
    this.root.append(this.toggleButton, this.body);
    this.setOpen(true);
  }

  setOpen(open: boolean): void {
    this.open = open;
    this.toggleButton.textContent = open ? "Hide task ▾" : "Show task ▴";
    this.body.hidden = !open;
  }

  isOpen(): boolean {
    return this.open;
  }

  update(document_: TraceDocument, stats: TraceStats, view: ViewName): void {
    this.body.replaceChildren();

    if (view === "spacefill") {
      const bar = document.createElement("div");
      bar.className = "distribution-bar";
      bar.dataset.kind = "DistributionBar";
      stats.step_shares.forEach((share, ordinal) => {
        const segment = document.createElement("span");
        segment.className = "distribution-segment";
        segment.style.width = `${share * 100}%`;
        segment.style.backgroundColor = PALETTE[ordinal];
        segment.title = `${stats.step_shares_pct[ordinal]} of steps`;
        bar.appendChild(segment);
      });
      this.body.appendChild(bar);
    }

    const question = document.createElement("div");
    question.className = "drawer-question";
    question.textContent = `Question: ${document_.question}`;
    const answer = document.createElement("div");
    answer.className = "drawer-answer";
    answer.textContent = `Final answer: ${document_.final_answer}`;
    this.body.append(question, answer);
  }
}
