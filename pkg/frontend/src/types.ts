/** Wire formats served by the trace service. The client never computes
 * geometry; it renders these documents as delivered. */

export type ViewName = "spacefill" | "timeline";

export type NodeKind =
  | "PhaseBlock"
  | "SubphaseBlock"
  | "StepText"
  | "SummaryBox"
  | "AxisSegment"
  | "LinkLine"
  | "LegendEntry"
  | "DistributionBar";

export interface RenderNode {
  id: string;
  kind: NodeKind;
  /** [x, y, width, height] */
  rect: number[];
  color_key: number;
  label: string;
  body: string;
  meta: Record<string, unknown>;
  children: RenderNode[];
}

export interface RenderTree {
  view: ViewName;
  viewport: { width: number; height: number };
  legend: RenderNode[];
  nodes: RenderNode[];
}

export interface ExpansionState {
  expanded_phase: number | null;
  expanded_subphase: string | null;
}

export interface TraceStats {
  step_shares: number[];
  step_shares_pct: string[];
  subphase_counts: number[];
  step_counts: number[];
  verification_share: number;
  verification_share_pct: string;
  confidence_step: number | null;
}

export interface TraceDocument {
  steps: string[];
  question: string;
  final_answer: string;
  source_model: string;
  provenance: string;
}
