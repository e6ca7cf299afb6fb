/** Client-side expansion state and the drill-down click rules.
 *
 * The service owns geometry; the client owns only which phase/subphase is
 * open. These rules mirror the service's toggle contract so a click can be
 * resolved locally before asking for a fresh layout.
 */

import type { ExpansionState, NodeKind } from "./types.js";

export const COLLAPSED: ExpansionState = {
  expanded_phase: null,
  expanded_subphase: null,
};

export function isValidState(state: ExpansionState): boolean {
  if (state.expanded_phase !== null) {
    if (!Number.isInteger(state.expanded_phase)) return false;
    if (state.expanded_phase < 0 || state.expanded_phase > 3) return false;
  }
  if (state.expanded_subphase !== null && state.expanded_phase === null) {
    return false;
  }
  return true;
}

export interface ClickTarget {
  nodeId: string;
  kind: NodeKind;
  /** phase ordinal the node belongs to (the node's color key) */
  phase: number;
}

/** Next expansion state after clicking a phase or subphase node.
 * Returns null for clicks that do not change disclosure (step rows, boxes
 * without targets, legend chips). */
export function nextState(
  current: ExpansionState,
  target: ClickTarget,
): ExpansionState | null {
  if (target.kind === "PhaseBlock" || target.kind === "AxisSegment") {
    if (current.expanded_phase === target.phase) {
      return COLLAPSED;
    }
    return { expanded_phase: target.phase, expanded_subphase: null };
  }
  if (target.kind === "SubphaseBlock") {
    if (
      current.expanded_phase === target.phase &&
      current.expanded_subphase === target.nodeId
    ) {
      return { expanded_phase: target.phase, expanded_subphase: null };
    }
    return { expanded_phase: target.phase, expanded_subphase: target.nodeId };
  }
  return null;
}
