import { describe, expect, it } from "vitest";

import { COLLAPSED, isValidState, nextState } from "../src/state.js";

describe("expansion state invariants", () => {
  it("accepts collapsed and phase-only states", () => {
    expect(isValidState(COLLAPSED)).toBe(true);
    expect(isValidState({ expanded_phase: 2, expanded_subphase: null })).toBe(true);
    expect(
      isValidState({ expanded_phase: 2, expanded_subphase: "subphase_6" }),
    ).toBe(true);
  });

  it("rejects a subphase without its phase", () => {
    expect(
      isValidState({ expanded_phase: null, expanded_subphase: "subphase_6" }),
    ).toBe(false);
  });

  it("rejects out-of-range phases", () => {
    expect(isValidState({ expanded_phase: 4, expanded_subphase: null })).toBe(false);
    expect(isValidState({ expanded_phase: -1, expanded_subphase: null })).toBe(false);
  });
});

describe("drill-down click rules", () => {
  const phase1 = { nodeId: "phase_1", kind: "PhaseBlock" as const, phase: 1 };
  const sub3 = { nodeId: "subphase_3", kind: "SubphaseBlock" as const, phase: 1 };

  it("expands a collapsed phase and collapses it again", () => {
    const opened = nextState(COLLAPSED, phase1);
    expect(opened).toEqual({ expanded_phase: 1, expanded_subphase: null });
    expect(nextState(opened!, phase1)).toEqual(COLLAPSED);
  });

  it("switching phases clears the open subphase", () => {
    const state = { expanded_phase: 1, expanded_subphase: "subphase_3" };
    const next = nextState(state, { nodeId: "phase_2", kind: "AxisSegment", phase: 2 });
    expect(next).toEqual({ expanded_phase: 2, expanded_subphase: null });
  });

  it("toggles a subphase inside its expanded phase", () => {
    const opened = nextState({ expanded_phase: 1, expanded_subphase: null }, sub3);
    expect(opened).toEqual({ expanded_phase: 1, expanded_subphase: "subphase_3" });
    expect(nextState(opened!, sub3)).toEqual({
      expanded_phase: 1,
      expanded_subphase: null,
    });
  });

  it("clicking a subphase of a collapsed phase opens both", () => {
    expect(nextState(COLLAPSED, sub3)).toEqual({
      expanded_phase: 1,
      expanded_subphase: "subphase_3",
    });
  });

  it("non-disclosure nodes yield no state change", () => {
    expect(
      nextState(COLLAPSED, { nodeId: "x", kind: "StepText", phase: 2 }),
    ).toBeNull();
    expect(
      nextState(COLLAPSED, { nodeId: "legend_0", kind: "LegendEntry", phase: 0 }),
    ).toBeNull();
  });

  it("every produced state satisfies the invariants", () => {
    const targets = [phase1, sub3, { nodeId: "phase_3", kind: "AxisSegment" as const, phase: 3 }];
    let state = COLLAPSED;
    for (let i = 0; i < 20; i += 1) {
      const next = nextState(state, targets[i % targets.length]!);
      if (next) {
        expect(isValidState(next)).toBe(true);
        state = next;
      }
    }
  });
});
