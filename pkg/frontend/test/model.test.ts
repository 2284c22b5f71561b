import { describe, expect, it } from "vitest";

import {
  canSubmit,
  curveView,
  draftIsStale,
  linearScale,
  markReviewed,
  newDraft,
  pickSuggestion,
  refreshDraft,
  rewardBars,
  toRequest,
  transectView,
} from "../src/model.js";
import type {
  BeliefResponse,
  CurveResponse,
  RoundResponse,
  SessionState,
} from "../src/types.js";

function measurement(location: number, strength = 20, valid = true) {
  return {
    location,
    location_m: location * 55,
    strength,
    curve_id: `m${Math.round(location * 100)}`,
    gait: "crawl_n_sense",
    timestamp: 0,
    valid,
    cost_s: 35,
    curve_digest: "x",
    summary: {
      depth_at_10N: null,
      depth_at_20N: null,
      depth_at_30N: null,
      terminal_force: 1,
      fitted_k: strength,
    },
  };
}

function sessionWith(locations: number[]): SessionState {
  return {
    id: "s1",
    seed: 0,
    status: "open",
    length_m: 55,
    candidate_count: 101,
    weight: 0.8,
    hypothesis: { shape: "monotone_increasing" },
    measurements: locations.map((x) => measurement(x)),
    rounds: [],
    decisions: [],
    queue: [],
    event_count: 1,
  };
}

function roundOf(locs: number[], round = 1): RoundResponse {
  return {
    round,
    weight: 0.7,
    suggestions: locs.map((x, i) => ({
      location: x,
      explore_reward: 0.9 - i * 0.1,
      verify_reward: 0.2,
      weight: 0.7,
      combined: 0.7 * (0.9 - i * 0.1) + 0.3 * 0.2,
      explanation: `explanation ${i}`,
    })),
  };
}

describe("transectView", () => {
  it("renders one flag per valid measurement", () => {
    const view = transectView(sessionWith([0, 0.25, 0.5, 0.75, 1]), null, null);
    expect(view.flags).toHaveLength(5);
  });

  it("drops aborted measurements from the flags", () => {
    const s = sessionWith([0, 0.5]);
    s.measurements.push(measurement(0.9, 0, false));
    const view = transectView(s, null, null);
    expect(view.flags).toHaveLength(2);
  });

  it("marks k suggestions with the top one ranked first", () => {
    const view = transectView(
      sessionWith([0, 1]),
      null,
      roundOf([0.5, 0.3, 0.7]),
    );
    expect(view.suggestionMarkers).toHaveLength(3);
    expect(view.suggestionMarkers[0]!.rank).toBe(1);
    expect(view.suggestionMarkers[0]!.location).toBe(0.5);
    const annotated = view.suggestionMarkers[0]!;
    expect(annotated.explore).toBeCloseTo(0.9);
    expect(annotated.verify).toBeCloseTo(0.2);
    expect(annotated.weight).toBeCloseTo(0.7);
  });

  it("builds belief band and hypothesis overlay paths", () => {
    const belief: BeliefResponse = {
      candidates: [0, 0.5, 1],
      mean: [10, 20, 30],
      uncertainty: [1, 5, 1],
      hypothesis_template: [0, 0.5, 1],
    };
    const view = transectView(sessionWith([0, 1]), belief, null);
    expect(view.beliefPath.startsWith("M")).toBe(true);
    expect(view.bandPath.endsWith("Z")).toBe(true);
    expect(view.overlayPath).not.toBeNull();
  });

  it("scales positions onto the drawing area", () => {
    const s = linearScale(0, 1, 40, 710);
    expect(s(0)).toBe(40);
    expect(s(1)).toBe(710);
    expect(s(0.5)).toBeCloseTo(375);
  });
});

describe("rewardBars", () => {
  it("stacks weight-scaled explore and verify contributions", () => {
    const bars = rewardBars(roundOf([0.5, 0.3]));
    expect(bars).toHaveLength(2);
    expect(bars[0]!.explorePart).toBeCloseTo(0.7 * 0.9);
    expect(bars[0]!.verifyPart).toBeCloseTo(0.3 * 0.2);
    expect(bars[0]!.top).toBe(true);
    expect(bars[1]!.top).toBe(false);
    expect(bars[0]!.explanation).toBe("explanation 0");
  });
});

describe("curveView", () => {
  const curve: CurveResponse = {
    measurement_id: "m1",
    provenance: "leg_estimate",
    valid: true,
    depth_m: [0, 0.01, 0.02, 0.03],
    force_N: [0, 5, 15, 3],
    summary: {
      depth_at_10N: 0.015,
      depth_at_20N: null,
      depth_at_30N: null,
      terminal_force: 3,
      fitted_k: 300,
    },
    regime: "crust_then_linear",
    confidence: 0.93,
    ruptures: [{ depth_m: 0.02, drop_N: 12 }],
  };

  it("plots the polyline and rupture markers with the regime caption", () => {
    const view = curveView(curve);
    expect(view.path.startsWith("M")).toBe(true);
    expect(view.ruptureMarkers).toHaveLength(1);
    expect(view.caption).toContain("crust_then_linear");
    expect(view.caption).toContain("0.93");
  });

  it("labels aborted curves", () => {
    const view = curveView({ ...curve, valid: false, regime: null, confidence: null });
    expect(view.caption).toBe("aborted measurement");
  });
});

describe("decision draft state machine", () => {
  it("opens against the round with the top suggestion preselected", () => {
    const draft = newDraft(roundOf([0.5, 0.3]));
    expect(draft.round).toBe(1);
    expect(draft.location).toBe(0.5);
    expect(draft.outcome).toBe("accept");
  });

  it("cannot submit against a superseded round", () => {
    const draft = newDraft(roundOf([0.5]));
    expect(canSubmit(draft, 1)).toBe(true);
    expect(canSubmit(draft, 2)).toBe(false);
    expect(draftIsStale(draft, 2)).toBe(true);
  });

  it("refreshing a stale draft preserves the choices for re-review", () => {
    let draft = newDraft(roundOf([0.5, 0.3]));
    draft = { ...draft, outcome: "reject", feedback: "objective", statedObjective: "verify" };
    const fresh = roundOf([0.3, 0.8], 2);
    const refreshed = refreshDraft(draft, fresh);
    expect(refreshed.round).toBe(2);
    expect(refreshed.outcome).toBe("reject");
    expect(refreshed.feedback).toBe("objective");
    expect(refreshed.statedObjective).toBe("verify");
    expect(refreshed.needsReview).toBe(true);
    expect(canSubmit(refreshed, 2)).toBe(false); // must be reviewed first
    expect(canSubmit(markReviewed(refreshed), 2)).toBe(true);
  });

  it("re-anchors the selected location when it left the round", () => {
    const draft = newDraft(roundOf([0.5, 0.3]));
    const fresh = roundOf([0.2, 0.8], 2);
    expect(refreshDraft(draft, fresh).location).toBe(0.2);
    const kept = roundOf([0.9, 0.5], 2);
    expect(refreshDraft(draft, kept).location).toBe(0.5);
  });

  it("requires an alternative location for reject_alt", () => {
    let draft = newDraft(roundOf([0.5]));
    draft = { ...draft, outcome: "reject_alt" };
    expect(canSubmit(draft, 1)).toBe(false);
    draft = { ...draft, alternative: 0.42 };
    expect(canSubmit(draft, 1)).toBe(true);
    expect(toRequest(draft).alternative).toBe(0.42);
  });

  it("requires a stated objective for objective feedback", () => {
    let draft = newDraft(roundOf([0.5]));
    draft = { ...draft, feedback: "objective", statedObjective: null };
    expect(canSubmit(draft, 1)).toBe(false);
    draft = { ...draft, statedObjective: "explore" };
    expect(canSubmit(draft, 1)).toBe(true);
    const req = toRequest(draft);
    expect(req.feedback).toBe("objective");
    expect(req.stated_objective).toBe("explore");
  });

  it("only picks locations that are part of the current round", () => {
    const round = roundOf([0.5, 0.3]);
    const draft = newDraft(round);
    expect(pickSuggestion(draft, round, 0.3).location).toBe(0.3);
    expect(pickSuggestion(draft, round, 0.99).location).toBe(0.5);
  });
});
