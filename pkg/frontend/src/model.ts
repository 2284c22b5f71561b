// Pure view-model layer: everything here is a function from committed
// server state to plot geometry or draft state, with no DOM access, so the
// rendering invariants are unit-testable.

import type {
  BeliefResponse,
  CurveResponse,
  DecisionRequest,
  OutcomeKind,
  RoundResponse,
  SessionState,
  Suggestion,
} from "./types.js";

export interface Scale {
  (v: number): number;
}

export function linearScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const span = d1 - d0 || 1;
  return (v: number) => r0 + ((v - d0) / span) * (r1 - r0);
}

// ---------------------------------------------------------------------------
// transect strip chart

export interface FlagMarker {
  x: number;
  y: number;
  location: number;
  strength: number;
  curveId: string;
}

export interface SuggestionMarker {
  x: number;
  location: number;
  rank: number; // 1 = top, visually emphasized
  explore: number;
  verify: number;
  weight: number;
  combined: number;
  explanation: string;
}

export interface TransectView {
  width: number;
  height: number;
  flags: FlagMarker[];
  beliefPath: string;
  bandPath: string;
  overlayPath: string | null;
  suggestionMarkers: SuggestionMarker[];
  yMax: number;
}

function pathFrom(xs: number[], ys: number[], sx: Scale, sy: Scale): string {
  return xs
    .map((x, i) => `${i === 0 ? "M" : "L"}${sx(x).toFixed(1)},${sy(ys[i]!).toFixed(1)}`)
    .join("");
}

export function transectView(
  state: SessionState,
  belief: BeliefResponse | null,
  round: RoundResponse | null,
  width = 720,
  height = 220,
): TransectView {
  const valid = state.measurements.filter((m) => m.valid);
  const strengths = valid.map((m) => m.strength);
  const beliefTop = belief
    ? Math.max(...belief.mean.map((m, i) => m + belief.uncertainty[i]!))
    : 0;
  const yMax = Math.max(10, ...strengths, beliefTop) * 1.1;
  const sx = linearScale(0, 1, 40, width - 10);
  const sy = linearScale(0, yMax, height - 24, 10);

  const flags: FlagMarker[] = valid.map((m) => ({
    x: sx(m.location),
    y: sy(m.strength),
    location: m.location,
    strength: m.strength,
    curveId: m.curve_id,
  }));

  let beliefPath = "";
  let bandPath = "";
  let overlayPath: string | null = null;
  if (belief) {
    beliefPath = pathFrom(belief.candidates, belief.mean, sx, sy);
    const upper = belief.mean.map((m, i) => m + belief.uncertainty[i]!);
    const lower = belief.mean.map((m, i) => Math.max(0, m - belief.uncertainty[i]!));
    const fwd = pathFrom(belief.candidates, upper, sx, sy);
    const back = [...belief.candidates]
      .reverse()
      .map((x, i) => `L${sx(x).toFixed(1)},${sy(lower[lower.length - 1 - i]!).toFixed(1)}`)
      .join("");
    bandPath = `${fwd}${back}Z`;
    if (belief.hypothesis_template && strengths.length > 0) {
      // show the template stretched over the observed strength range
      const lo = Math.min(...strengths);
      const hi = Math.max(...strengths);
      const scaled = belief.hypothesis_template.map((t) => lo + t * (hi - lo || 1));
      overlayPath = pathFrom(belief.candidates, scaled, sx, sy);
    }
  }

  const suggestionMarkers: SuggestionMarker[] = (round?.suggestions ?? []).map(
    (s, i) => ({
      x: sx(s.location),
      location: s.location,
      rank: i + 1,
      explore: s.explore_reward,
      verify: s.verify_reward,
      weight: s.weight,
      combined: s.combined,
      explanation: s.explanation,
    }),
  );

  return { width, height, flags, beliefPath, bandPath, overlayPath, suggestionMarkers, yMax };
}

// ---------------------------------------------------------------------------
// suggestion reward bars (stacked explore/verify contributions)

export interface RewardBar {
  location: number;
  explorePart: number; // w * r_e, in [0, 1]
  verifyPart: number; // (1 - w) * r_v, in [0, 1]
  combined: number;
  explanation: string;
  top: boolean;
}

export function rewardBars(round: RoundResponse): RewardBar[] {
  return round.suggestions.map((s, i) => ({
    location: s.location,
    explorePart: s.weight * s.explore_reward,
    verifyPart: (1 - s.weight) * s.verify_reward,
    combined: s.combined,
    explanation: s.explanation,
    top: i === 0,
  }));
}

// ---------------------------------------------------------------------------
// force-depth curve panel

export interface CurveView {
  path: string;
  ruptureMarkers: { x: number; y: number; drop: number }[];
  caption: string;
  width: number;
  height: number;
}

export function curveView(curve: CurveResponse, width = 360, height = 220): CurveView {
  const dMax = Math.max(...curve.depth_m, 1e-6);
  const fMax = Math.max(...curve.force_N, 1.0);
  const sx = linearScale(0, dMax, 36, width - 8);
  const sy = linearScale(0, fMax * 1.05, height - 22, 8);
  const path = pathFrom(curve.depth_m, curve.force_N, sx, sy);
  const ruptureMarkers = curve.ruptures.map((r) => {
    let idx = curve.depth_m.findIndex((d) => d >= r.depth_m);
    if (idx < 0) idx = curve.depth_m.length - 1;
    return { x: sx(r.depth_m), y: sy(curve.force_N[idx]!), drop: r.drop_N };
  });
  const caption = curve.regime
    ? `${curve.regime} (confidence ${(curve.confidence ?? 0).toFixed(2)})`
    : curve.valid
      ? "unclassified"
      : "aborted measurement";
  return { path, ruptureMarkers, caption, width, height };
}

// ---------------------------------------------------------------------------
// decision draft state machine
//
// A draft always references the round it was opened against. If the server
// moves on (409 on submit, or a newer round appears on poll), the draft is
// stale: submission must be disabled until the draft is re-anchored to the
// fresh round, preserving the operator's choices for re-review.

export interface DecisionDraft {
  round: number;
  location: number;
  outcome: OutcomeKind;
  alternative: number | null;
  feedback: "none" | "objective" | "location";
  statedObjective: "explore" | "verify" | null;
  needsReview: boolean;
}

export function newDraft(round: RoundResponse): DecisionDraft {
  const top = round.suggestions[0];
  if (!top) throw new Error("round has no suggestions");
  return {
    round: round.round,
    location: top.location,
    outcome: "accept",
    alternative: null,
    feedback: "none",
    statedObjective: null,
    needsReview: false,
  };
}

export function draftIsStale(draft: DecisionDraft, currentRound: number | null): boolean {
  return currentRound === null || draft.round !== currentRound;
}

export function canSubmit(draft: DecisionDraft, currentRound: number | null): boolean {
  if (draftIsStale(draft, currentRound) || draft.needsReview) return false;
  if (draft.outcome === "reject_alt" && draft.alternative === null) return false;
  if (draft.feedback === "objective" && draft.statedObjective === null) return false;
  return true;
}

/** Re-anchor a stale draft to a refreshed round, keeping the operator's
 * choices but demanding an explicit re-review before submission. */
export function refreshDraft(draft: DecisionDraft, fresh: RoundResponse): DecisionDraft {
  const stillThere = fresh.suggestions.some((s) => s.location === draft.location);
  const top = fresh.suggestions[0];
  return {
    ...draft,
    round: fresh.round,
    location: stillThere ? draft.location : (top ? top.location : draft.location),
    needsReview: true,
  };
}

export function markReviewed(draft: DecisionDraft): DecisionDraft {
  return { ...draft, needsReview: false };
}

export function toRequest(draft: DecisionDraft): DecisionRequest {
  const req: DecisionRequest = {
    round: draft.round,
    location: draft.location,
    outcome: draft.outcome,
  };
  if (draft.outcome === "reject_alt" && draft.alternative !== null) {
    req.alternative = draft.alternative;
  }
  if (draft.feedback !== "none") {
    req.feedback = draft.feedback;
    if (draft.feedback === "objective" && draft.statedObjective) {
      req.stated_objective = draft.statedObjective;
    }
  }
  return req;
}

export function pickSuggestion(draft: DecisionDraft, round: RoundResponse,
                               location: number): DecisionDraft {
  const match = round.suggestions.find((s) => s.location === location);
  if (!match || round.round !== draft.round) return draft;
  return { ...draft, location };
}
