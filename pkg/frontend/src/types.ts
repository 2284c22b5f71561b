// Payload shapes of the campaign service API.

export interface MeasurementRow {
  location: number; // normalized [0, 1]
  location_m: number;
  strength: number; // N/m
  curve_id: string;
  gait: string;
  timestamp: number;
  valid: boolean;
  cost_s: number;
  curve_digest: string;
  summary: {
    depth_at_10N: number | null;
    depth_at_20N: number | null;
    depth_at_30N: number | null;
    terminal_force: number;
    fitted_k: number | null;
  };
}

export interface Suggestion {
  location: number;
  explore_reward: number;
  verify_reward: number;
  weight: number;
  combined: number;
  explanation: string;
}

export interface RoundInfo {
  number: number;
  weight: number;
  suggestions: Suggestion[];
}

export interface SessionState {
  id: string;
  seed: number;
  status: "open" | "concluded";
  length_m: number;
  candidate_count: number;
  weight: number;
  hypothesis: { shape: string; description?: string } | null;
  measurements: MeasurementRow[];
  rounds: RoundInfo[];
  decisions: unknown[];
  queue: number[];
  event_count: number;
}

export interface RoundResponse {
  round: number;
  weight: number;
  suggestions: Suggestion[];
}

export interface BeliefResponse {
  candidates: number[];
  mean: number[];
  uncertainty: number[];
  hypothesis_template: number[] | null;
}

export interface CurveResponse {
  measurement_id: string;
  provenance: string;
  valid: boolean;
  depth_m: number[];
  force_N: number[];
  summary: MeasurementRow["summary"];
  regime: string | null;
  confidence: number | null;
  ruptures: { depth_m: number; drop_N: number }[];
}

export type OutcomeKind = "accept" | "reject_alt" | "reject";

export interface DecisionRequest {
  round: number;
  location: number;
  outcome: OutcomeKind;
  alternative?: number;
  feedback?: "objective" | "location";
  stated_objective?: "explore" | "verify";
}
