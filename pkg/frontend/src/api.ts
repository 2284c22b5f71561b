// Thin fetch client. The UI only ever mutates server state through the
// POST endpoints here; everything else is a read.

import type {
  BeliefResponse,
  CurveResponse,
  DecisionRequest,
  RoundResponse,
  SessionState,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, public detail: string) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  const res = await fetch(base + path, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  if (!res.ok) {
    let detail = res.statusText;
    try {
      const body = await res.json();
      detail = body.detail ?? JSON.stringify(body);
    } catch {
      /* non-JSON error body */
    }
    throw new ApiError(res.status, detail);
  }
  return res.json() as Promise<T>;
}

export class CampaignClient {
  constructor(public base: string) {}

  createSession(body: {
    terrain: string | object;
    hypothesis?: { shape: string; description?: string };
    seed?: number;
    candidate_count?: number;
  }): Promise<{ id: string; state: SessionState }> {
    return request(this.base, "/sessions", {
      method: "POST",
      body: JSON.stringify(body),
    });
  }

  getSession(id: string): Promise<SessionState> {
    return request(this.base, `/sessions/${id}`);
  }

  postPlan(id: string, locations_m: number[], gait = "crawl"):
      Promise<{ measurement_ids: string[]; state: SessionState }> {
    return request(this.base, `/sessions/${id}/plan`, {
      method: "POST",
      body: JSON.stringify({ locations_m, gait }),
    });
  }

  getSuggestions(id: string, k = 3): Promise<RoundResponse> {
    return request(this.base, `/sessions/${id}/suggestions?k=${k}`);
  }

  postDecision(id: string, decision: DecisionRequest):
      Promise<{ measurement_ids: string[]; state: SessionState }> {
    return request(this.base, `/sessions/${id}/decision`, {
      method: "POST",
      body: JSON.stringify(decision),
    });
  }

  getBelief(id: string): Promise<BeliefResponse> {
    return request(this.base, `/sessions/${id}/belief`);
  }

  getCurve(id: string, measurementId: string): Promise<CurveResponse> {
    return request(this.base, `/sessions/${id}/curves/${measurementId}`);
  }

  conclude(id: string): Promise<{ status: string }> {
    return request(this.base, `/sessions/${id}/conclude`, { method: "POST" });
  }
}
