// End-to-end smoke against the real campaign service: spawn the Python
// server, create a dune-transect session with a 20-location plan, load the
// same state the page loads, fetch a 3-suggestion round, accept the top
// suggestion, and watch the new measurement appear on refresh.

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { CampaignClient } from "../src/api.js";
import { newDraft, rewardBars, toRequest, transectView } from "../src/model.js";

const PORT = 8765 + Math.floor(Math.random() * 200);
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;
const client = new CampaignClient(BASE);

async function waitForServer(timeoutMs = 30_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const res = await fetch(`${BASE}/sessions`);
      if (res.ok) return;
    } catch {
      /* not up yet */
    }
    await new Promise((r) => setTimeout(r, 250));
  }
  throw new Error("campaign service did not come up");
}

beforeAll(async () => {
  const store = mkdtempSync(join(tmpdir(), "regosense-e2e-"));
  server = spawn(
    "python3",
    ["-m", "regosense.campaign.cli", "--store", store, "serve",
     "--port", String(PORT), "--host", "127.0.0.1"],
    { stdio: "ignore" },
  );
  await waitForServer();
}, 40_000);

afterAll(() => {
  server?.kill();
});

describe("shared-autonomy loop against the live service", () => {
  let sid: string;

  it("creates a dune-transect session and runs the 20-location plan", async () => {
    const created = await client.createSession({
      terrain: "white_sands_transect",
      hypothesis: {
        shape: "monotone_increasing",
        description: "strength rises from lee across the interdune",
      },
      seed: 7,
    });
    sid = created.id;
    const locations = Array.from({ length: 20 }, (_, i) => (i * 55) / 19);
    const planned = await client.postPlan(sid, locations);
    expect(planned.measurement_ids).toHaveLength(20);
  });

  it("loads the view a fresh page would build: 20 flags on the transect", async () => {
    const state = await client.getSession(sid);
    const belief = await client.getBelief(sid);
    const view = transectView(state, belief, null);
    expect(view.flags).toHaveLength(20);
    expect(view.beliefPath.length).toBeGreaterThan(0);
    expect(view.overlayPath).not.toBeNull();
  });

  it("fetches a 3-suggestion round with reward breakdowns", async () => {
    const round = await client.getSuggestions(sid, 3);
    expect(round.round).toBe(1);
    expect(round.suggestions).toHaveLength(3);
    const bars = rewardBars(round);
    expect(bars[0]!.top).toBe(true);
    for (const bar of bars) {
      expect(bar.explorePart + bar.verifyPart).toBeGreaterThanOrEqual(0);
      expect(bar.explanation.length).toBeGreaterThan(0);
    }
  });

  it("accepts the top suggestion and sees the measurement after refresh", async () => {
    const round = await client.getSuggestions(sid, 3);
    const draft = newDraft(round);
    const result = await client.postDecision(sid, toRequest(draft));
    expect(result.measurement_ids).toHaveLength(1);

    const refreshed = await client.getSession(sid);
    expect(refreshed.measurements).toHaveLength(21);
    const latest = refreshed.measurements[refreshed.measurements.length - 1]!;
    expect(latest.location).toBeCloseTo(draft.location, 9);

    const beliefAfter = await client.getBelief(sid);
    const view = transectView(refreshed, beliefAfter, null);
    expect(view.flags).toHaveLength(21);
  });

  it("narrows the belief band at the accepted location", async () => {
    const state = await client.getSession(sid);
    const accepted = state.measurements[state.measurements.length - 1]!;
    const belief = await client.getBelief(sid);
    const idx = belief.candidates.findIndex(
      (c) => Math.abs(c - accepted.location) < 1e-9,
    );
    expect(idx).toBeGreaterThanOrEqual(0);
    const sigmaAt = belief.uncertainty[idx]!;
    expect(sigmaAt).toBeCloseTo(Math.min(...belief.uncertainty), 6);
  });

  it("rejects a decision against a superseded round with 409", async () => {
    const round = await client.getSuggestions(sid, 3);
    const staleDraft = newDraft(round);
    await client.getSuggestions(sid, 4); // supersedes with a new round
    await expect(client.postDecision(sid, toRequest(staleDraft)))
      .rejects.toMatchObject({ status: 409 });
  });

  it("serves force-depth curves with regime labels for plotting", async () => {
    const state = await client.getSession(sid);
    const lee = state.measurements[0]!;
    const curve = await client.getCurve(sid, lee.curve_id);
    expect(curve.depth_m.length).toBeGreaterThan(100);
    expect(curve.regime).toBe("linear");
  });
});
