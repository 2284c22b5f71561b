// Bootstrap and polling loop. The loop is human-paced, so the client polls
// committed state every few seconds instead of holding a push channel.

import { ApiError, CampaignClient } from "./api.js";
import {
  DecisionDraft,
  canSubmit,
  curveView,
  draftIsStale,
  markReviewed,
  newDraft,
  pickSuggestion,
  refreshDraft,
  rewardBars,
  toRequest,
  transectView,
} from "./model.js";
import {
  curvePlaceholder,
  curveSvg,
  measurementTableHtml,
  retryBanner,
  rewardBarsHtml,
  sessionHeaderHtml,
  staleBanner,
  transectSvg,
} from "./render.js";
import type { BeliefResponse, RoundResponse, SessionState } from "./types.js";

const POLL_MS = 4000;
const K = 3;

interface AppState {
  session: SessionState | null;
  belief: BeliefResponse | null;
  round: RoundResponse | null;
  draft: DecisionDraft | null;
  selectedCurve: string | null;
  fetchError: string | null;
  staleNotice: boolean;
}

const app: AppState = {
  session: null,
  belief: null,
  round: null,
  draft: null,
  selectedCurve: null,
  fetchError: null,
  staleNotice: false,
};

const $ = (id: string) => document.getElementById(id)!;
const client = new CampaignClient("");

function sessionId(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("session");
  return fromQuery ?? "";
}

async function refresh(): Promise<void> {
  const sid = sessionId();
  if (!sid) return;
  try {
    const session = await client.getSession(sid);
    app.session = session;
    app.belief = session.measurements.some((m) => m.valid)
      ? await client.getBelief(sid)
      : null;
    if (session.status === "open") {
      const round = await client.getSuggestions(sid, K);
      if (app.round && round.round !== app.round.round && app.draft) {
        app.draft = refreshDraft(app.draft, round);
        app.staleNotice = true;
      }
      app.round = round;
      if (!app.draft) app.draft = newDraft(round);
    } else {
      app.round = null;
      app.draft = null;
    }
    app.fetchError = null;
  } catch (err) {
    // keep the stale view; just surface the banner
    app.fetchError = err instanceof Error ? err.message : String(err);
  }
  render();
}

async function submitDecision(): Promise<void> {
  const sid = sessionId();
  if (!app.draft || !app.round) return;
  if (!canSubmit(app.draft, app.round.round)) return;
  try {
    await client.postDecision(sid, toRequest(app.draft));
    app.draft = null;
    app.staleNotice = false;
    await refresh();
  } catch (err) {
    if (err instanceof ApiError && err.status === 409) {
      const fresh = await client.getSuggestions(sid, K);
      if (app.draft) app.draft = refreshDraft(app.draft, fresh);
      app.round = fresh;
      app.staleNotice = true;
      render();
    } else {
      app.fetchError = err instanceof Error ? err.message : String(err);
      render();
    }
  }
}

async function showCurve(curveId: string): Promise<void> {
  app.selectedCurve = curveId;
  const panel = $("curve-panel");
  try {
    const curve = await client.getCurve(sessionId(), curveId);
    panel.innerHTML = curveSvg(curveView(curve));
  } catch {
    panel.innerHTML = curvePlaceholder();
  }
}

function render(): void {
  $("banner-area").innerHTML =
    retryBanner(app.fetchError !== null, app.fetchError ?? "") +
    staleBanner(app.staleNotice);
  if (!app.session) {
    $("session-header").textContent = "no session loaded - pass ?session=<id>";
    return;
  }
  $("session-header").innerHTML = sessionHeaderHtml(app.session);
  $("transect-panel").innerHTML = transectSvg(
    transectView(app.session, app.belief, app.round),
  );
  $("suggestions-panel").innerHTML = app.round
    ? `<h3>round ${app.round.round} (weight ${app.round.weight.toFixed(2)})</h3>` +
      rewardBarsHtml(rewardBars(app.round))
    : "<p>session concluded</p>";
  $("measurements-panel").innerHTML = measurementTableHtml(
    app.session.measurements,
  );
  renderDecisionControls();
  wireHandlers();
}

function renderDecisionControls(): void {
  const panel = $("decision-panel");
  if (!app.draft || !app.round) {
    panel.innerHTML = "";
    return;
  }
  const d = app.draft;
  const stale = draftIsStale(d, app.round.round) || d.needsReview;
  const submittable = canSubmit(d, app.round.round);
  panel.innerHTML = `
    <h3>decision (round ${d.round})</h3>
    <label>suggestion
      <select id="draft-location">
        ${app.round.suggestions
          .map(
            (s) =>
              `<option value="${s.location}" ${s.location === d.location ? "selected" : ""}>
               x=${s.location.toFixed(2)}</option>`,
          )
          .join("")}
      </select>
    </label>
    <label>outcome
      <select id="draft-outcome">
        <option value="accept" ${d.outcome === "accept" ? "selected" : ""}>accept</option>
        <option value="reject_alt" ${d.outcome === "reject_alt" ? "selected" : ""}>reject, go to…</option>
        <option value="reject" ${d.outcome === "reject" ? "selected" : ""}>reject</option>
      </select>
    </label>
    <label class="alt ${d.outcome === "reject_alt" ? "" : "hidden"}">alternative x
      <input id="draft-alt" type="number" min="0" max="1" step="0.01"
             value="${d.alternative ?? ""}"/>
    </label>
    <label>feedback
      <select id="draft-feedback">
        <option value="none" ${d.feedback === "none" ? "selected" : ""}>none</option>
        <option value="objective" ${d.feedback === "objective" ? "selected" : ""}>wrong objective</option>
        <option value="location" ${d.feedback === "location" ? "selected" : ""}>wrong location</option>
      </select>
    </label>
    <label class="objective ${d.feedback === "objective" ? "" : "hidden"}">my objective is
      <select id="draft-objective">
        <option value="explore" ${d.statedObjective === "explore" ? "selected" : ""}>exploration</option>
        <option value="verify" ${d.statedObjective === "verify" ? "selected" : ""}>verification</option>
      </select>
    </label>
    ${stale ? `<button id="draft-review">round changed - mark reviewed</button>` : ""}
    <button id="draft-submit" ${submittable ? "" : "disabled"}>submit</button>
  `;
}

function wireHandlers(): void {
  document.querySelectorAll<SVGGElement>("g.flag, tr[data-curve]").forEach((el) => {
    el.addEventListener("click", () => {
      const id = el.getAttribute("data-curve");
      if (id) void showCurve(id);
    });
  });
  const loc = document.getElementById("draft-location") as HTMLSelectElement | null;
  loc?.addEventListener("change", () => {
    if (app.draft && app.round) {
      app.draft = pickSuggestion(app.draft, app.round, parseFloat(loc.value));
      render();
    }
  });
  const outcome = document.getElementById("draft-outcome") as HTMLSelectElement | null;
  outcome?.addEventListener("change", () => {
    if (app.draft) {
      app.draft = { ...app.draft, outcome: outcome.value as DecisionDraft["outcome"] };
      render();
    }
  });
  const alt = document.getElementById("draft-alt") as HTMLInputElement | null;
  alt?.addEventListener("change", () => {
    if (app.draft) {
      app.draft = { ...app.draft, alternative: parseFloat(alt.value) };
      render();
    }
  });
  const feedback = document.getElementById("draft-feedback") as HTMLSelectElement | null;
  feedback?.addEventListener("change", () => {
    if (app.draft) {
      app.draft = {
        ...app.draft,
        feedback: feedback.value as DecisionDraft["feedback"],
        statedObjective: feedback.value === "objective" ? "explore" : null,
      };
      render();
    }
  });
  const objective = document.getElementById("draft-objective") as HTMLSelectElement | null;
  objective?.addEventListener("change", () => {
    if (app.draft) {
      app.draft = {
        ...app.draft,
        statedObjective: objective.value as "explore" | "verify",
      };
    }
  });
  document.getElementById("draft-review")?.addEventListener("click", () => {
    if (app.draft) {
      app.draft = markReviewed(app.draft);
      app.staleNotice = false;
      render();
    }
  });
  document.getElementById("draft-submit")?.addEventListener("click", () => {
    void submitDecision();
  });
}

document.addEventListener("DOMContentLoaded", () => {
  void refresh();
  setInterval(() => void refresh(), POLL_MS);
});
