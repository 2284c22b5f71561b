// SVG/DOM rendering of the view-models. Strings in, innerHTML out; all
// interaction handlers are wired in main.ts.

import type { CurveView, RewardBar, TransectView } from "./model.js";
import type { MeasurementRow, SessionState } from "./types.js";

const esc = (s: string) =>
  s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");

export function transectSvg(view: TransectView): string {
  const parts: string[] = [];
  parts.push(
    `<svg viewBox="0 0 ${view.width} ${view.height}" class="transect">`,
    `<line x1="40" y1="${view.height - 24}" x2="${view.width - 10}" ` +
      `y2="${view.height - 24}" class="axis"/>`,
  );
  if (view.bandPath) {
    parts.push(`<path d="${view.bandPath}" class="belief-band"/>`);
  }
  if (view.overlayPath) {
    parts.push(`<path d="${view.overlayPath}" class="hypothesis" fill="none"/>`);
  }
  if (view.beliefPath) {
    parts.push(`<path d="${view.beliefPath}" class="belief-mean" fill="none"/>`);
  }
  for (const s of view.suggestionMarkers) {
    const cls = s.rank === 1 ? "suggestion top" : "suggestion";
    parts.push(
      `<g class="${cls}" data-location="${s.location}">` +
        `<line x1="${s.x.toFixed(1)}" y1="10" x2="${s.x.toFixed(1)}" ` +
        `y2="${view.height - 24}"/>` +
        `<text x="${s.x.toFixed(1)}" y="${view.height - 8}" text-anchor="middle">` +
        `#${s.rank} e=${s.explore.toFixed(2)} v=${s.verify.toFixed(2)} ` +
        `w=${s.weight.toFixed(2)}</text></g>`,
    );
  }
  for (const f of view.flags) {
    parts.push(
      `<g class="flag" data-curve="${esc(f.curveId)}">` +
        `<circle cx="${f.x.toFixed(1)}" cy="${f.y.toFixed(1)}" r="5"/>` +
        `<line x1="${f.x.toFixed(1)}" y1="${f.y.toFixed(1)}" ` +
        `x2="${f.x.toFixed(1)}" y2="${view.height - 24}"/></g>`,
    );
  }
  parts.push("</svg>");
  return parts.join("");
}

export function rewardBarsHtml(bars: RewardBar[]): string {
  const rows = bars.map((b) => {
    const e = Math.round(b.explorePart * 100);
    const v = Math.round(b.verifyPart * 100);
    return (
      `<li class="${b.top ? "bar top" : "bar"}" data-location="${b.location}">` +
      `<span class="loc">x=${b.location.toFixed(2)}</span>` +
      `<span class="stack"><span class="explore" style="width:${e}%"></span>` +
      `<span class="verify" style="width:${v}%"></span></span>` +
      `<span class="combined">${b.combined.toFixed(3)}</span>` +
      `<p class="why">${esc(b.explanation)}</p></li>`
    );
  });
  return `<ul class="reward-bars">${rows.join("")}</ul>`;
}

export function curveSvg(view: CurveView): string {
  const markers = view.ruptureMarkers
    .map(
      (m) =>
        `<g class="rupture"><circle cx="${m.x.toFixed(1)}" cy="${m.y.toFixed(1)}" r="4"/>` +
        `<title>drop ${m.drop.toFixed(2)} N</title></g>`,
    )
    .join("");
  return (
    `<svg viewBox="0 0 ${view.width} ${view.height}" class="curve">` +
    `<path d="${view.path}" fill="none" class="force"/>` +
    markers +
    `<text x="${view.width / 2}" y="14" text-anchor="middle" class="caption">` +
    `${esc(view.caption)}</text></svg>`
  );
}

export function curvePlaceholder(): string {
  return `<div class="placeholder">select a flag to load its force-depth curve</div>`;
}

export function measurementTableHtml(ms: MeasurementRow[]): string {
  const rows = ms
    .map(
      (m) =>
        `<tr data-curve="${esc(m.curve_id)}" class="${m.valid ? "" : "invalid"}">` +
        `<td>${esc(m.curve_id)}</td><td>${m.location_m.toFixed(2)}</td>` +
        `<td>${m.strength.toFixed(1)}</td><td>${esc(m.gait)}</td>` +
        `<td>${m.valid ? "ok" : "aborted"}</td></tr>`,
    )
    .join("");
  return (
    `<table><thead><tr><th>id</th><th>x (m)</th><th>k (N/m)</th>` +
    `<th>gait</th><th>status</th></tr></thead><tbody>${rows}</tbody></table>`
  );
}

export function sessionHeaderHtml(state: SessionState): string {
  const hyp = state.hypothesis
    ? `${esc(state.hypothesis.shape)}${state.hypothesis.description ? " - " + esc(state.hypothesis.description) : ""}`
    : "none";
  const n = state.measurements.filter((m) => m.valid).length;
  return (
    `<span class="sid">${esc(state.id)}</span>` +
    `<span>status ${esc(state.status)}</span>` +
    `<span>${state.length_m} m transect</span>` +
    `<span>${n} measurements</span>` +
    `<span>hypothesis: ${hyp}</span>` +
    `<span>weight ${state.weight.toFixed(2)}</span>`
  );
}

export function retryBanner(visible: boolean, message: string): string {
  return visible
    ? `<div class="banner error">server unreachable (${esc(message)}); ` +
      `showing last committed state, retrying…</div>`
    : "";
}

export function staleBanner(visible: boolean): string {
  return visible
    ? `<div class="banner stale">the suggestion round changed on the server; ` +
      `your draft was kept - review and resubmit</div>`
    : "";
}
