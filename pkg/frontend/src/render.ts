/**
 * HTML renderers for the explorer. Every function is a pure string builder
 * over the view model, so the whole session panel can be re-rendered from
 * freshly fetched state and the pieces can be asserted on directly in tests.
 */

import type { RegionInterval } from "./api.js";
import {
  formatAngle,
  formatConfidence,
  formatDelta,
  formatStability,
  type DiffRow,
  type TopkSetRow,
} from "./diff.js";
import type { CardView, Reference, SessionView } from "./state.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

function rankingChips(items: readonly string[]): string {
  return `<ol class="chips">${items
    .map((item) => `<li class="chip">${escapeHtml(item)}</li>`)
    .join("")}</ol>`;
}

function deltaClass(delta: number): string {
  if (delta > 0) return "up";
  if (delta < 0) return "down";
  return "same";
}

export function renderDiffTable(rows: readonly DiffRow[]): string {
  const body = rows
    .map(
      (row) =>
        `<tr data-item="${escapeHtml(row.item)}" data-delta="${formatDelta(row.delta)}" class="${deltaClass(row.delta)}">` +
        `<td>${escapeHtml(row.item)}</td>` +
        `<td>${row.referenceRank === 0 ? "—" : row.referenceRank}</td>` +
        `<td>${row.proposedRank}</td>` +
        `<td class="delta">${formatDelta(row.delta)}</td></tr>`,
    )
    .join("");
  return (
    `<table class="diff"><thead><tr>` +
    `<th>item</th><th>reference rank</th><th>proposed rank</th><th>delta</th>` +
    `</tr></thead><tbody>${body}</tbody></table>`
  );
}

export function renderTopkSetTable(rows: readonly TopkSetRow[]): string {
  const body = rows
    .map(
      (row) =>
        `<tr data-item="${escapeHtml(row.item)}" class="${row.inReferenceTopk ? "same" : "up"}">` +
        `<td>${escapeHtml(row.item)}</td>` +
        `<td>${row.referenceRank === 0 ? "—" : row.referenceRank}</td>` +
        `<td>${row.inReferenceTopk ? "yes" : "no"}</td></tr>`,
    )
    .join("");
  return (
    `<table class="diff"><thead><tr>` +
    `<th>item</th><th>reference rank</th><th>in reference top-k</th>` +
    `</tr></thead><tbody>${body}</tbody></table>`
  );
}

export function renderCard(card: CardView): string {
  const label =
    card.kind === "full"
      ? "ranking"
      : card.kind === "topk-ranked"
        ? "top-k (ranked)"
        : "top-k (set)";
  const meta: string[] = [
    `stability <strong>${formatStability(card.stability)}</strong>`,
    formatConfidence(card.confidenceError),
  ];
  if (card.samplesUsed !== undefined) meta.push(`${card.samplesUsed} samples`);
  if (card.region) {
    meta.push(`angles [${formatAngle(card.region.theta1)}, ${formatAngle(card.region.theta2)}]`);
  }
  const table =
    card.kind === "topk-set" ? renderTopkSetTable(card.setRows) : renderDiffTable(card.diff);
  return (
    `<article class="card" data-index="${card.index}">` +
    `<header><span class="index">#${card.index}</span> <span class="label">${label}</span>` +
    `<span class="meta">${meta.join(" · ")}</span></header>` +
    rankingChips(card.items) +
    `<div class="weights">weights: ${card.weights.map((w) => w.toFixed(4)).join(", ")}</div>` +
    table +
    `</article>`
  );
}

export function renderReference(reference: Reference): string {
  const region = reference.region
    ? ` · region [${formatAngle(reference.region.theta1)}, ${formatAngle(reference.region.theta2)}]`
    : "";
  return (
    `<div id="reference-strip">` +
    `<span class="label">reference</span>` +
    rankingChips(reference.ranking) +
    `<span class="meta">weights ${reference.weights.join(", ")} · stability ` +
    `${formatStability(reference.stability)}${region}</span></div>`
  );
}

export function renderStabilityChart(view: SessionView): string {
  const bars = view.cards
    .map((card) => {
      const width = Math.min(100, 100 * card.stability).toFixed(2);
      return (
        `<div class="bar-row" data-index="${card.index}">` +
        `<span class="bar-label">#${card.index}</span>` +
        `<div class="bar-track"><div class="bar" data-index="${card.index}" style="width:${width}%"></div></div>` +
        `<span class="bar-value">${formatStability(card.stability)}</span></div>`
      );
    })
    .join("");
  return (
    `<div id="chart"><h3>stability by discovery order</h3>${bars}` +
    `<div class="coverage">discovered so far: ${formatStability(view.coverage)} of the region</div></div>`
  );
}

const AXIS_SIZE = 230;
const AXIS_CX = 15;
const AXIS_CY = AXIS_SIZE - 15;
const AXIS_R = AXIS_SIZE - 40;

function arcPath(interval: RegionInterval, radius: number): string {
  const x = (theta: number) => (AXIS_CX + radius * Math.cos(theta)).toFixed(2);
  const y = (theta: number) => (AXIS_CY - radius * Math.sin(theta)).toFixed(2);
  const { theta1, theta2 } = interval;
  return `M ${x(theta1)} ${y(theta1)} A ${radius} ${radius} 0 0 0 ${x(theta2)} ${y(theta2)}`;
}

function arcColor(index: number): string {
  return `hsl(${(index * 47) % 360} 65% 48%)`;
}

/** Quarter-circle angle axis with one colored arc per discovered region (2-attribute sessions). */
export function renderAngleAxis(view: SessionView): string {
  if (!view.showAngleAxis) return "";
  const base = arcPath({ theta1: 0, theta2: Math.PI / 2 }, AXIS_R);
  const arcs = view.cards
    .filter((card) => card.region !== undefined)
    .map(
      (card) =>
        `<path class="region-arc" data-index="${card.index}" d="${arcPath(card.region!, AXIS_R)}" ` +
        `stroke="${arcColor(card.index)}"><title>#${card.index} · ` +
        `${formatStability(card.stability)}</title></path>`,
    )
    .join("");
  const referenceArc = view.reference.region
    ? `<path class="reference-arc" d="${arcPath(view.reference.region, AXIS_R - 18)}">` +
      `<title>reference region</title></path>`
    : "";
  return (
    `<div id="axis-wrap"><h3>weight-angle axis</h3>` +
    `<svg id="axis" viewBox="0 0 ${AXIS_SIZE} ${AXIS_SIZE}" role="img" ` +
    `aria-label="discovered regions on the weight-angle axis">` +
    `<path class="axis-base" d="${base}"></path>${arcs}${referenceArc}` +
    `<text x="${AXIS_CX + AXIS_R + 4}" y="${AXIS_CY + 4}" class="axis-tick">0</text>` +
    `<text x="${AXIS_CX - 6}" y="${AXIS_CY - AXIS_R - 6}" class="axis-tick">π/2</text>` +
    `</svg><p class="hint">outer arcs: discovered regions · inner arc: reference region</p></div>`
  );
}

export function renderExhaustedBanner(view: SessionView): string {
  if (!view.exhausted) return "";
  return (
    `<div id="exhausted-banner" class="banner" role="status">Region exhausted — ` +
    `${view.cards.length} ranking${view.cards.length === 1 ? "" : "s"} cover ` +
    `${formatStability(view.coverage)} of the region of interest.</div>`
  );
}

function roiSummary(view: SessionView): string {
  const roi = view.info.roi;
  if (roi.kind === "cone" && roi.max_angle !== undefined) {
    return `cone, max angle ${formatAngle(roi.max_angle)}`;
  }
  if (roi.kind === "constraints") {
    const n = roi.constraints?.length ?? 0;
    return `${n} linear constraint${n === 1 ? "" : "s"}`;
  }
  return "full weight space";
}

export function renderSessionSummary(view: SessionView): string {
  const info = view.info;
  const parts = [
    `session <code>${escapeHtml(info.session_id)}</code>`,
    `dataset <code>${escapeHtml(info.dataset_id)}</code>`,
    `engine ${escapeHtml(info.engine)}`,
    `mode ${escapeHtml(info.mode.replace("_", "-"))}${info.k ? ` (k=${info.k})` : ""}`,
    roiSummary(view),
  ];
  return `<div id="session-summary">${parts.join(" · ")}</div>`;
}

/** The whole session panel, re-rendered from scratch on every state change. */
export function renderSessionPanel(view: SessionView): string {
  const nextControl = view.exhausted
    ? renderExhaustedBanner(view)
    : `<button id="next-btn" type="button">Next stable ranking</button>`;
  return (
    renderSessionSummary(view) +
    renderReference(view.reference) +
    `<div class="controls">${nextControl}` +
    `<button id="reset-btn" type="button">New session</button></div>` +
    `<div id="session-error" class="error" hidden></div>` +
    `<div class="columns"><div id="cards">${view.cards.map(renderCard).join("")}</div>` +
    `<aside>${renderStabilityChart(view)}${renderAngleAxis(view)}</aside></div>`
  );
}

export function renderToast(message: string, retriable: boolean): string {
  return (
    `<div class="toast" role="alert"><span>${escapeHtml(message)}</span>` +
    (retriable ? `<button type="button" data-action="retry">Retry</button>` : "") +
    `<button type="button" data-action="dismiss">Dismiss</button></div>`
  );
}

export function renderDatasetSummary(info: {
  dataset_id: string;
  n: number;
  d: number;
  attr_meta: { name: string; direction: string; raw_min: number; raw_max: number }[];
}): string {
  const attrs = info.attr_meta
    .map(
      (m) =>
        `${escapeHtml(m.name)} (${escapeHtml(m.direction)}, raw ${m.raw_min}–${m.raw_max})`,
    )
    .join(", ");
  return (
    `dataset <code>${escapeHtml(info.dataset_id)}</code>: ${info.n} items · ` +
    `${info.d} attributes · ${attrs}`
  );
}
