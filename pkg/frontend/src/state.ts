/**
 * The session view model. It is built purely from what the service returns —
 * session info (including the full result history) plus the reference-ranking
 * verification — so reloading the page and refetching reproduces the exact
 * same view.
 */

import type { RegionInterval, ResultRecord, SessionInfo, VerifyResult } from "./api.js";
import { isRegionInterval } from "./api.js";
import { rankDeltas, topkSetRows, type DiffRow, type TopkSetRow } from "./diff.js";

export interface Reference {
  weights: number[];
  ranking: string[];
  stability: number;
  /** Angular interval of the reference ranking's region (two-attribute datasets only). */
  region?: RegionInterval;
}

export interface CardView {
  index: number;
  stability: number;
  confidenceError: number | null;
  weights: number[];
  /** The displayed items: the full ranking, a ranked prefix, or a top-k set. */
  items: string[];
  kind: "full" | "topk-set" | "topk-ranked";
  diff: DiffRow[];
  setRows: TopkSetRow[];
  region?: RegionInterval;
  samplesUsed?: number;
}

export interface SessionView {
  info: SessionInfo;
  reference: Reference;
  /** Cards in discovery order (ascending index). */
  cards: CardView[];
  exhausted: boolean;
  /** Sum of discovered stabilities: how much of the region the cards cover. */
  coverage: number;
  /** Angular region data is only drawn when every record carries it. */
  showAngleAxis: boolean;
}

export function referenceFromVerify(weights: number[], verified: VerifyResult): Reference {
  return {
    weights,
    ranking: verified.ranking,
    stability: verified.stability,
    region: isRegionInterval(verified.region) ? verified.region : undefined,
  };
}

function cardKind(mode: string, record: ResultRecord): CardView["kind"] {
  if (record.ranking !== undefined) return "full";
  return mode === "topk_ranked" ? "topk-ranked" : "topk-set";
}

function toCard(record: ResultRecord, info: SessionInfo, reference: Reference): CardView {
  const items = record.ranking ?? record.topk ?? [];
  const kind = cardKind(info.mode, record);
  return {
    index: record.index,
    stability: record.stability,
    confidenceError: record.confidence_error,
    weights: record.weights,
    items,
    kind,
    diff: kind === "topk-set" ? [] : rankDeltas(reference.ranking, items),
    setRows:
      kind === "topk-set" ? topkSetRows(reference.ranking, items, info.k ?? items.length) : [],
    region: record.region,
    samplesUsed: record.samples_used,
  };
}

export function buildSessionView(info: SessionInfo, reference: Reference): SessionView {
  const cards = info.history
    .map((record) => toCard(record, info, reference))
    .sort((a, b) => a.index - b.index);
  return {
    info,
    reference,
    cards,
    exhausted: info.exhausted,
    coverage: cards.reduce((acc, c) => acc + c.stability, 0),
    showAngleAxis: cards.length > 0 && cards.every((c) => c.region !== undefined),
  };
}
