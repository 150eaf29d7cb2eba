/**
 * Pure helpers for comparing a proposed ranking against the reference ranking
 * and for the small amount of client-side arithmetic the explorer needs
 * (similarity-to-angle for the cone slider, input validation, display formatting).
 */

export interface DiffRow {
  item: string;
  /** 1-based position in the reference ranking. */
  referenceRank: number;
  /** 1-based position in the proposed (displayed) ranking. */
  proposedRank: number;
  /** referenceRank − proposedRank: positive means the item moved up. */
  delta: number;
}

/**
 * Positional deltas for every item of the proposed ranking, in proposed order.
 * Items missing from the reference get referenceRank 0 and delta 0 (shown as new).
 */
export function rankDeltas(
  reference: readonly string[],
  proposed: readonly string[],
): DiffRow[] {
  const refRank = new Map<string, number>();
  reference.forEach((item, i) => refRank.set(item, i + 1));
  return proposed.map((item, i) => {
    const proposedRank = i + 1;
    const referenceRank = refRank.get(item) ?? 0;
    return {
      item,
      referenceRank,
      proposedRank,
      delta: referenceRank === 0 ? 0 : referenceRank - proposedRank,
    };
  });
}

export interface TopkSetRow {
  item: string;
  referenceRank: number;
  /** Whether the item is also among the first k of the reference ranking. */
  inReferenceTopk: boolean;
}

/**
 * Membership comparison for top-k set results, where positions inside the
 * set carry no meaning: each member with its reference rank and whether the
 * reference ranking also puts it in the top k.
 */
export function topkSetRows(
  reference: readonly string[],
  members: readonly string[],
  k: number,
): TopkSetRow[] {
  const refRank = new Map<string, number>();
  reference.forEach((item, i) => refRank.set(item, i + 1));
  return members.map((item) => {
    const referenceRank = refRank.get(item) ?? 0;
    return {
      item,
      referenceRank,
      inReferenceTopk: referenceRank >= 1 && referenceRank <= k,
    };
  });
}

/** Half-angle of the cone of weight vectors with at least `sim` cosine similarity. */
export function angleFromSimilarity(sim: number): number {
  return Math.acos(Math.min(1, Math.max(-1, sim)));
}

export type Parsed<T> = { ok: true; value: T } | { ok: false; error: string };

/** Parse a comma/space separated list of numbers; `label` names the field in errors. */
export function parseNumberList(text: string, label: string): Parsed<number[]> {
  const parts = text
    .split(/[,\s]+/)
    .map((p) => p.trim())
    .filter((p) => p.length > 0);
  if (parts.length === 0) return { ok: false, error: `${label}: enter at least one number` };
  const values: number[] = [];
  for (const part of parts) {
    const v = Number(part);
    if (!Number.isFinite(v)) return { ok: false, error: `${label}: ${part!} is not a number` };
    values.push(v);
  }
  return { ok: true, value: values };
}

/** Reference weights must have one entry per attribute, none negative, not all zero. */
export function parseWeights(text: string, d: number): Parsed<number[]> {
  const parsed = parseNumberList(text, "reference weights");
  if (!parsed.ok) return parsed;
  const weights = parsed.value;
  if (weights.length !== d) {
    return { ok: false, error: `reference weights: expected ${d} values, got ${weights.length}` };
  }
  if (weights.some((w) => w < 0)) {
    return { ok: false, error: "reference weights: all values must be non-negative" };
  }
  if (weights.every((w) => w === 0)) {
    return { ok: false, error: "reference weights: at least one value must be positive" };
  }
  return { ok: true, value: weights };
}

/** Constraint coefficients may be negative but must have one entry per attribute. */
export function parseConstraintCoeffs(text: string, d: number): Parsed<number[]> {
  const parsed = parseNumberList(text, "constraint");
  if (!parsed.ok) return parsed;
  if (parsed.value.length !== d) {
    return { ok: false, error: `constraint: expected ${d} coefficients, got ${parsed.value.length}` };
  }
  if (parsed.value.every((c) => c === 0)) {
    return { ok: false, error: "constraint: coefficients must not all be zero" };
  }
  return parsed;
}

export function formatStability(s: number): string {
  return `${(100 * s).toFixed(2)}%`;
}

export function formatConfidence(e: number | null): string {
  return e === null ? "exact" : `± ${(100 * e).toFixed(2)}%`;
}

export function formatDelta(delta: number): string {
  if (delta > 0) return `+${delta}`;
  if (delta < 0) return `${delta}`;
  return "0";
}

export function formatAngle(theta: number): string {
  return `${theta.toFixed(4)} rad`;
}
