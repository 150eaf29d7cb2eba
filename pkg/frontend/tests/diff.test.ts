import { describe, expect, it } from "vitest";

import {
  angleFromSimilarity,
  formatConfidence,
  formatDelta,
  formatStability,
  parseConstraintCoeffs,
  parseWeights,
  rankDeltas,
  topkSetRows,
} from "../src/diff.js";

const REFERENCE = ["t2", "t4", "t3", "t5", "t1"];

describe("rankDeltas", () => {
  it("computes positional deltas against the reference", () => {
    const rows = rankDeltas(REFERENCE, ["t2", "t4", "t1", "t3", "t5"]);
    const byItem = new Map(rows.map((r) => [r.item, r]));
    expect(byItem.get("t1")).toEqual({ item: "t1", referenceRank: 5, proposedRank: 3, delta: 2 });
    expect(byItem.get("t3")).toEqual({ item: "t3", referenceRank: 3, proposedRank: 4, delta: -1 });
    expect(byItem.get("t5")).toEqual({ item: "t5", referenceRank: 4, proposedRank: 5, delta: -1 });
    expect(byItem.get("t2")?.delta).toBe(0);
    expect(byItem.get("t4")?.delta).toBe(0);
  });

  it("covers exactly the proposed items, in proposed order", () => {
    const proposed = ["t5", "t2"];
    const rows = rankDeltas(REFERENCE, proposed);
    expect(rows.map((r) => r.item)).toEqual(proposed);
    expect(rows.map((r) => r.proposedRank)).toEqual([1, 2]);
  });

  it("marks items missing from the reference with rank 0 and no movement", () => {
    const rows = rankDeltas(["a", "b"], ["b", "z"]);
    expect(rows[1]).toEqual({ item: "z", referenceRank: 0, proposedRank: 2, delta: 0 });
  });

  it("reports all-zero deltas when the proposal equals the reference", () => {
    for (const row of rankDeltas(REFERENCE, REFERENCE)) {
      expect(row.delta).toBe(0);
      expect(row.referenceRank).toBe(row.proposedRank);
    }
  });
});

describe("topkSetRows", () => {
  it("reports reference ranks and top-k membership", () => {
    const rows = topkSetRows(["a", "b", "c", "d"], ["a", "d"], 2);
    expect(rows).toEqual([
      { item: "a", referenceRank: 1, inReferenceTopk: true },
      { item: "d", referenceRank: 4, inReferenceTopk: false },
    ]);
  });

  it("treats unknown items as outside the reference top-k", () => {
    const rows = topkSetRows(["a"], ["z"], 1);
    expect(rows[0]).toEqual({ item: "z", referenceRank: 0, inReferenceTopk: false });
  });
});

describe("angleFromSimilarity", () => {
  it("maps similarity 0.998 to about 0.0633 rad", () => {
    expect(angleFromSimilarity(0.998)).toBeCloseTo(0.0633, 3);
  });

  it("inverts the cosine of pi/10", () => {
    expect(angleFromSimilarity(Math.cos(Math.PI / 10))).toBeCloseTo(Math.PI / 10, 9);
  });

  it("clamps out-of-range similarities instead of returning NaN", () => {
    expect(angleFromSimilarity(1.2)).toBe(0);
    expect(angleFromSimilarity(-2)).toBeCloseTo(Math.PI, 12);
  });
});

describe("parseWeights", () => {
  it("accepts comma or space separated non-negative weights", () => {
    expect(parseWeights("1, 1", 2)).toEqual({ ok: true, value: [1, 1] });
    expect(parseWeights("0.5 0.25", 2)).toEqual({ ok: true, value: [0.5, 0.25] });
  });

  it("rejects all-zero weights", () => {
    const parsed = parseWeights("0, 0", 2);
    expect(parsed.ok).toBe(false);
    if (!parsed.ok) expect(parsed.error).toContain("positive");
  });

  it("rejects negative weights", () => {
    const parsed = parseWeights("-1, 2", 2);
    expect(parsed.ok).toBe(false);
    if (!parsed.ok) expect(parsed.error).toContain("non-negative");
  });

  it("rejects the wrong number of values", () => {
    const parsed = parseWeights("1", 2);
    expect(parsed.ok).toBe(false);
    if (!parsed.ok) expect(parsed.error).toContain("expected 2");
  });

  it("rejects non-numeric entries", () => {
    const parsed = parseWeights("a, 1", 2);
    expect(parsed.ok).toBe(false);
    if (!parsed.ok) expect(parsed.error).toContain("not a number");
  });
});

describe("parseConstraintCoeffs", () => {
  it("allows negative coefficients", () => {
    expect(parseConstraintCoeffs("1, -1", 2)).toEqual({ ok: true, value: [1, -1] });
  });

  it("rejects all-zero coefficient rows", () => {
    expect(parseConstraintCoeffs("0, 0", 2).ok).toBe(false);
  });

  it("rejects the wrong number of coefficients", () => {
    expect(parseConstraintCoeffs("1, -1, 0", 2).ok).toBe(false);
  });
});

describe("display formatting", () => {
  it("formats stabilities as percentages", () => {
    expect(formatStability(0.394863)).toBe("39.49%");
    expect(formatStability(1)).toBe("100.00%");
  });

  it("formats deltas with an explicit sign", () => {
    expect(formatDelta(2)).toBe("+2");
    expect(formatDelta(-1)).toBe("-1");
    expect(formatDelta(0)).toBe("0");
  });

  it("formats confidence as exact or plus-minus", () => {
    expect(formatConfidence(null)).toBe("exact");
    expect(formatConfidence(0.0063)).toBe("± 0.63%");
  });
});
