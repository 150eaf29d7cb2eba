import { describe, expect, it } from "vitest";

import type { ResultRecord, SessionInfo } from "../src/api.js";
import { rankDeltas } from "../src/diff.js";
import {
  escapeHtml,
  renderAngleAxis,
  renderCard,
  renderDiffTable,
  renderExhaustedBanner,
  renderSessionPanel,
  renderStabilityChart,
  renderToast,
} from "../src/render.js";
import { buildSessionView, type CardView, type Reference } from "../src/state.js";

const REFERENCE: Reference = {
  weights: [1, 1],
  ranking: ["t2", "t4", "t3", "t5", "t1"],
  stability: 0.088,
  region: { theta1: 0.7378, theta2: 0.876 },
};

function makeInfo(history: ResultRecord[], over: Partial<SessionInfo> = {}): SessionInfo {
  return {
    session_id: "s-1",
    dataset_id: "ds-1",
    engine: "2d",
    mode: "full",
    k: null,
    roi: { kind: "full" },
    exhausted: false,
    created: 0,
    history,
    ...over,
  };
}

function record(index: number, over: Partial<ResultRecord> = {}): ResultRecord {
  return {
    index,
    stability: 0.39486,
    confidence_error: null,
    weights: [0.95, 0.31],
    ranking: ["t2", "t4", "t1", "t3", "t5"],
    region: { theta1: 0, theta2: 0.62 },
    ...over,
  };
}

function fullCard(over: Partial<CardView> = {}): CardView {
  return {
    index: 1,
    stability: 0.39486,
    confidenceError: null,
    weights: [0.95, 0.31],
    items: ["t2", "t4", "t1", "t3", "t5"],
    kind: "full",
    diff: rankDeltas(REFERENCE.ranking, ["t2", "t4", "t1", "t3", "t5"]),
    setRows: [],
    region: { theta1: 0, theta2: 0.62 },
    ...over,
  };
}

describe("renderDiffTable", () => {
  it("tags each row with the item and its signed delta", () => {
    const html = renderDiffTable(rankDeltas(REFERENCE.ranking, ["t2", "t4", "t1", "t3", "t5"]));
    expect(html).toContain('data-item="t1" data-delta="+2"');
    expect(html).toContain('data-item="t3" data-delta="-1"');
    expect(html).toContain('data-item="t2" data-delta="0"');
  });

  it("classes rows by movement direction for styling", () => {
    const html = renderDiffTable(rankDeltas(["a", "b"], ["b", "a"]));
    expect(html).toContain('class="up"');
    expect(html).toContain('class="down"');
  });

  it("escapes item ids", () => {
    const html = renderDiffTable(rankDeltas(['<x">'], ['<x">']));
    expect(html).not.toContain('<x">');
    expect(html).toContain("&lt;x&quot;&gt;");
  });
});

describe("renderCard", () => {
  it("shows index, stability, ranking chips, and the diff table", () => {
    const html = renderCard(fullCard());
    expect(html).toContain('data-index="1"');
    expect(html).toContain("39.49%");
    expect(html).toContain('<li class="chip">t2</li>');
    expect(html).toContain('data-item="t1" data-delta="+2"');
  });

  it("renders membership tables for top-k sets", () => {
    const html = renderCard(
      fullCard({
        kind: "topk-set",
        items: ["t2", "t5"],
        diff: [],
        setRows: [
          { item: "t2", referenceRank: 1, inReferenceTopk: true },
          { item: "t5", referenceRank: 4, inReferenceTopk: false },
        ],
        region: undefined,
        samplesUsed: 5000,
        confidenceError: 0.01,
      }),
    );
    expect(html).toContain("in reference top-k");
    expect(html).toContain("5000 samples");
    expect(html).toContain("± 1.00%");
    expect(html).not.toContain("proposed rank");
  });
});

describe("renderStabilityChart", () => {
  it("draws one bar per card, in discovery order, with width matching stability", () => {
    const view = buildSessionView(
      makeInfo([record(1), record(2, { stability: 0.14438 })]),
      REFERENCE,
    );
    const html = renderStabilityChart(view);
    const widths = [...html.matchAll(/width:([0-9.]+)%/g)].map((m) => m[1]);
    expect(widths).toEqual(["39.49", "14.44"]);
    expect(html.indexOf('data-index="1"')).toBeLessThan(html.indexOf('data-index="2"'));
    expect(html).toContain("53.92%"); // coverage: 0.39486 + 0.14438
  });
});

describe("renderAngleAxis", () => {
  it("draws one arc per discovered region plus the reference arc", () => {
    const view = buildSessionView(makeInfo([record(1), record(2)]), REFERENCE);
    const html = renderAngleAxis(view);
    expect(html.match(/class="region-arc"/g)).toHaveLength(2);
    expect(html).toContain('class="reference-arc"');
    expect(html).toContain("<svg");
  });

  it("renders nothing when angular regions are unavailable", () => {
    const view = buildSessionView(makeInfo([record(1, { region: undefined })]), REFERENCE);
    expect(renderAngleAxis(view)).toBe("");
  });
});

describe("renderSessionPanel", () => {
  it("offers the next button while the region is not exhausted", () => {
    const html = renderSessionPanel(buildSessionView(makeInfo([record(1)]), REFERENCE));
    expect(html).toContain('id="next-btn"');
    expect(html).not.toContain('id="exhausted-banner"');
    expect(html).toContain('id="reset-btn"');
  });

  it("replaces the next button with the exhausted banner at the end", () => {
    const info = makeInfo(Array.from({ length: 3 }, (_, i) => record(i + 1)), {
      exhausted: true,
    });
    const html = renderSessionPanel(buildSessionView(info, REFERENCE));
    expect(html).toContain('id="exhausted-banner"');
    expect(html).toContain("exhausted");
    expect(html).not.toContain('id="next-btn"');
  });

  it("escapes service-provided identifiers", () => {
    const info = makeInfo([], { session_id: 's-<script>"' });
    const html = renderSessionPanel(buildSessionView(info, REFERENCE));
    expect(html).not.toContain("s-<script>");
    expect(html).toContain("s-&lt;script&gt;&quot;");
  });
});

describe("renderExhaustedBanner", () => {
  it("summarizes how much of the region the cards cover", () => {
    const info = makeInfo([record(1, { stability: 0.6 }), record(2, { stability: 0.4 })], {
      exhausted: true,
    });
    const html = renderExhaustedBanner(buildSessionView(info, REFERENCE));
    expect(html).toContain("2 rankings");
    expect(html).toContain("100.00%");
  });

  it("is empty while results may remain", () => {
    expect(renderExhaustedBanner(buildSessionView(makeInfo([record(1)]), REFERENCE))).toBe("");
  });
});

describe("renderToast", () => {
  it("offers a retry button only for retriable failures", () => {
    expect(renderToast("boom", true)).toContain('data-action="retry"');
    expect(renderToast("boom", false)).not.toContain('data-action="retry"');
    expect(renderToast("boom", false)).toContain('data-action="dismiss"');
  });

  it("escapes the message", () => {
    expect(renderToast("<img>", true)).toContain("&lt;img&gt;");
  });
});

describe("escapeHtml", () => {
  it("escapes markup-significant characters", () => {
    expect(escapeHtml(`<b a="1" b='2'>&`)).toBe("&lt;b a=&quot;1&quot; b=&#39;2&#39;&gt;&amp;");
  });
});
