/**
 * Drives the real explorer against a real service instance: spawn the
 * Python HTTP service, load the page into a DOM, click through the
 * configure → next loop on the bundled demo dataset, and assert on what the
 * user would see (cards, diff table, banner, refresh recovery).
 */
import { type ChildProcess, spawn } from "node:child_process";
import { existsSync } from "node:fs";
import { readFile } from "node:fs/promises";
import { fileURLToPath } from "node:url";
import { Window } from "happy-dom";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { initApp, type AppHandle } from "../src/main.js";

const PORT = 8300 + (process.pid % 600);
const BASE = `http://127.0.0.1:${PORT}`;
const INDEX_HTML = fileURLToPath(new URL("../public/index.html", import.meta.url));
const DIST_INDEX = fileURLToPath(new URL("../dist/index.html", import.meta.url));

let service: ChildProcess;
let serviceLog = "";
const windows: Window[] = [];

async function waitForService(): Promise<void> {
  for (let attempt = 0; attempt < 120; attempt++) {
    try {
      await fetch(`${BASE}/api/sessions/probe`);
      return;
    } catch {
      await new Promise((resolve) => setTimeout(resolve, 500));
    }
  }
  throw new Error(`service did not come up on ${BASE}\n${serviceLog}`);
}

async function loadPage(url: string): Promise<{ doc: Document; app: AppHandle }> {
  const html = (await readFile(INDEX_HTML, "utf8")).replace(
    /<script[\s\S]*?<\/script>/g,
    "",
  );
  const window = new Window({
    url,
    settings: {
      disableJavaScriptFileLoading: true,
      disableJavaScriptEvaluation: true,
      disableCSSFileLoading: true,
    },
  });
  windows.push(window);
  window.document.write(html);
  const doc = window.document as unknown as Document;
  const app = initApp(doc, { baseUrl: BASE });
  return { doc, app };
}

function click(doc: Document, id: string): void {
  const el = doc.getElementById(id);
  if (!el) throw new Error(`nothing to click: #${id}`);
  (el as HTMLElement).click();
}

beforeAll(async () => {
  service = spawn("stablerank-serve", ["--port", String(PORT)], {
    stdio: ["ignore", "pipe", "pipe"],
  });
  service.stdout?.on("data", (chunk: Buffer) => (serviceLog += chunk.toString()));
  service.stderr?.on("data", (chunk: Buffer) => (serviceLog += chunk.toString()));
  await waitForService();
});

afterAll(async () => {
  for (const window of windows) {
    await window.happyDOM.close().catch(() => undefined);
  }
  if (service && service.exitCode === null) {
    service.kill("SIGTERM");
    await new Promise<void>((resolve) => {
      const force = setTimeout(() => {
        service.kill("SIGKILL");
        resolve();
      }, 5000);
      service.once("exit", () => {
        clearTimeout(force);
        resolve();
      });
    });
  }
});

describe("explorer against a live service", () => {
  it("walks the demo dataset to exhaustion: 11 cards, then the banner", async () => {
    const { doc, app } = await loadPage(`${BASE}/`);

    click(doc, "demo-btn");
    await app.idle();
    expect(doc.getElementById("dataset-summary")?.hasAttribute("hidden")).toBe(false);
    expect(doc.getElementById("dataset-summary")?.textContent).toContain("5 items");
    expect((doc.getElementById("weights-input") as HTMLInputElement).value).toBe("1, 1");
    expect((doc.getElementById("start-btn") as HTMLButtonElement).disabled).toBe(false);

    click(doc, "start-btn");
    await app.idle();
    expect(doc.getElementById("session-panel")?.hasAttribute("hidden")).toBe(false);
    expect(doc.getElementById("config-panel")?.hasAttribute("hidden")).toBe(true);
    const referenceChips = Array.from(
      doc.querySelectorAll("#reference-strip .chip"),
      (chip) => chip.textContent,
    );
    expect(referenceChips).toEqual(["t2", "t4", "t3", "t5", "t1"]);

    for (let i = 1; i <= 11; i++) {
      click(doc, "next-btn");
      await app.idle();
      expect(doc.querySelectorAll(".card")).toHaveLength(i);
      expect(doc.getElementById("exhausted-banner")).toBeNull();
    }

    const firstCard = doc.querySelector('.card[data-index="1"]');
    expect(firstCard?.textContent).toContain("39.49%");
    const firstChips = Array.from(firstCard!.querySelectorAll(".chip"), (c) => c.textContent);
    expect(firstChips).toEqual(["t2", "t4", "t1", "t3", "t5"]);

    // One more press discovers nothing: the service answers 204 and the
    // refreshed view replaces the button with the exhausted banner.
    click(doc, "next-btn");
    await app.idle();
    expect(doc.querySelectorAll(".card")).toHaveLength(11);
    const banner = doc.getElementById("exhausted-banner");
    expect(banner).not.toBeNull();
    expect(banner?.textContent).toContain("exhausted");
    expect(banner?.textContent).toContain("11 rankings");
    expect(doc.getElementById("next-btn")).toBeNull();

    expect(doc.querySelectorAll("#chart .bar-row")).toHaveLength(11);
    expect(doc.querySelectorAll("#axis .region-arc")).toHaveLength(11);
  });

  it("shows the per-item rank deltas of card 1 against the reference", async () => {
    const { doc, app } = await loadPage(`${BASE}/`);
    click(doc, "demo-btn");
    await app.idle();
    click(doc, "start-btn");
    await app.idle();
    click(doc, "next-btn");
    await app.idle();

    const row = (item: string) =>
      doc.querySelector(`.card[data-index="1"] tr[data-item="${item}"]`);
    expect(row("t1")?.getAttribute("data-delta")).toBe("+2");
    expect(row("t3")?.getAttribute("data-delta")).toBe("-1");
    expect(row("t5")?.getAttribute("data-delta")).toBe("-1");
    expect(row("t2")?.getAttribute("data-delta")).toBe("0");
    expect(row("t4")?.getAttribute("data-delta")).toBe("0");
  });

  it("rebuilds the same view from the session history after a reload", async () => {
    const first = await loadPage(`${BASE}/`);
    click(first.doc, "demo-btn");
    await first.app.idle();
    click(first.doc, "start-btn");
    await first.app.idle();
    for (let i = 0; i < 3; i++) {
      click(first.doc, "next-btn");
      await first.app.idle();
    }
    const hash = windows[windows.length - 1]!.location.hash;
    expect(hash).toContain("s=");

    const second = await loadPage(`${BASE}/${hash}`);
    await second.app.idle();
    expect(second.doc.getElementById("session-panel")?.hasAttribute("hidden")).toBe(false);
    expect(second.doc.querySelectorAll(".card")).toHaveLength(3);
    const chips = Array.from(
      second.doc.querySelectorAll("#reference-strip .chip"),
      (chip) => chip.textContent,
    );
    expect(chips).toEqual(["t2", "t4", "t3", "t5", "t1"]);
    expect(
      second.doc
        .querySelector('.card[data-index="1"] tr[data-item="t1"]')
        ?.getAttribute("data-delta"),
    ).toBe("+2");
  });

  it("surfaces invalid reference weights without calling the service", async () => {
    const { doc, app } = await loadPage(`${BASE}/`);
    click(doc, "demo-btn");
    await app.idle();
    (doc.getElementById("weights-input") as HTMLInputElement).value = "0, 0";
    click(doc, "start-btn");
    await app.idle();
    const error = doc.getElementById("config-error");
    expect(error?.hasAttribute("hidden")).toBe(false);
    expect(error?.textContent).toContain("positive");
    expect(doc.getElementById("session-panel")?.hasAttribute("hidden")).toBe(true);
  });

  it("shows the similarity slider's derived cone angle", async () => {
    const { doc } = await loadPage(`${BASE}/`);
    const readout = doc.getElementById("sim-readout");
    expect(readout?.textContent).toContain("0.998");
    expect(readout?.textContent).toContain("0.0633 rad");
  });

  it.skipIf(!existsSync(DIST_INDEX))("serves the built bundle at the root", async () => {
    const response = await fetch(`${BASE}/`);
    expect(response.status).toBe(200);
    const body = await response.text();
    expect(body).toContain("stablerank explorer");
    const asset = await fetch(`${BASE}/assets/boot.js`);
    expect(asset.status).toBe(200);
  });
});
