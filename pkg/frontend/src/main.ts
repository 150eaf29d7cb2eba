/**
 * Explorer wiring: one session per tab, requests strictly sequential.
 * All session rendering goes through a full refetch of the session history,
 * so a page reload (or a second render) reproduces the same view.
 */

import {
  ApiError,
  Client,
  NetworkError,
  type ConstraintSpec,
  type DatasetInfo,
  type Relation,
  type RoiSpec,
  type SessionRequest,
} from "./api.js";
import {
  DEMO_ATTRS,
  DEMO_CSV,
  DEMO_ID_COL,
  DEMO_NORMALIZE,
  DEMO_REFERENCE_WEIGHTS,
} from "./demo.js";
import {
  angleFromSimilarity,
  formatAngle,
  parseConstraintCoeffs,
  parseWeights,
  type Parsed,
} from "./diff.js";
import { renderDatasetSummary, renderSessionPanel, renderToast } from "./render.js";
import { buildSessionView, referenceFromVerify, type Reference } from "./state.js";

export interface AppOptions {
  baseUrl?: string;
  fetchImpl?: typeof fetch;
}

export interface AppHandle {
  /** Resolves once every queued action (clicks, restore) has settled. */
  idle(): Promise<void>;
}

export function initApp(doc: Document, opts: AppOptions = {}): AppHandle {
  const client = new Client(opts.baseUrl ?? "", opts.fetchImpl);

  const $ = <T extends HTMLElement>(id: string): T => {
    const el = doc.getElementById(id);
    if (!el) throw new Error(`missing element #${id}`);
    return el as T;
  };

  const configPanel = $<HTMLElement>("config-panel");
  const sessionPanel = $<HTMLElement>("session-panel");
  const datasetSummary = $<HTMLElement>("dataset-summary");
  const configError = $<HTMLElement>("config-error");
  const toastRegion = $<HTMLElement>("toast-region");
  const weightsInput = $<HTMLInputElement>("weights-input");
  const roiKind = $<HTMLSelectElement>("roi-kind");
  const coneControls = $<HTMLElement>("cone-controls");
  const simSlider = $<HTMLInputElement>("sim-slider");
  const simReadout = $<HTMLElement>("sim-readout");
  const constraintControls = $<HTMLElement>("constraint-controls");
  const constraintRows = $<HTMLElement>("constraint-rows");
  const engineSelect = $<HTMLSelectElement>("engine-select");
  const modeSelect = $<HTMLSelectElement>("mode-select");
  const kInput = $<HTMLInputElement>("k-input");
  const seedInput = $<HTMLInputElement>("seed-input");
  const samplesInput = $<HTMLInputElement>("samples-input");
  const budgetInput = $<HTMLInputElement>("budget-input");
  const errorInput = $<HTMLInputElement>("error-input");
  const startBtn = $<HTMLButtonElement>("start-btn");

  let dataset: Pick<DatasetInfo, "dataset_id" | "d"> | null = null;
  let sessionId: string | null = null;
  let reference: Reference | null = null;
  let pendingRetry: (() => Promise<void>) | null = null;

  let chain: Promise<void> = Promise.resolve();
  const enqueue = (action: () => Promise<void>): void => {
    chain = chain.then(action).catch((err: unknown) => {
      showToast(`Unexpected error: ${err instanceof Error ? err.message : String(err)}`);
    });
  };

  // ---- feedback helpers -------------------------------------------------

  function showConfigError(message: string | null): void {
    configError.hidden = message === null;
    configError.textContent = message ?? "";
  }

  function showSessionError(message: string | null): void {
    const el = doc.getElementById("session-error");
    if (!el) return;
    el.hidden = message === null;
    el.textContent = message ?? "";
  }

  function showToast(message: string, retry?: () => Promise<void>): void {
    pendingRetry = retry ?? null;
    toastRegion.innerHTML = renderToast(message, retry !== undefined);
  }

  function clearToast(): void {
    pendingRetry = null;
    toastRegion.innerHTML = "";
  }

  // ---- config panel state ----------------------------------------------

  function setDataset(info: DatasetInfo): void {
    dataset = info;
    datasetSummary.hidden = false;
    datasetSummary.innerHTML = renderDatasetSummary(info);
    weightsInput.placeholder = Array(info.d).fill("1").join(", ");
    startBtn.disabled = false;
    syncEngineChoices(info.d);
  }

  function setRestoredDataset(datasetId: string, d: number): void {
    dataset = { dataset_id: datasetId, d };
    datasetSummary.hidden = false;
    datasetSummary.textContent = `dataset ${datasetId} (restored session)`;
    startBtn.disabled = false;
    syncEngineChoices(d);
  }

  function syncEngineChoices(d: number): void {
    const exact2d = engineSelect.querySelector<HTMLOptionElement>('option[value="2d"]');
    if (exact2d) exact2d.disabled = d !== 2;
    if (d !== 2 && engineSelect.value === "2d") engineSelect.value = "md";
    syncEngineControls();
  }

  function syncEngineControls(): void {
    const engine = engineSelect.value;
    const isRandom = engine === "random";
    modeSelect.disabled = !isRandom;
    if (!isRandom) modeSelect.value = "full";
    budgetInput.disabled = !isRandom;
    errorInput.disabled = !isRandom;
    samplesInput.disabled = engine !== "md";
    kInput.disabled = modeSelect.value === "full";
  }

  function updateSimReadout(): void {
    const sim = Number(simSlider.value);
    simReadout.textContent = `sim ${sim.toFixed(4)} → θ = ${formatAngle(angleFromSimilarity(sim))}`;
  }

  function syncRoiControls(): void {
    coneControls.hidden = roiKind.value !== "cone";
    constraintControls.hidden = roiKind.value !== "constraints";
    if (roiKind.value === "constraints" && constraintRows.childElementCount === 0) {
      addConstraintRow();
    }
    updateSimReadout();
  }

  function addConstraintRow(): void {
    const row = doc.createElement("div");
    row.className = "constraint-row";
    row.innerHTML =
      `<label>coefficients <input class="constraint-coeffs" type="text" placeholder="1, -1" /></label>` +
      `<label>relation <select class="constraint-rel">` +
      `<option value=">=">≥ 0</option><option value="<=">≤ 0</option></select></label>` +
      `<button type="button" class="remove-constraint" aria-label="remove constraint">✕</button>`;
    constraintRows.appendChild(row);
  }

  function buildRoi(weights: number[]): Parsed<RoiSpec | undefined> {
    if (roiKind.value === "full") return { ok: true, value: undefined };
    if (roiKind.value === "cone") {
      return {
        ok: true,
        value: {
          kind: "cone",
          ray: weights,
          max_angle: angleFromSimilarity(Number(simSlider.value)),
        },
      };
    }
    const constraints: ConstraintSpec[] = [];
    for (const row of Array.from(constraintRows.querySelectorAll(".constraint-row"))) {
      const coeffsInput = row.querySelector<HTMLInputElement>(".constraint-coeffs");
      const relSelect = row.querySelector<HTMLSelectElement>(".constraint-rel");
      if (!coeffsInput || !relSelect) continue;
      const coeffs = parseConstraintCoeffs(coeffsInput.value, dataset?.d ?? 0);
      if (!coeffs.ok) return coeffs;
      constraints.push({ coeffs: coeffs.value, relation: relSelect.value as Relation });
    }
    if (constraints.length === 0) {
      return { ok: false, error: "add at least one constraint" };
    }
    return { ok: true, value: { kind: "constraints", constraints } };
  }

  function buildSessionRequest(roi: RoiSpec | undefined): SessionRequest {
    const engine = engineSelect.value as SessionRequest["engine"];
    const mode = modeSelect.value as SessionRequest["mode"];
    const req: SessionRequest = {
      dataset_id: dataset!.dataset_id,
      engine,
      mode,
      params: { seed: Number(seedInput.value) || 0 },
    };
    if (roi) req.roi = roi;
    if (mode !== "full") req.k = Number(kInput.value) || 1;
    if (engine === "md") req.params!.samples = Number(samplesInput.value) || 100_000;
    if (engine === "random") {
      const errorTarget = errorInput.value.trim();
      if (errorTarget !== "") req.params!.error = Number(errorTarget);
      else req.params!.budget = Number(budgetInput.value) || 10_000;
    }
    return req;
  }

  // ---- hash (refresh safety) ---------------------------------------------

  function location(): Location | null {
    return doc.defaultView?.location ?? null;
  }

  function setHash(sid: string, datasetId: string, weights: number[]): void {
    const params = new URLSearchParams();
    params.set("s", sid);
    params.set("ds", datasetId);
    params.set("w", weights.join(","));
    const loc = location();
    if (loc) loc.hash = params.toString();
  }

  function clearHash(): void {
    const loc = location();
    if (loc) loc.hash = "";
  }

  // ---- actions ------------------------------------------------------------

  async function loadDemo(): Promise<void> {
    showConfigError(null);
    clearToast();
    try {
      const info = await client.uploadDataset(DEMO_CSV, DEMO_ID_COL, DEMO_ATTRS, DEMO_NORMALIZE);
      setDataset(info);
      weightsInput.value = DEMO_REFERENCE_WEIGHTS;
    } catch (err) {
      if (err instanceof NetworkError) showToast(`The service is unreachable: ${err.message}`, loadDemo);
      else if (err instanceof ApiError) showConfigError(err.detail);
      else throw err;
    }
  }

  async function uploadFromForm(): Promise<void> {
    showConfigError(null);
    clearToast();
    const fileInput = $<HTMLInputElement>("file-input");
    const file = fileInput.files?.[0];
    if (!file) {
      showConfigError("choose a CSV file to upload");
      return;
    }
    const attrs = $<HTMLInputElement>("attrs-input")
      .value.split(",")
      .map((a) => a.trim())
      .filter((a) => a.length > 0);
    if (attrs.length === 0) {
      showConfigError("list the attribute columns, e.g. price:lower, rating:higher");
      return;
    }
    const idCol = $<HTMLInputElement>("idcol-input").value.trim();
    const normalize = $<HTMLInputElement>("normalize-input").checked;
    const csv = await file.text();
    try {
      setDataset(await client.uploadDataset(csv, idCol, attrs, normalize));
    } catch (err) {
      if (err instanceof NetworkError) showToast(`The service is unreachable: ${err.message}`, uploadFromForm);
      else if (err instanceof ApiError) showConfigError(err.detail);
      else throw err;
    }
  }

  async function refreshView(): Promise<void> {
    if (!sessionId || !reference) return;
    const info = await client.getSession(sessionId);
    sessionPanel.innerHTML = renderSessionPanel(buildSessionView(info, reference));
  }

  async function startSession(): Promise<void> {
    showConfigError(null);
    clearToast();
    if (!dataset) {
      showConfigError("load or upload a dataset first");
      return;
    }
    const weights = parseWeights(weightsInput.value, dataset.d);
    if (!weights.ok) {
      showConfigError(weights.error);
      return;
    }
    const roi = buildRoi(weights.value);
    if (!roi.ok) {
      showConfigError(roi.error);
      return;
    }
    try {
      const created = await client.createSession(buildSessionRequest(roi.value));
      const verified = await client.verify({
        dataset_id: dataset.dataset_id,
        weights: weights.value,
        roi: roi.value,
      });
      reference = referenceFromVerify(weights.value, verified);
      sessionId = created.session_id;
      setHash(created.session_id, dataset.dataset_id, weights.value);
      await refreshView();
      configPanel.hidden = true;
      sessionPanel.hidden = false;
    } catch (err) {
      if (err instanceof NetworkError) showToast(`The service is unreachable: ${err.message}`, startSession);
      else if (err instanceof ApiError) showConfigError(err.detail);
      else throw err;
    }
  }

  async function nextCard(): Promise<void> {
    if (!sessionId) return;
    clearToast();
    const nextBtn = doc.getElementById("next-btn") as HTMLButtonElement | null;
    if (nextBtn) nextBtn.disabled = true;
    let apiDetail: string | null = null;
    try {
      await client.next(sessionId);
    } catch (err) {
      if (err instanceof NetworkError) {
        showToast(`The service is unreachable: ${err.message}`, nextCard);
        if (nextBtn) nextBtn.disabled = false;
        return;
      }
      if (err instanceof ApiError) apiDetail = err.detail;
      else throw err;
    }
    try {
      await refreshView();
    } catch (err) {
      if (err instanceof NetworkError) {
        showToast(`The service is unreachable: ${err.message}`, nextCard);
        if (nextBtn) nextBtn.disabled = false;
        return;
      }
      if (err instanceof ApiError) {
        backToConfig(`session no longer available: ${err.detail}`);
        return;
      }
      throw err;
    }
    if (apiDetail) showSessionError(apiDetail);
  }

  function backToConfig(message: string | null): void {
    sessionId = null;
    reference = null;
    clearHash();
    sessionPanel.hidden = true;
    sessionPanel.innerHTML = "";
    configPanel.hidden = false;
    showConfigError(message);
  }

  async function resetToConfig(): Promise<void> {
    const sid = sessionId;
    backToConfig(null);
    if (sid) await client.deleteSession(sid).catch(() => undefined);
  }

  async function restore(sid: string, datasetId: string, weightsText: string): Promise<void> {
    try {
      const info = await client.getSession(sid);
      const weights = weightsText.split(",").map(Number);
      if (weights.some((w) => !Number.isFinite(w))) return;
      const verified = await client.verify({
        dataset_id: datasetId,
        weights,
        roi: info.roi.kind === "full" ? undefined : info.roi,
      });
      setRestoredDataset(datasetId, weights.length);
      reference = referenceFromVerify(weights, verified);
      sessionId = sid;
      await refreshView();
      configPanel.hidden = true;
      sessionPanel.hidden = false;
    } catch (err) {
      if (err instanceof NetworkError) {
        showToast(`The service is unreachable: ${err.message}`, () =>
          restore(sid, datasetId, weightsText),
        );
        return;
      }
      if (err instanceof ApiError) {
        clearHash();
        return;
      }
      throw err;
    }
  }

  // ---- wiring ---------------------------------------------------------------

  $<HTMLButtonElement>("demo-btn").addEventListener("click", () => enqueue(loadDemo));
  $<HTMLButtonElement>("upload-btn").addEventListener("click", () => enqueue(uploadFromForm));
  $<HTMLButtonElement>("start-btn").addEventListener("click", () => enqueue(startSession));
  $<HTMLButtonElement>("add-constraint-btn").addEventListener("click", () => addConstraintRow());
  roiKind.addEventListener("change", () => syncRoiControls());
  engineSelect.addEventListener("change", () => syncEngineControls());
  modeSelect.addEventListener("change", () => syncEngineControls());
  simSlider.addEventListener("input", () => updateSimReadout());

  constraintRows.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    if (target.classList.contains("remove-constraint")) {
      target.closest(".constraint-row")?.remove();
    }
  });

  sessionPanel.addEventListener("click", (event) => {
    const button = (event.target as HTMLElement).closest("button");
    if (!button) return;
    if (button.id === "next-btn") enqueue(nextCard);
    else if (button.id === "reset-btn") enqueue(resetToConfig);
  });

  toastRegion.addEventListener("click", (event) => {
    const button = (event.target as HTMLElement).closest("button");
    if (!button) return;
    const action = button.dataset["action"];
    if (action === "dismiss") clearToast();
    else if (action === "retry" && pendingRetry) {
      const retry = pendingRetry;
      clearToast();
      enqueue(retry);
    }
  });

  updateSimReadout();
  syncRoiControls();
  syncEngineControls();

  const hash = location()?.hash?.replace(/^#/, "") ?? "";
  if (hash) {
    const params = new URLSearchParams(hash);
    const sid = params.get("s");
    const datasetId = params.get("ds");
    const weightsText = params.get("w");
    if (sid && datasetId && weightsText) enqueue(() => restore(sid, datasetId, weightsText));
  }

  return {
    idle: () => chain,
  };
}
