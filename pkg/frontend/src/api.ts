/** Typed client for the stablerank HTTP/JSON session service. */

export type Engine = "2d" | "md" | "random";
export type Mode = "full" | "topk-set" | "topk-ranked";
export type Relation = ">=" | "<=";

export interface AttrMeta {
  name: string;
  direction: string;
  raw_min: number;
  raw_max: number;
}

export interface DatasetInfo {
  dataset_id: string;
  n: number;
  d: number;
  ids: string[];
  attr_meta: AttrMeta[];
}

export interface ConstraintSpec {
  coeffs: number[];
  relation: Relation;
}

export interface RoiSpec {
  kind: "full" | "cone" | "constraints";
  ray?: number[];
  max_angle?: number;
  constraints?: ConstraintSpec[];
}

export interface SessionParams {
  samples?: number;
  seed?: number;
  alpha?: number;
  budget?: number;
  error?: number;
  sample_cap?: number;
}

export interface SessionRequest {
  dataset_id: string;
  engine: Engine;
  mode?: Mode;
  k?: number;
  roi?: RoiSpec;
  params?: SessionParams;
}

export interface SessionCreated {
  session_id: string;
  dataset_id: string;
  engine: string;
  mode: string;
  k: number | null;
  n: number;
  d: number;
  region_count?: number;
}

export interface RegionInterval {
  theta1: number;
  theta2: number;
}

/** One discovered result; `ranking` for full-ranking modes, `topk` otherwise. */
export interface ResultRecord {
  index: number;
  stability: number;
  confidence_error: number | null;
  weights: number[];
  ranking?: string[];
  topk?: string[];
  region?: RegionInterval;
  samples_used?: number;
}

export interface SessionInfo {
  session_id: string;
  dataset_id: string;
  engine: string;
  mode: string;
  k: number | null;
  roi: RoiSpec;
  exhausted: boolean;
  created: number;
  history: ResultRecord[];
}

export interface VerifyRequest {
  dataset_id: string;
  ranking?: string[];
  weights?: number[];
  roi?: RoiSpec;
  samples?: number;
  seed?: number;
  alpha?: number;
}

export interface VerifyResult {
  stability: number;
  stability_quadrant?: number;
  confidence_error: number | null;
  region: RegionInterval | { halfspaces: number };
  ranking: string[];
  samples: number;
}

/** The service rejected the request; `detail` is its explanation, shown inline. */
export class ApiError extends Error {
  constructor(readonly status: number, readonly detail: string) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
  }
}

/** The request never reached the service (connection refused, dropped, DNS). Retriable. */
export class NetworkError extends Error {
  constructor(cause: unknown) {
    super(cause instanceof Error ? cause.message : String(cause));
    this.name = "NetworkError";
  }
}

export function isRegionInterval(r: VerifyResult["region"]): r is RegionInterval {
  return typeof (r as RegionInterval).theta1 === "number";
}

async function errorDetail(response: Response): Promise<string> {
  const text = await response.text().catch(() => "");
  try {
    const body = JSON.parse(text) as { detail?: unknown };
    if (typeof body.detail === "string") return body.detail;
    if (body.detail !== undefined) return JSON.stringify(body.detail);
  } catch {
    /* not JSON: fall through to the raw text */
  }
  return text || response.statusText || `status ${response.status}`;
}

export class Client {
  private readonly fetchImpl: typeof fetch;

  constructor(
    private readonly base: string = "",
    fetchImpl?: typeof fetch,
  ) {
    this.fetchImpl = fetchImpl ?? ((...args) => globalThis.fetch(...args));
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.base + path, init);
    } catch (cause) {
      throw new NetworkError(cause);
    }
    if (!response.ok) {
      throw new ApiError(response.status, await errorDetail(response));
    }
    return response;
  }

  private async requestJson<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.request(path, init);
    return (await response.json()) as T;
  }

  async uploadDataset(
    csv: string,
    idCol: string,
    attrs: string[],
    normalize: boolean,
  ): Promise<DatasetInfo> {
    const params = new URLSearchParams();
    params.set("id_col", idCol);
    for (const a of attrs) params.append("attr", a);
    params.set("normalize", normalize ? "true" : "false");
    return this.requestJson<DatasetInfo>(`/api/datasets?${params.toString()}`, {
      method: "POST",
      headers: { "content-type": "text/csv" },
      body: csv,
    });
  }

  async createSession(req: SessionRequest): Promise<SessionCreated> {
    return this.requestJson<SessionCreated>("/api/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(req),
    });
  }

  /** One step of the producer loop; `null` means the region is exhausted (204). */
  async next(sessionId: string): Promise<ResultRecord | null> {
    const response = await this.request(`/api/sessions/${sessionId}/next`, {
      method: "POST",
    });
    if (response.status === 204) return null;
    return (await response.json()) as ResultRecord;
  }

  async getSession(sessionId: string): Promise<SessionInfo> {
    return this.requestJson<SessionInfo>(`/api/sessions/${sessionId}`);
  }

  async deleteSession(sessionId: string): Promise<void> {
    await this.request(`/api/sessions/${sessionId}`, { method: "DELETE" });
  }

  async verify(req: VerifyRequest): Promise<VerifyResult> {
    return this.requestJson<VerifyResult>("/api/verify", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(req),
    });
  }
}
