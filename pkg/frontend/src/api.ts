/** Thin typed client over the session HTTP API. */

import type {
  DatasetInfo,
  MapBody,
  MetricsBody,
  Pending,
  SessionRow,
  StateSummary,
  VoteItem,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`${status}: ${detail}`);
  }
}

async function parseError(response: Response): Promise<never> {
  let detail = response.statusText;
  try {
    const body = (await response.json()) as { detail?: unknown };
    if (body && body.detail !== undefined) {
      detail =
        typeof body.detail === "string" ? body.detail : JSON.stringify(body.detail);
    }
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(response.status, detail);
}

export class ApiClient {
  constructor(public baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async get<T>(path: string): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`);
    if (!response.ok) await parseError(response);
    return (await response.json()) as T;
  }

  private async post<T>(path: string, body?: unknown): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) await parseError(response);
    return (await response.json()) as T;
  }

  listDatasets(): Promise<DatasetInfo[]> {
    return this.get("/datasets");
  }

  listSessions(): Promise<SessionRow[]> {
    return this.get("/sessions");
  }

  createSession(dataset: string, config: Record<string, unknown>): Promise<StateSummary> {
    return this.post("/sessions", { dataset, config });
  }

  state(id: string): Promise<StateSummary> {
    return this.get(`/sessions/${id}/state`);
  }

  pending(id: string): Promise<Pending> {
    return this.get(`/sessions/${id}/pending`);
  }

  submitVotes(id: string, votes: VoteItem[]): Promise<{ phase: string; k: number }> {
    return this.post(`/sessions/${id}/votes`, { votes });
  }

  validate(
    id: string,
    flip: number[],
  ): Promise<{ corrections: number; phase: string; k: number }> {
    return this.post(`/sessions/${id}/validate`, { flip });
  }

  step(id: string): Promise<{ phase: string; k: number }> {
    return this.post(`/sessions/${id}/step`);
  }

  map(id: string): Promise<MapBody> {
    return this.get(`/sessions/${id}/map`);
  }

  metrics(id: string): Promise<MetricsBody> {
    return this.get(`/sessions/${id}/metrics`);
  }
}
