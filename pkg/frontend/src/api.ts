// Typed client for the engine API. Rejected commands and validation errors
// surface verbatim through ApiError so the UI can display the server's reason.

import type {
  GraphDoc,
  GraphSummary,
  LibraryDoc,
  RunStatusDoc,
  SolutionDoc,
  SteeringCommandDoc,
  SynthesisSpecDoc,
  TraceEventDoc,
} from "./types.js";

export class ApiError extends Error {
  readonly status: number;
  readonly detail: unknown;

  constructor(status: number, detail: unknown) {
    super(typeof detail === "string" ? detail : JSON.stringify(detail));
    this.status = status;
    this.detail = detail;
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  readonly baseUrl: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
  }

  url(path: string, params?: Record<string, string | number | undefined>): string {
    const search = new URLSearchParams();
    for (const [key, value] of Object.entries(params ?? {})) {
      if (value !== undefined) search.set(key, String(value));
    }
    const query = search.toString();
    return this.baseUrl + path + (query ? `?${query}` : "");
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(path, init);
    const text = await response.text();
    let body: unknown = text;
    try {
      body = text ? JSON.parse(text) : null;
    } catch {
      // non-JSON bodies stay as text
    }
    if (!response.ok) {
      const detail =
        body && typeof body === "object" && "detail" in (body as Record<string, unknown>)
          ? (body as Record<string, unknown>).detail
          : body;
      throw new ApiError(response.status, detail);
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  getLibrary(): Promise<LibraryDoc> {
    return this.request(this.url("/library"));
  }

  listGraphs(implementsId?: string, runId?: string): Promise<GraphSummary[]> {
    return this.request(this.url("/graphs", { implements: implementsId, runId }));
  }

  getGraph(graphId: string, runId?: string): Promise<GraphDoc> {
    return this.request(this.url(`/graphs/${encodeURIComponent(graphId)}`, { runId }));
  }

  startRun(graphId: string, inputs: unknown[]): Promise<{ runId: string }> {
    return this.post(this.url("/runs"), { graphId, inputs });
  }

  getRun(runId: string): Promise<RunStatusDoc> {
    return this.request(this.url(`/runs/${encodeURIComponent(runId)}`));
  }

  step(runId: string, n = 1): Promise<RunStatusDoc> {
    return this.post(this.url(`/runs/${encodeURIComponent(runId)}/step`, { n }), {});
  }

  getTrace(runId: string, since = 0): Promise<TraceEventDoc[]> {
    return this.request(this.url(`/runs/${encodeURIComponent(runId)}/trace`, { since }));
  }

  command(runId: string, command: SteeringCommandDoc): Promise<{ accepted: boolean }> {
    return this.post(this.url(`/runs/${encodeURIComponent(runId)}/command`), command);
  }

  synthesize(spec: SynthesisSpecDoc): Promise<SolutionDoc> {
    return this.post(this.url("/synthesize"), spec);
  }

  uploadGraph(runId: string, graphId: string, graph: unknown): Promise<{ accepted: boolean }> {
    return this.post(this.url("/graphs"), { runId, id: graphId, graph });
  }
}
