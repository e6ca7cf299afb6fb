/** Thin typed client for the trace service HTTP API. */

import type {
  ExpansionState,
  RenderTree,
  TraceDocument,
  TraceStats,
  ViewName,
} from "./types.js";

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

/** The slice of the service API the controller depends on; tests inject
 * fakes through this seam. */
export interface TraceApi {
  getDocument(traceId: string): Promise<TraceDocument>;
  getStats(traceId: string): Promise<TraceStats>;
  getLayout(
    traceId: string,
    view: ViewName,
    state: ExpansionState,
    viewport: { width: number; height: number },
  ): Promise<RenderTree>;
}

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
  ) {
    super(message);
  }
}

async function parseOrThrow<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const payload = (await response.json()) as { detail?: string; error?: string };
      detail = payload.detail ?? payload.error ?? detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(detail, response.status);
  }
  return (await response.json()) as T;
}

export class ApiClient implements TraceApi {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async submitTrace(body: string, backend = "heuristic"): Promise<string> {
    const response = await this.fetchFn(
      `${this.base}/api/traces?backend=${encodeURIComponent(backend)}`,
      { method: "POST", body },
    );
    const payload = await parseOrThrow<{ trace_id: string }>(response);
    return payload.trace_id;
  }

  async getDocument(traceId: string): Promise<TraceDocument> {
    const response = await this.fetchFn(`${this.base}/api/traces/${traceId}`);
    return parseOrThrow<TraceDocument>(response);
  }

  async getStats(traceId: string): Promise<TraceStats> {
    const response = await this.fetchFn(
      `${this.base}/api/traces/${traceId}/stats`,
    );
    return parseOrThrow<TraceStats>(response);
  }

  async getLayout(
    traceId: string,
    view: ViewName,
    state: ExpansionState,
    viewport: { width: number; height: number },
  ): Promise<RenderTree> {
    const response = await this.fetchFn(
      `${this.base}/api/traces/${traceId}/layout`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ view, state, viewport }),
      },
    );
    return parseOrThrow<RenderTree>(response);
  }
}
