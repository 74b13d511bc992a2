/**
 * Typed client for the labeling-session HTTP API.
 *
 * Network failures (connection refused, timeouts) retry with exponential
 * backoff; HTTP error statuses are structured outcomes and are surfaced as
 * ApiError immediately so callers can react (409 stale_batch in particular).
 */

export interface BatchInstance {
  id: number;
  text: string;
}

export interface Batch {
  batch_id: number;
  instances: BatchInstance[];
  class_names: string[];
}

export interface CurvePoint {
  num_labeled: number;
  accuracy?: number;
}

export type SessionStatus = "awaiting_labels" | "training" | "finished" | "error";

export interface Progress {
  session_id?: string;
  iteration: number;
  num_labeled: number;
  status: SessionStatus;
  curve: CurvePoint[];
  detail?: string;
}

export interface LabelEntry {
  id: number;
  label: number;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    readonly detail: string,
  ) {
    super(`${code}: ${detail}`);
  }
}

export interface RetryOptions {
  attempts?: number;
  baseDelayMs?: number;
  sleep?: (ms: number) => Promise<void>;
}

const defaultSleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

async function request<T>(
  url: string,
  init: RequestInit,
  retry: RetryOptions,
): Promise<T> {
  const attempts = retry.attempts ?? 5;
  const base = retry.baseDelayMs ?? 250;
  const sleep = retry.sleep ?? defaultSleep;
  let lastFailure: unknown;
  for (let attempt = 0; attempt < attempts; attempt++) {
    try {
      const response = await fetch(url, init);
      const body = await response.json().catch(() => ({}));
      if (!response.ok) {
        throw new ApiError(
          response.status,
          typeof body.error === "string" ? body.error : "http_error",
          typeof body.detail === "string" ? body.detail : response.statusText,
        );
      }
      return body as T;
    } catch (failure) {
      if (failure instanceof ApiError) throw failure;
      lastFailure = failure; // network-level: retry with backoff
      if (attempt < attempts - 1) await sleep(base * 2 ** attempt);
    }
  }
  throw lastFailure instanceof Error ? lastFailure : new Error(String(lastFailure));
}

export class SessionApi {
  constructor(
    readonly baseUrl: string,
    private readonly retry: RetryOptions = {},
  ) {}

  createSession(config: unknown): Promise<{ session_id: string }> {
    return request(`${this.baseUrl}/sessions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(config),
    }, this.retry);
  }

  listSessions(): Promise<{ sessions: string[] }> {
    return request(`${this.baseUrl}/sessions`, { method: "GET" }, this.retry);
  }

  getBatch(sessionId: string): Promise<Batch> {
    return request(`${this.baseUrl}/sessions/${sessionId}/batch`, { method: "GET" }, this.retry);
  }

  getProgress(sessionId: string): Promise<Progress> {
    return request(`${this.baseUrl}/sessions/${sessionId}/progress`, { method: "GET" }, this.retry);
  }

  submitLabels(
    sessionId: string,
    batchId: number,
    labels: LabelEntry[],
  ): Promise<{ status: string }> {
    return request(`${this.baseUrl}/sessions/${sessionId}/labels`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ batch_id: batchId, labels }),
    }, this.retry);
  }
}
