/**
 * Typed client for the annotation service.
 *
 * Network failures and transient 5xx responses (502/503/504) are retried
 * with a short backoff. Label submissions carry an idempotency token that
 * stays the same across retries, so a request whose response got lost can
 * be resent safely: the server applies it once and replays the original
 * round log.
 */

import type {
  ApiError,
  FeatureSubmission,
  Guidelines,
  InstanceSubmission,
  LabelsRequest,
  Metrics,
  QueriesResponse,
  RoundLog,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Server rejected the request (4xx/non-transient 5xx); not retried. */
export class RequestFailed extends Error {
  readonly status: number;
  readonly code: string;

  constructor(status: number, body: ApiError) {
    super(body.message);
    this.status = status;
    this.code = body.code;
  }
}

/** All retry attempts exhausted without reaching the server. */
export class ServerUnreachable extends Error {
  constructor(cause: unknown) {
    super(`annotation service unreachable: ${String(cause)}`);
  }
}

function isTransient(status: number): boolean {
  return status === 502 || status === 503 || status === 504;
}

const sleep = (ms: number) => new Promise((resolve) => setTimeout(resolve, ms));

export interface ApiClientOptions {
  fetchImpl?: FetchLike;
  retries?: number;
  retryDelayMs?: number;
}

export class ApiClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;
  private readonly retries: number;
  private readonly retryDelayMs: number;

  constructor(baseUrl: string, options: ApiClientOptions = {}) {
    this.base = baseUrl.replace(/\/$/, "");
    this.fetchImpl = options.fetchImpl ?? ((input, init) => fetch(input, init));
    this.retries = options.retries ?? 3;
    this.retryDelayMs = options.retryDelayMs ?? 400;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let lastError: unknown = null;
    for (let attempt = 0; attempt <= this.retries; attempt++) {
      if (attempt > 0) {
        await sleep(this.retryDelayMs * attempt);
      }
      let response: Response;
      try {
        response = await this.fetchImpl(`${this.base}${path}`, init);
      } catch (error) {
        lastError = error; // network error: retry
        continue;
      }
      if (isTransient(response.status)) {
        lastError = new Error(`HTTP ${response.status}`);
        continue;
      }
      if (!response.ok) {
        let body: ApiError;
        try {
          body = (await response.json()) as ApiError;
        } catch {
          body = { code: "http_error", message: `HTTP ${response.status}` };
        }
        throw new RequestFailed(response.status, body);
      }
      return (await response.json()) as T;
    }
    throw new ServerUnreachable(lastError);
  }

  health(): Promise<{ status: string }> {
    return this.request("/health");
  }

  /** null when the service has no guideline file; the panel then hides. */
  async guidelines(): Promise<Guidelines | null> {
    try {
      return await this.request<Guidelines>("/guidelines");
    } catch (error) {
      if (error instanceof RequestFailed) {
        return null;
      }
      throw error;
    }
  }

  async createSession(config: Record<string, unknown> = {}): Promise<string> {
    const body = await this.request<{ session_id: string }>("/sessions", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ config }),
    });
    return body.session_id;
  }

  getQueries(sessionId: string, instances: number, features: number): Promise<QueriesResponse> {
    return this.request(
      `/sessions/${sessionId}/queries?instances=${instances}&features=${features}`,
    );
  }

  getMetrics(sessionId: string): Promise<Metrics> {
    return this.request(`/sessions/${sessionId}/metrics`);
  }

  /**
   * Submit one decision batch. The token makes retries exactly-once; pass
   * the same token again and the server returns the original log untouched.
   */
  submitLabels(
    sessionId: string,
    token: string,
    raterId: string,
    instances: InstanceSubmission[],
    features: FeatureSubmission[],
  ): Promise<RoundLog> {
    const payload: LabelsRequest = {
      token,
      rater_id: raterId,
      instances,
      features,
    };
    return this.request(`/sessions/${sessionId}/labels`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }
}

export function newToken(): string {
  if (typeof crypto !== "undefined" && "randomUUID" in crypto) {
    return crypto.randomUUID();
  }
  return `tok-${Date.now()}-${Math.random().toString(36).slice(2)}`;
}
