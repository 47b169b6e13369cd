/** Thin API client; the fetch implementation is injectable for tests. */

import type {
  ApiError,
  EnvelopePayload,
  EnvelopeRequest,
  PlanResultPayload,
  ScenariosPayload,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiRequestError extends Error {
  readonly status: number;
  readonly kind: string;

  constructor(status: number, kind: string, message: string) {
    super(message);
    this.status = status;
    this.kind = kind;
  }
}

async function fail(response: Response): Promise<never> {
  let kind = "error";
  let message = `HTTP ${response.status}`;
  try {
    const body = (await response.json()) as ApiError;
    if (body.error) kind = body.error;
    if (body.message) message = body.message;
  } catch {
    // non-JSON error body: keep the generic message
  }
  throw new ApiRequestError(response.status, kind, message);
}

export class ApiClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(base = "", fetchImpl: FetchLike = (...args) => fetch(...args)) {
    this.base = base.replace(/\/$/, "");
    this.fetchImpl = fetchImpl;
  }

  async envelope(request: EnvelopeRequest): Promise<EnvelopePayload> {
    const response = await this.fetchImpl(`${this.base}/api/v1/envelope`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(request),
    });
    if (!response.ok) await fail(response);
    return (await response.json()) as EnvelopePayload;
  }

  async scenarios(): Promise<ScenariosPayload> {
    const response = await this.fetchImpl(`${this.base}/api/v1/scenarios`);
    if (!response.ok) await fail(response);
    return (await response.json()) as ScenariosPayload;
  }

  async plan(body: unknown): Promise<PlanResultPayload> {
    const response = await this.fetchImpl(`${this.base}/api/v1/plan`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) await fail(response);
    return (await response.json()) as PlanResultPayload;
  }
}
