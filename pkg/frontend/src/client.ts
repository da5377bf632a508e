/** Thin typed client for the dialogue service HTTP API. */

import type {
  HealthResponse,
  MessageResponse,
  SessionCreated,
  SessionSnapshot,
} from "./types.js";

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

/** What the view layer needs from a service client; fakes implement this. */
export interface DialogueService {
  health(): Promise<HealthResponse>;
  createSession(): Promise<SessionCreated>;
  sendMessage(sessionId: string, text: string): Promise<MessageResponse>;
  getSnapshot(sessionId: string): Promise<SessionSnapshot>;
}

/** The service answered with a non-2xx status. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

/** The request never produced a response (connection refused, DNS, abort). */
export class NetworkError extends Error {
  constructor(readonly cause_: unknown) {
    super("could not reach the dialogue service");
    this.name = "NetworkError";
  }
}

async function errorMessage(response: Response): Promise<string> {
  try {
    const body = (await response.json()) as { detail?: unknown };
    if (typeof body.detail === "string") return body.detail;
  } catch {
    /* non-JSON error body; fall through to the status line */
  }
  return `request failed with status ${response.status}`;
}

export class ServiceClient implements DialogueService {
  private readonly baseUrl: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    const impl = fetchImpl ?? (globalThis.fetch as FetchLike | undefined);
    if (!impl) {
      throw new Error("no fetch implementation available");
    }
    // Bind so a bare global fetch keeps its expected receiver.
    this.fetchImpl = fetchImpl ?? ((input, init) => impl(input, init));
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.baseUrl + path, {
        method,
        headers: body === undefined ? {} : { "content-type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (cause) {
      throw new NetworkError(cause);
    }
    if (!response.ok) {
      throw new ApiError(response.status, await errorMessage(response));
    }
    return (await response.json()) as T;
  }

  health(): Promise<HealthResponse> {
    return this.request("GET", "/api/health");
  }

  createSession(): Promise<SessionCreated> {
    return this.request("POST", "/api/sessions");
  }

  sendMessage(sessionId: string, text: string): Promise<MessageResponse> {
    return this.request(
      "POST",
      `/api/sessions/${encodeURIComponent(sessionId)}/messages`,
      { text },
    );
  }

  getSnapshot(sessionId: string): Promise<SessionSnapshot> {
    return this.request(
      "GET",
      `/api/sessions/${encodeURIComponent(sessionId)}`,
    );
  }
}
