/**
 * HTTP and event-stream client for the coordination service.
 *
 * fetch is injectable so tests can inspect traffic; the invariant that
 * no request before the reveal phase ever carries a value or mask is
 * asserted against exactly this seam.
 */

import { parseRecordLine, type TranscriptRecord } from "./records.js";

export interface CreateBody {
  session_id: string;
  modulus: number | bigint;
  roster: string[];
  candidates?: string[];
  metadata?: string;
  commit_deadline?: number;
  reveal_deadline?: number;
  predecessor?: string;
}

/** State snapshot as served by GET /v1/ceremonies/{id}. */
export interface StateSnapshot {
  session_id: string;
  phase: "commit" | "reveal" | "complete" | "aborted";
  modulus: number;
  metadata: string;
  roster: string[];
  stakeholders: Record<
    string,
    { status: string; digest: string | null; value: number | null; rejections: number }
  >;
  outcome: number | null;
  selected_candidate: string | null;
  abort_reason: string | null;
  successor_hint: string | null;
  last_seq: number;
  commit_deadline: number | null;
  reveal_deadline: number | null;
  predecessor: string | null;
}

export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    readonly detail: string,
  ) {
    super(`${code}: ${detail}`);
  }
}

type Fetch = typeof fetch;

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: Fetch = (...args) => fetch(...args),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      let code = "http_error";
      let detail = `${response.status}`;
      try {
        const body = (await response.json()) as { error?: string; detail?: string };
        if (typeof body.error === "string") code = body.error;
        if (typeof body.detail === "string") detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ServiceError(response.status, code, detail);
    }
    return response;
  }

  private async postJson(path: string, body: unknown, token?: string): Promise<unknown> {
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (token !== undefined) headers["Authorization"] = `Bearer ${token}`;
    const response = await this.request(path, {
      method: "POST",
      headers,
      body: JSON.stringify(body),
    });
    return response.json();
  }

  async createCeremony(body: CreateBody): Promise<{
    session_id: string;
    tokens: Record<string, string>;
    state: StateSnapshot;
  }> {
    let modulus = body.modulus;
    if (typeof modulus === "bigint") {
      if (modulus > BigInt(Number.MAX_SAFE_INTEGER)) {
        throw new RangeError("modulus above 2^53 is not supported by this client");
      }
      modulus = Number(modulus);
    }
    return (await this.postJson("/v1/ceremonies", { ...body, modulus })) as {
      session_id: string;
      tokens: Record<string, string>;
      state: StateSnapshot;
    };
  }

  async state(sessionId: string): Promise<StateSnapshot> {
    const response = await this.request(`/v1/ceremonies/${encodeURIComponent(sessionId)}`);
    return (await response.json()) as StateSnapshot;
  }

  async submitCommitment(
    sessionId: string,
    token: string,
    digestHex: string,
    stakeholderId?: string,
  ): Promise<StateSnapshot> {
    const body: Record<string, string> = { digest: digestHex };
    if (stakeholderId !== undefined) body["stakeholder_id"] = stakeholderId;
    return (await this.postJson(
      `/v1/ceremonies/${encodeURIComponent(sessionId)}/commitments`,
      body,
      token,
    )) as StateSnapshot;
  }

  async submitReveal(
    sessionId: string,
    token: string,
    value: bigint | number,
    maskHex: string,
    stakeholderId?: string,
  ): Promise<StateSnapshot> {
    // hand-built JSON: values can exceed Number.MAX_SAFE_INTEGER and
    // must reach the service digit-exact
    let json = `{"value":${BigInt(value)},"mask":${JSON.stringify(maskHex)}`;
    if (stakeholderId !== undefined) json += `,"stakeholder_id":${JSON.stringify(stakeholderId)}`;
    json += "}";
    const response = await this.request(
      `/v1/ceremonies/${encodeURIComponent(sessionId)}/reveals`,
      {
        method: "POST",
        headers: {
          "Content-Type": "application/json",
          Authorization: `Bearer ${token}`,
        },
        body: json,
      },
    );
    return (await response.json()) as StateSnapshot;
  }

  async abort(
    sessionId: string,
    token: string,
    reason: string,
    successorHint?: string,
  ): Promise<StateSnapshot> {
    const body: Record<string, string> = { reason };
    if (successorHint !== undefined) body["successor_hint"] = successorHint;
    return (await this.postJson(
      `/v1/ceremonies/${encodeURIComponent(sessionId)}/abort`,
      body,
      token,
    )) as StateSnapshot;
  }

  /** Raw transcript bytes plus the corruption warning header, if any. */
  async transcript(sessionId: string): Promise<{ data: Uint8Array; corruption: string | null }> {
    const response = await this.request(
      `/v1/ceremonies/${encodeURIComponent(sessionId)}/transcript`,
    );
    return {
      data: new Uint8Array(await response.arrayBuffer()),
      corruption: response.headers.get("X-Fairdraw-Corruption"),
    };
  }

  /**
   * Follow the server-sent event stream from a given seq. Yields parsed
   * records; returns when the server closes the stream (terminal phase)
   * or the signal aborts.
   */
  async *events(
    sessionId: string,
    fromSeq = 0,
    signal?: AbortSignal,
  ): AsyncGenerator<TranscriptRecord> {
    const response = await this.request(
      `/v1/ceremonies/${encodeURIComponent(sessionId)}/events?from_seq=${fromSeq}`,
      signal === undefined ? undefined : { signal },
    );
    if (response.body === null) return;
    const reader = response.body.getReader();
    const decoder = new TextDecoder();
    let buffer = "";
    try {
      for (;;) {
        const { done, value } = await reader.read();
        if (done) break;
        buffer += decoder.decode(value, { stream: true });
        // SSE messages are separated by a blank line
        for (;;) {
          const gap = buffer.indexOf("\n\n");
          if (gap < 0) break;
          const message = buffer.slice(0, gap);
          buffer = buffer.slice(gap + 2);
          for (const line of message.split("\n")) {
            if (line.startsWith("data:")) {
              yield parseRecordLine(line.slice(5).trimStart());
            }
            // lines starting with ":" are keepalive comments
          }
        }
      }
    } finally {
      reader.releaseLock();
    }
  }
}
