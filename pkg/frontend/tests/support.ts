/** Shared test doubles: an in-memory Storage and a scriptable fake service. */

export class FakeStorage implements Storage {
  private items = new Map<string, string>();

  get length(): number {
    return this.items.size;
  }
  clear(): void {
    this.items.clear();
  }
  getItem(k: string): string | null {
    return this.items.get(k) ?? null;
  }
  key(index: number): string | null {
    return [...this.items.keys()][index] ?? null;
  }
  removeItem(k: string): void {
    this.items.delete(k);
  }
  setItem(k: string, v: string): void {
    this.items.set(k, v);
  }
}

/**
 * Transcript line with placeholder hashes. Good enough for stream and
 * view-model plumbing, which parse strictly but do not verify hashes;
 * the verifier tests use real hash-chained fixtures instead.
 */
export function unverifiedLine(seq: number, event: Record<string, unknown>): string {
  return JSON.stringify({
    seq,
    prev_hash: "0".repeat(64),
    event,
    record_hash: "1".repeat(64),
  });
}

export function sseText(lines: string[]): string {
  const frames = lines.map((line, i) => `id: ${i}\ndata: ${line}\n\n`);
  // keepalive comments must be transparent to the client
  frames.splice(1, 0, ": keepalive\n\n");
  return frames.join("");
}

export interface LoggedRequest {
  method: string;
  url: string;
  body: string | null;
}

/**
 * Minimal scriptable stand-in for the coordination service, plugged in
 * through ApiClient's fetch seam. Records every request so tests can
 * assert what did (and did not) go over the wire.
 */
export class FakeService {
  requests: LoggedRequest[] = [];
  onRequest: ((req: LoggedRequest) => void) | null = null;

  phase = "commit";
  sse = "";
  transcript = new Uint8Array(0);
  corruption: string | null = null;
  transcriptNetworkDown = false;
  commitResponse: { status: number; error?: string; detail?: string } = { status: 200 };
  revealResponse: { status: number; error?: string; detail?: string } = { status: 200 };
  created = {
    session_id: "panel",
    tokens: { a: "tok-a", b: "tok-b" } as Record<string, string>,
    state: { phase: "commit" },
  };

  fetchImpl: typeof fetch = async (input, init) => {
    const url = String(input);
    const req: LoggedRequest = {
      method: init?.method ?? "GET",
      url,
      body: typeof init?.body === "string" ? init.body : null,
    };
    this.requests.push(req);
    this.onRequest?.(req);
    return this.route(req);
  };

  private route(req: LoggedRequest): Response {
    const path = new URL(req.url).pathname;
    if (req.method === "POST" && path === "/v1/ceremonies") {
      return json(201, this.created);
    }
    if (path.endsWith("/events")) {
      return new Response(this.sse, {
        status: 200,
        headers: { "Content-Type": "text/event-stream" },
      });
    }
    if (path.endsWith("/transcript")) {
      if (this.transcriptNetworkDown) throw new TypeError("network down");
      const headers: Record<string, string> = {};
      if (this.corruption !== null) headers["X-Fairdraw-Corruption"] = this.corruption;
      return new Response(this.transcript.slice(), { status: 200, headers });
    }
    if (path.endsWith("/commitments")) {
      return this.outcome(this.commitResponse);
    }
    if (path.endsWith("/reveals")) {
      return this.outcome(this.revealResponse);
    }
    if (req.method === "GET") {
      return json(200, { session_id: path.split("/").pop(), phase: this.phase });
    }
    return json(404, { error: "unknown_session", detail: `no route for ${path}` });
  }

  private outcome(scripted: { status: number; error?: string; detail?: string }): Response {
    if (scripted.status === 200) return json(200, { phase: this.phase });
    return json(scripted.status, {
      error: scripted.error ?? "conflict",
      detail: scripted.detail ?? "scripted failure",
    });
  }
}

function json(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}
