// Thin fetch client for the session service, plus the event feed.
//
// The feed prefers the server-push stream (EventSource) and falls back to
// polling the JSON events endpoint where EventSource is unavailable (tests,
// old runtimes). Either way the consumer sees ordered batches of ApiEvents
// and can resume from any sequence number.

import type { ApiEvent, RepairWire, SessionHandle, StateView } from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public detail?: string,
  ) {
    super(message);
  }
}

export interface EventBatch {
  events: ApiEvent[];
  status: string;
}

export interface CreateSessionRequest {
  variant: string;
  scenario: string | object;
  seed: number;
  table?: object[] | null;
  templates?: object | null;
  rules?: object | null;
}

export class ApiClient {
  constructor(public baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const res = await fetch(this.baseUrl + path, {
      method,
      headers: body !== undefined ? { "content-type": "application/json" } : undefined,
      body: body !== undefined ? JSON.stringify(body) : undefined,
    });
    if (!res.ok) {
      let info: any = {};
      try {
        info = await res.json();
      } catch {
        // non-JSON error body; fall through to the generic message
      }
      throw new ApiError(
        res.status,
        info.code ?? "http_error",
        info.message ?? `${res.status} ${res.statusText}`,
        info.detail,
      );
    }
    return (await res.json()) as T;
  }

  createSession(req: CreateSessionRequest): Promise<SessionHandle> {
    return this.request("POST", "/sessions", req);
  }

  advance(sessionId: string): Promise<{ events: ApiEvent[] }> {
    return this.request("POST", `/sessions/${sessionId}/advance`);
  }

  utter(sessionId: string, text: string): Promise<{ events: ApiEvent[] }> {
    return this.request("POST", `/sessions/${sessionId}/utterance`, { text });
  }

  continueSession(sessionId: string): Promise<{ events: ApiEvent[] }> {
    return this.request("POST", `/sessions/${sessionId}/continue`);
  }

  repair(sessionId: string, action: RepairWire): Promise<{ events: ApiEvent[] }> {
    return this.request("POST", `/sessions/${sessionId}/repair`, { action });
  }

  state(sessionId: string): Promise<StateView> {
    return this.request("GET", `/sessions/${sessionId}/state`);
  }

  events(sessionId: string, since = 0): Promise<EventBatch> {
    return this.request("GET", `/sessions/${sessionId}/events?since=${since}`);
  }

  async transcript(sessionId: string): Promise<string> {
    const res = await fetch(`${this.baseUrl}/sessions/${sessionId}/transcript`);
    if (!res.ok) {
      throw new ApiError(res.status, "http_error", res.statusText);
    }
    return res.text();
  }

  streamUrl(sessionId: string, since = 0): string {
    return `${this.baseUrl}/sessions/${sessionId}/stream?since=${since}`;
  }
}

export interface FeedHandle {
  stop(): void;
}

export type FeedListener = (events: ApiEvent[], status: string | null) => void;

const POLL_INTERVAL_MS = 150;

export function subscribeEvents(
  client: ApiClient,
  sessionId: string,
  since: number,
  onBatch: FeedListener,
): FeedHandle {
  if (typeof EventSource !== "undefined") {
    const source = new EventSource(client.streamUrl(sessionId, since));
    source.onmessage = (msg) => {
      onBatch([JSON.parse(msg.data) as ApiEvent], null);
    };
    source.addEventListener("end", (msg) => {
      const payload = JSON.parse((msg as MessageEvent).data) as { status: string };
      onBatch([], payload.status);
      source.close();
    });
    return { stop: () => source.close() };
  }

  // Polling fallback: same contract, resumes from the last seen seq.
  let cursor = since;
  let stopped = false;
  const tick = async () => {
    if (stopped) return;
    try {
      const batch = await client.events(sessionId, cursor);
      for (const event of batch.events) {
        cursor = Math.max(cursor, event.seq);
      }
      onBatch(batch.events, batch.status);
      if (batch.status !== "Running") {
        return;
      }
    } catch {
      // transient; retry on the next tick
    }
    if (!stopped) {
      setTimeout(tick, POLL_INTERVAL_MS);
    }
  };
  void tick();
  return {
    stop: () => {
      stopped = true;
    },
  };
}
