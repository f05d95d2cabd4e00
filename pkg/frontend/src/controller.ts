// Session controller: the glue between the API client, the event feed, and
// the store. The DOM layer calls these methods and re-renders on change; the
// e2e tests drive the same methods directly. Actions are fire-and-confirm:
// one request in flight at a time, events ingested from the response and
// deduplicated against the feed.

import { ApiClient, FeedHandle, subscribeEvents } from "./api.js";
import { SessionStore } from "./store.js";
import type { ApiEvent, RepairWire } from "./types.js";

export class SessionController {
  readonly store = new SessionStore();
  busy = false;
  onChange: () => void = () => {};
  private feed: FeedHandle | null = null;

  constructor(readonly client: ApiClient) {}

  get sessionId(): string {
    if (!this.store.sessionId) {
      throw new Error("no session open");
    }
    return this.store.sessionId;
  }

  /** Create a session, start the robot, and subscribe to the event feed. */
  async create(variant: string, scenario: string | object, seed: number): Promise<void> {
    this.stop();
    const handle = await this.client.createSession({ variant, scenario, seed });
    this.store.reset(handle.session_id);
    await this.act(() => this.client.advance(handle.session_id));
    this.feed = subscribeEvents(this.client, handle.session_id, this.store.lastSeq,
      (events, status) => {
        if (!this.store.ingest(events)) {
          void this.resync();
        }
        if (status !== null && status !== "Running") {
          void this.refreshState();
        }
        this.onChange();
      });
  }

  stop(): void {
    this.feed?.stop();
    this.feed = null;
  }

  say(text: string): Promise<void> {
    return this.act(() => this.client.utter(this.sessionId, text));
  }

  pressContinue(): Promise<void> {
    return this.act(() => this.client.continueSession(this.sessionId));
  }

  swapCube(cubeId: number, newQr: string): Promise<void> {
    const action: RepairWire = { type: "swap", cube_id: cubeId, new_qr: newQr };
    return this.act(() => this.client.repair(this.sessionId, action));
  }

  /** The underlying action of dragging a cube onto a grid cell. */
  moveCube(cubeId: number, x: number, y: number): Promise<void> {
    const action: RepairWire = { type: "move", cube_id: cubeId, position: [x, y] };
    return this.act(() => this.client.repair(this.sessionId, action));
  }

  transcriptText(): Promise<string> {
    return this.client.transcript(this.sessionId);
  }

  async refreshState(): Promise<void> {
    this.store.setState(await this.client.state(this.sessionId));
    this.onChange();
  }

  async resync(): Promise<void> {
    const batch = await this.client.events(this.sessionId, this.store.lastSeq);
    this.store.ingest(batch.events);
    this.onChange();
  }

  private async act(request: () => Promise<{ events: ApiEvent[] }>): Promise<void> {
    if (this.busy) {
      throw new Error("another action is in flight");
    }
    this.busy = true;
    this.onChange();
    try {
      const { events } = await request();
      if (!this.store.ingest(events)) {
        await this.resync();
      }
      await this.refreshState();
    } finally {
      this.busy = false;
      this.onChange();
    }
  }
}
