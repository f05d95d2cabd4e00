// Event-sourced session state: an ordered, gap-checked event log plus the
// latest world snapshot. The store holds no dialog logic; everything it knows
// came from server events and the state endpoint.

import type { ApiEvent, StateView } from "./types.js";

export class SessionStore {
  sessionId: string | null = null;
  events: ApiEvent[] = [];
  state: StateView | null = null;

  get lastSeq(): number {
    return this.events.length ? this.events[this.events.length - 1].seq : 0;
  }

  get status(): string {
    return this.state?.status ?? "Running";
  }

  reset(sessionId: string): void {
    this.sessionId = sessionId;
    this.events = [];
    this.state = null;
  }

  /**
   * Append a batch in seq order. Duplicates (already-seen seqs) are dropped;
   * returns false if a gap was detected, in which case the caller must
   * resync from lastSeq.
   */
  ingest(batch: ApiEvent[]): boolean {
    for (const event of batch) {
      if (event.seq <= this.lastSeq) {
        continue;
      }
      if (event.seq !== this.lastSeq + 1) {
        return false;
      }
      this.events.push(event);
    }
    return true;
  }

  setState(state: StateView): void {
    this.state = state;
  }
}
