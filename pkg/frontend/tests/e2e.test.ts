// Full UI-driven session against the real session service: ask what, ask
// why, drag the cube into the square (the drop handler's underlying action),
// press continue — then the downloaded transcript must replay byte-exact
// through the CLI verifier. Exercises the same controller/store/render code
// the DOM layer runs on, minus the DOM.

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { SessionController } from "../src/controller.js";
import { chatModel } from "../src/render.js";
import { SessionStore } from "../src/store.js";

const repoRoot = fileURLToPath(new URL("../..", import.meta.url));
const PYTHON = process.env.PYTHON ?? "python3";

let server: ChildProcess;
let baseUrl: string;

async function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = createServer();
    probe.listen(0, "127.0.0.1", () => {
      const address = probe.address();
      if (address === null || typeof address === "string") {
        reject(new Error("no port"));
        return;
      }
      probe.close(() => resolve(address.port));
    });
  });
}

beforeAll(async () => {
  const port = await freePort();
  baseUrl = `http://127.0.0.1:${port}`;
  server = spawn(PYTHON, ["-m", "robodialog.cli", "serve", "--addr", `127.0.0.1:${port}`], {
    cwd: repoRoot,
    stdio: "ignore",
  });
  const deadline = Date.now() + 30_000;
  for (;;) {
    try {
      const res = await fetch(`${baseUrl}/openapi.json`);
      if (res.ok) break;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) throw new Error("session service did not start");
    await new Promise((r) => setTimeout(r, 100));
  }
}, 40_000);

afterAll(() => {
  server?.kill();
});

describe("UI-driven out-of-range AD2 session", () => {
  it("resolves via what/why/drag/continue and its transcript replays", async () => {
    const controller = new SessionController(new ApiClient(baseUrl));
    try {
      await controller.create("AD2", "out_of_range", 7);

      let bubbles = chatModel(controller.store.events);
      expect(bubbles.at(-1)).toMatchObject({ who: "robot", text: "Error occurred", badge: "Low" });
      expect(controller.store.state?.dialog).toMatchObject({ error: "OutOfRange", cube_id: 1 });

      await controller.say("what is the error");
      await controller.say("why are you not able to reach the cube");
      bubbles = chatModel(controller.store.events);
      const badges = bubbles.filter((b) => b.badge !== null).map((b) => b.badge);
      expect(badges).toEqual(["Low", "Medium1", "High"]);
      expect(bubbles.at(-1)?.text).toBe(
        "Error I'm unable to reach the item on the table because it is outside " +
        "my camera vision. Please move it inside the square",
      );

      // Drag the errored cube into the reach square, then continue.
      await controller.moveCube(1, 2, 2);
      await controller.pressContinue();

      expect(controller.store.state?.status).toBe("Resolved");
      const kinds = controller.store.events.map((e) => e.kind);
      expect(kinds.at(-1)).toBe("SessionResolved");
      expect(kinds).toContain("Sorted");

      // Downloaded transcript passes the CLI replay verifier.
      const text = await controller.transcriptText();
      const dir = mkdtempSync(join(tmpdir(), "robodialog-ui-"));
      const path = join(dir, "session.jsonl");
      writeFileSync(path, text, "utf-8");
      const replay = spawnSync(
        PYTHON, ["-m", "robodialog.cli", "replay", "--transcript", path],
        { cwd: repoRoot, encoding: "utf-8" },
      );
      expect(replay.stdout + replay.stderr).toContain("replay OK");
      expect(replay.status).toBe(0);
    } finally {
      controller.stop();
    }
  }, 30_000);

  it("renders the same view after reconnect-and-resume from any sequence number", async () => {
    const client = new ApiClient(baseUrl);
    const controller = new SessionController(client);
    try {
      await controller.create("AD2", "out_of_range", 11);
      await controller.say("what is the error");
      await controller.say("this makes no sense to a robot");

      const resumePoint = 3;
      const resumed = new SessionStore();
      resumed.reset(controller.sessionId);
      const head = await client.events(controller.sessionId, 0);
      resumed.ingest(head.events.filter((e) => e.seq <= resumePoint));
      const tail = await client.events(controller.sessionId, resumePoint);
      resumed.ingest(tail.events);

      expect(chatModel(resumed.events)).toEqual(chatModel(controller.store.events));
    } finally {
      controller.stop();
    }
  }, 30_000);

  it("a clean scenario goes straight to Resolved", async () => {
    const controller = new SessionController(new ApiClient(baseUrl));
    try {
      await controller.create("AD1", "clean", 1);
      expect(controller.store.state?.status).toBe("Resolved");
      const bubbles = chatModel(controller.store.events);
      expect(bubbles.at(-1)?.text).toBe("all cubes sorted; session resolved");
    } finally {
      controller.stop();
    }
  }, 30_000);

  it("client-side actions cannot change server policy: state is replayable server-side", async () => {
    // The same action sequence issued by any client yields the same
    // transcript; the UI holds no transition logic of its own.
    const a = new SessionController(new ApiClient(baseUrl));
    const b = new SessionController(new ApiClient(baseUrl));
    try {
      for (const controller of [a, b]) {
        await controller.create("AD1", "incorrect_item", 3);
        await controller.say("what is the error");
        await controller.swapCube(1, "A1");
        await controller.pressContinue();
      }
      const strip = (events: typeof a.store.events) =>
        events.map(({ turn, actor, kind, payload }) => ({ turn, actor, kind, payload }));
      expect(strip(a.store.events)).toEqual(strip(b.store.events));
      expect(a.store.state?.status).toBe("Resolved");
      expect(b.store.state?.status).toBe("Resolved");
    } finally {
      a.stop();
      b.stop();
    }
  }, 30_000);
});
