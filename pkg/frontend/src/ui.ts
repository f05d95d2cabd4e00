// DOM layer. Renders exclusively from the store (server events + latest
// state snapshot); every user affordance maps 1:1 onto a controller action.

import { ApiClient } from "./api.js";
import { SessionController } from "./controller.js";
import { chatModel, gridModel, repairableCubes, shelfModel } from "./render.js";
import type { StateView } from "./types.js";

const BUILTIN_SCENARIOS = ["both_random_order", "incorrect_item", "out_of_range", "clean"];
const DEFAULT_SERVER = "http://127.0.0.1:8765";

export class App {
  private controller: SessionController | null = null;
  private showBadges = true;
  private dragCubeId: number | null = null;

  constructor(private root: HTMLElement) {
    this.renderSetup();
  }

  private el<K extends keyof HTMLElementTagNameMap>(
    tag: K, className?: string, text?: string,
  ): HTMLElementTagNameMap[K] {
    const node = document.createElement(tag);
    if (className) node.className = className;
    if (text !== undefined) node.textContent = text;
    return node;
  }

  // --- setup view ------------------------------------------------------------

  private renderSetup(): void {
    this.root.replaceChildren();
    const card = this.el("div", "card setup");
    card.append(this.el("h2", "", "New session"));

    const server = this.el("input");
    server.value = localStorage.getItem("robodialog.server") ?? DEFAULT_SERVER;
    const variant = this.el("select");
    for (const v of ["AD1", "AD2"]) {
      variant.append(new Option(v, v));
    }
    variant.value = "AD2";
    const scenario = this.el("select");
    for (const s of BUILTIN_SCENARIOS) {
      scenario.append(new Option(s, s));
    }
    const seed = this.el("input");
    seed.type = "text";
    seed.value = "7";
    const seedError = this.el("div", "field-error");
    const badges = this.el("input");
    badges.type = "checkbox";
    badges.checked = true;
    const start = this.el("button", "primary", "Start session");
    const startError = this.el("div", "field-error");

    start.onclick = async () => {
      const seedValue = seed.value.trim();
      if (!/^\d+$/.test(seedValue)) {
        seedError.textContent = "seed must be a non-negative integer";
        return; // client-side validation; no request sent
      }
      seedError.textContent = "";
      startError.textContent = "";
      start.disabled = true;
      try {
        localStorage.setItem("robodialog.server", server.value);
        this.showBadges = badges.checked;
        const controller = new SessionController(new ApiClient(server.value));
        controller.onChange = () => this.renderSession();
        await controller.create(variant.value, scenario.value, Number(seedValue));
        this.controller = controller;
        this.renderSession();
      } catch (err) {
        startError.textContent = String(err);
        start.disabled = false;
      }
    };

    const row = (label: string, input: HTMLElement) => {
      const div = this.el("div", "row");
      div.append(this.el("label", "", label), input);
      return div;
    };
    card.append(
      row("server", server),
      row("dialog variant", variant),
      row("scenario", scenario),
      row("seed", seed),
      seedError,
      row("show level badges", badges),
      start,
      startError,
    );
    this.root.append(card);
  }

  // --- session view ----------------------------------------------------------

  private renderSession(): void {
    const controller = this.controller;
    if (!controller) return;
    const state = controller.store.state;
    this.root.replaceChildren();

    const layout = this.el("div", "layout");
    layout.append(this.renderChatPane(controller, state),
                  this.renderWorldPane(controller, state));
    this.root.append(layout);
  }

  private renderChatPane(controller: SessionController, state: StateView | null): HTMLElement {
    const pane = this.el("div", "card chat-pane");
    const status = state?.status ?? "Running";
    const head = this.el("div", "head");
    head.append(
      this.el("span", "", `session ${controller.store.sessionId ?? ""}`),
      this.el("span", `status status-${status.toLowerCase()}`, status),
    );
    pane.append(head);

    const chat = this.el("div", "chat");
    for (const bubble of chatModel(controller.store.events)) {
      const div = this.el("div", `bubble ${bubble.who}${bubble.fallback ? " fallback" : ""}`);
      div.append(this.el("span", "text", bubble.text));
      if (bubble.badge && this.showBadges) {
        div.append(this.el("span", `badge badge-${bubble.badge.toLowerCase()}`, bubble.badge));
      }
      chat.append(div);
    }
    pane.append(chat);
    queueMicrotask(() => {
      chat.scrollTop = chat.scrollHeight;
    });

    const input = this.el("input");
    input.placeholder = "ask the robot a question…";
    const send = this.el("button", "", "Send");
    const cont = this.el("button", "primary", "Continue");
    const down = this.el("button", "", "Download transcript");
    const running = status === "Running";
    const dialogOpen = state?.dialog != null;
    send.disabled = controller.busy || !running || !dialogOpen;
    input.disabled = send.disabled;
    cont.disabled = controller.busy || !running;

    const say = async () => {
      const text = input.value.trim();
      if (!text) return;
      input.value = "";
      await controller.say(text).catch((err) => this.toast(String(err)));
    };
    send.onclick = say;
    input.onkeydown = (ev) => {
      if (ev.key === "Enter") void say();
    };
    cont.onclick = () => controller.pressContinue().catch((err) => this.toast(String(err)));
    down.onclick = async () => {
      const text = await controller.transcriptText();
      const blob = new Blob([text], { type: "application/x-ndjson" });
      const a = this.el("a");
      a.href = URL.createObjectURL(blob);
      a.download = `${controller.store.sessionId}.jsonl`;
      a.click();
      URL.revokeObjectURL(a.href);
    };

    const controls = this.el("div", "controls");
    controls.append(input, send, cont, down);
    pane.append(controls);
    return pane;
  }

  private renderWorldPane(controller: SessionController, state: StateView | null): HTMLElement {
    const pane = this.el("div", "card world-pane");
    pane.append(this.el("h3", "", "table"));
    if (!state) {
      pane.append(this.el("div", "", "loading world…"));
      return pane;
    }
    const world = state.world;

    const grid = this.el("div", "grid");
    grid.style.gridTemplateColumns = `repeat(${world.table_extent[0]}, 34px)`;
    for (const row of gridModel(world)) {
      for (const cell of row) {
        const div = this.el("div", `cell${cell.inReach ? " reach" : ""}`);
        div.title = `(${cell.x}, ${cell.y})${cell.inReach ? " in reach" : ""}`;
        if (cell.cube) {
          const cube = this.el("div", `cube${cell.errored ? " errored" : ""}`,
                               String(cell.cube.id));
          cube.title = `cube ${cell.cube.id} QR ${cell.cube.qr}`;
          cube.draggable = true;
          const cubeId = cell.cube.id;
          cube.ondragstart = (ev) => {
            this.dragCubeId = cubeId;
            ev.dataTransfer?.setData("text/plain", String(cubeId));
          };
          cube.onclick = () => {
            this.dragCubeId = cubeId;
            this.toast(`cube ${cubeId} selected; click a free cell to move it`);
          };
          div.append(cube);
        } else {
          div.ondragover = (ev) => ev.preventDefault();
          const drop = () => {
            if (this.dragCubeId !== null) {
              const id = this.dragCubeId;
              this.dragCubeId = null;
              void controller.moveCube(id, cell.x, cell.y)
                .catch((err) => this.toast(String(err)));
            }
          };
          div.ondrop = (ev) => {
            ev.preventDefault();
            drop();
          };
          div.onclick = drop;
        }
        grid.append(div);
      }
    }
    pane.append(grid);
    pane.append(this.el("div", "hint",
      "shaded cells are inside the robot's square; drag (or click-select) a cube to move it"));

    const shelves = this.el("div", "shelves");
    for (const shelf of shelfModel(world)) {
      const div = this.el("div", "shelf");
      div.append(this.el("h4", "", shelf.name));
      for (const cube of shelf.cubes) {
        div.append(this.el("div", "cube sorted", `${cube.id}:${cube.qr}`));
      }
      shelves.append(div);
    }
    pane.append(shelves);

    pane.append(this.renderRepairControls(controller, state));
    pane.append(this.el("div", "phase",
      `robot: ${world.robot_phase.kind}` +
      (world.robot_phase.error ? ` (${world.robot_phase.error} on cube ${world.robot_phase.cube_id})` : "")));
    return pane;
  }

  private renderRepairControls(controller: SessionController, state: StateView): HTMLElement {
    const box = this.el("div", "repair");
    box.append(this.el("h4", "", "swap QR code"));
    const cubes = repairableCubes(state.world);
    const cubeSel = this.el("select");
    for (const cube of cubes) {
      cubeSel.append(new Option(`cube ${cube.id} (QR ${cube.qr})`, String(cube.id)));
    }
    if (state.dialog) {
      cubeSel.value = String(state.dialog.cube_id);
    }
    const qrSel = this.el("select");
    for (const qr of Object.keys(state.world.qr_database).sort()) {
      qrSel.append(new Option(qr, qr));
    }
    qrSel.append(new Option("other…", "__other__"));
    const qrFree = this.el("input");
    qrFree.placeholder = "custom QR";
    qrFree.style.display = "none";
    qrSel.onchange = () => {
      qrFree.style.display = qrSel.value === "__other__" ? "" : "none";
    };
    const swap = this.el("button", "", "Swap");
    swap.disabled = controller.busy || cubes.length === 0 || state.status !== "Running";
    swap.onclick = () => {
      const qr = qrSel.value === "__other__" ? qrFree.value : qrSel.value;
      void controller.swapCube(Number(cubeSel.value), qr)
        .catch((err) => this.toast(String(err)));
    };
    box.append(cubeSel, qrSel, qrFree, swap);
    return box;
  }

  private toast(message: string): void {
    const note = this.el("div", "toast", message);
    this.root.append(note);
    setTimeout(() => note.remove(), 2500);
  }
}
