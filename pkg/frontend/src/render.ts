// Pure view models: the chat pane and the world grid are functions of the
// event log and the latest world snapshot, nothing else.

import type { ApiEvent, CubeView, WorldView } from "./types.js";

export interface ChatBubble {
  seq: number;
  who: "robot" | "user" | "system";
  text: string;
  /** Explanation-level badge; only set on robot explanations. */
  badge: string | null;
  /** True for the apology to unparseable utterances, styled distinctly. */
  fallback: boolean;
}

export function chatModel(events: ApiEvent[]): ChatBubble[] {
  const bubbles: ChatBubble[] = [];
  for (const event of events) {
    switch (event.kind) {
      case "RobotUtterance":
        bubbles.push({
          seq: event.seq,
          who: "robot",
          text: String(event.payload.text),
          badge: String(event.payload.level),
          fallback: false,
        });
        break;
      case "Fallback":
        bubbles.push({
          seq: event.seq,
          who: "robot",
          text: String(event.payload.text),
          badge: null,
          fallback: true,
        });
        break;
      case "UserUtterance":
        bubbles.push({
          seq: event.seq,
          who: "user",
          text: String(event.payload.text),
          badge: null,
          fallback: false,
        });
        break;
      case "ErrorRaised":
        bubbles.push(note(event, `error ${event.payload.error} on cube ${event.payload.cube_id}`));
        break;
      case "Continue":
        bubbles.push(note(event, "continue"));
        break;
      case "Repair":
        bubbles.push(note(event, describeRepair(event.payload.action)));
        break;
      case "Sorted":
        bubbles.push(note(event, `cube ${event.payload.cube_id} sorted onto ${event.payload.shelf}`));
        break;
      case "SessionResolved":
        bubbles.push(note(event, "all cubes sorted; session resolved"));
        break;
      case "IntentClassified":
        break; // internal bookkeeping; not a chat line
    }
  }
  return bubbles;
}

function note(event: ApiEvent, text: string): ChatBubble {
  return { seq: event.seq, who: "system", text, badge: null, fallback: false };
}

export function describeRepair(action: any): string {
  if (action?.type === "swap") {
    return `swapped cube ${action.cube_id} to QR ${action.new_qr}`;
  }
  if (action?.type === "move") {
    return `moved cube ${action.cube_id} to (${action.position[0]}, ${action.position[1]})`;
  }
  return "repair";
}

export interface GridCell {
  x: number;
  y: number;
  inReach: boolean;
  cube: CubeView | null;
  /** The cube the robot is currently erroring on. */
  errored: boolean;
}

export function gridModel(world: WorldView): GridCell[][] {
  const [width, height] = world.table_extent;
  const [rx0, ry0, rx1, ry1] = world.reach_region;
  const byPosition = new Map<string, CubeView>();
  for (const cube of world.cubes) {
    if (cube.position) {
      byPosition.set(`${cube.position[0]},${cube.position[1]}`, cube);
    }
  }
  const erroredCube =
    world.robot_phase.kind === "Errored" ? world.robot_phase.cube_id : null;
  const rows: GridCell[][] = [];
  for (let y = 0; y < height; y++) {
    const row: GridCell[] = [];
    for (let x = 0; x < width; x++) {
      const cube = byPosition.get(`${x},${y}`) ?? null;
      row.push({
        x,
        y,
        inReach: x >= rx0 && x <= rx1 && y >= ry0 && y <= ry1,
        cube,
        errored: cube !== null && cube.id === erroredCube,
      });
    }
    rows.push(row);
  }
  return rows;
}

export interface ShelfView {
  name: string;
  cubes: CubeView[];
}

export function shelfModel(world: WorldView): ShelfView[] {
  return Object.entries(world.shelves).map(([name, ids]) => ({
    name,
    cubes: ids
      .map((id) => world.cubes.find((c) => c.id === id))
      .filter((c): c is CubeView => c !== undefined),
  }));
}

/** Unsorted cubes, for the repair controls' cube picker. */
export function repairableCubes(world: WorldView): CubeView[] {
  return world.cubes.filter((c) => !c.sorted);
}
