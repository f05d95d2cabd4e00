// Wire types mirroring the session service's JSON bodies.

export type Actor = "Robot" | "User" | "System";

export type EventKind =
  | "ErrorRaised"
  | "RobotUtterance"
  | "UserUtterance"
  | "IntentClassified"
  | "Continue"
  | "Repair"
  | "Sorted"
  | "SessionResolved"
  | "Fallback";

export interface ApiEvent {
  session_id: string;
  seq: number;
  turn: number;
  actor: Actor;
  kind: EventKind;
  payload: Record<string, any>;
}

export interface SessionHandle {
  session_id: string;
  created_at: string;
  variant: string;
  scenario: unknown;
  seed: number;
}

export interface CubeView {
  id: number;
  qr: string;
  position: [number, number] | null;
  shelf: string | null;
  sorted: boolean;
}

export interface WorldView {
  table_extent: [number, number];
  reach_region: [number, number, number, number];
  shelves: Record<string, number[]>;
  qr_database: Record<string, string>;
  cubes: CubeView[];
  robot_phase: { kind: string; cube_id: number | null; error: string | null };
  rng_seed: number;
}

export interface DialogView {
  error: string;
  cube_id: number;
  current_level: string;
}

export type SessionStatus = "Running" | "Resolved" | "Abandoned";

export interface StateView {
  world: WorldView;
  dialog: DialogView | null;
  status: SessionStatus;
  session_id: string;
  variant: string;
  seq: number;
}

export type RepairWire =
  | { type: "swap"; cube_id: number; new_qr: string }
  | { type: "move"; cube_id: number; position: [number, number] };
