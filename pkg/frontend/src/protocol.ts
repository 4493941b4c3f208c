/**
 * Wire protocol types and the client session state machine.
 *
 * The session is transport-agnostic: it consumes message strings and emits
 * action documents through an injected sender, which keeps the whole state
 * machine testable without a socket. Invariants enforced here: at most one
 * action message per server tick, and ticks never render backwards.
 */

export const PROTOCOL_VERSION = "multigen/1";

export interface Action {
  move: -1 | 0 | 1;
  strafe: -1 | 0 | 1;
  turn: -1 | 0 | 1;
  attack: boolean;
}

export const NOOP_ACTION: Action = { move: 0, strafe: 0, turn: 0, attack: false };

export interface MapDocument {
  version: string;
  name: string;
  vertices: [number, number][];
  edges: [number, number][];
  spawns: { x: number; y: number; theta: number }[];
}

export interface MotionDocument {
  move_speed: number;
  strafe_speed: number;
  turn_rate: number;
  collision_radius: number;
  attack_range: number;
  attack_half_angle: number;
  respawn_delay: number;
}

export interface ViewDocument {
  fov: number;
  columns: number;
  max_range: number;
  width: number;
  height: number;
}

export interface SpriteDocument {
  player_id: string;
  screen_column: number;
  distance: number;
  scale: number;
}

export interface JoinedMessage {
  v: string;
  type: "joined";
  player_id: string;
  tick_rate: number;
  tick: number;
  motion: MotionDocument;
  view: ViewDocument;
  map: MapDocument;
}

export interface TickMessage {
  v: string;
  type: "tick";
  tick: number;
  snapshot_hash: string;
  pose: { x: number; y: number; theta: number };
  status: "active" | "dead";
  respawn_tick: number | null;
  disparity: number[];
  sprites: SpriteDocument[];
  events: Record<string, unknown>[];
}

export interface ErrorMessage {
  v: string;
  type: "error";
  code: string;
  detail: string;
}

export type ServerMessage = JoinedMessage | TickMessage | ErrorMessage | { type: "bye" };

export type Banner =
  | { kind: "none" }
  | { kind: "connecting" }
  | { kind: "full" }
  | { kind: "version" }
  | { kind: "error"; detail: string }
  | { kind: "closed"; detail: string };

export interface SessionHooks {
  onJoined?(msg: JoinedMessage): void;
  onTick?(msg: TickMessage): void;
  onBanner?(banner: Banner): void;
  onEvent?(event: Record<string, unknown>, tick: number): void;
}

export class ClientSession {
  playerId: string | null = null;
  joined: JoinedMessage | null = null;
  latestTick: TickMessage | null = null;
  banner: Banner = { kind: "connecting" };
  actionsSent = 0;
  closed = false;

  private lastRenderedTick = -1;

  constructor(
    private readonly send: (doc: Record<string, unknown>) => void,
    private readonly actionSource: () => Action,
    private readonly hooks: SessionHooks = {},
  ) {}

  join(name: string): void {
    this.send({ v: PROTOCOL_VERSION, type: "join", name });
  }

  private setBanner(banner: Banner): void {
    this.banner = banner;
    this.hooks.onBanner?.(banner);
  }

  /** Feed one raw message from the server. */
  handleMessage(text: string): void {
    if (this.closed) return;
    let doc: ServerMessage;
    try {
      doc = JSON.parse(text) as ServerMessage;
    } catch (err) {
      this.closed = true;
      this.setBanner({ kind: "closed", detail: `malformed server message: ${err}` });
      return;
    }
    switch (doc.type) {
      case "joined":
        this.joined = doc;
        this.playerId = doc.player_id;
        this.setBanner({ kind: "none" });
        this.hooks.onJoined?.(doc);
        break;
      case "tick": {
        if (doc.tick < this.lastRenderedTick) {
          return; // stale: never render into the past
        }
        this.lastRenderedTick = doc.tick;
        this.latestTick = doc;
        for (const event of doc.events) {
          this.hooks.onEvent?.(event, doc.tick);
        }
        this.hooks.onTick?.(doc);
        // Exactly one action per received tick, from current input state.
        this.send({ v: PROTOCOL_VERSION, type: "action", tick: doc.tick, ...this.actionSource() });
        this.actionsSent += 1;
        break;
      }
      case "error": {
        const err = doc as ErrorMessage;
        if (err.code === "full") this.setBanner({ kind: "full" });
        else if (err.code === "version") this.setBanner({ kind: "version" });
        else this.setBanner({ kind: "error", detail: err.detail });
        break;
      }
      case "bye":
        this.closed = true;
        this.setBanner({ kind: "closed", detail: "server said goodbye" });
        break;
      default:
        this.closed = true;
        this.setBanner({ kind: "closed", detail: "unknown message type" });
    }
  }

  handleDisconnect(): void {
    if (!this.closed) {
      this.closed = true;
      this.setBanner({ kind: "closed", detail: "connection lost" });
    }
  }
}
