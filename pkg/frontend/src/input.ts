/**
 * Keyboard state to per-tick action mapping.
 *
 * The client samples held keys when each tick update arrives (latest-wins on
 * the server), rather than sending keydown events. Opposing keys cancel.
 */

import { Action } from "./protocol.js";

export type KeySet = ReadonlySet<string>;

function axis(keys: KeySet, positive: string[], negative: string[]): -1 | 0 | 1 {
  const pos = positive.some((k) => keys.has(k));
  const neg = negative.some((k) => keys.has(k));
  if (pos === neg) return 0;
  return pos ? 1 : -1;
}

export function actionFromKeys(keys: KeySet): Action {
  return {
    move: axis(keys, ["KeyW"], ["KeyS"]),
    strafe: axis(keys, ["KeyD"], ["KeyA"]),
    // ArrowLeft turns counter-clockwise, which is +turn in world convention.
    turn: axis(keys, ["ArrowLeft"], ["ArrowRight"]),
    attack: keys.has("Space"),
  };
}

/** Tracks currently held keys from DOM events; pure container otherwise. */
export class KeyTracker {
  private held = new Set<string>();

  down(code: string): void {
    this.held.add(code);
  }

  up(code: string): void {
    this.held.delete(code);
  }

  clear(): void {
    this.held.clear();
  }

  snapshot(): KeySet {
    return this.held;
  }
}
