/**
 * Top-down minimap: walls, own pose arrow, last-known opponent sightings.
 */

import { MapDocument, TickMessage } from "./protocol.js";
import { PixelBuffer, paletteColor } from "./renderer.js";

const BG: [number, number, number] = [18, 18, 22];
const WALL: [number, number, number] = [210, 210, 210];
const MARGIN = 1.0;

export interface Sighting {
  playerId: string;
  x: number;
  y: number;
  tick: number;
}

export class Minimap {
  readonly scale: number;
  readonly width: number;
  readonly height: number;
  private readonly minX: number;
  private readonly maxY: number;

  constructor(
    readonly map: MapDocument,
    scale = 6.0,
  ) {
    const xs = map.vertices.map((v) => v[0]);
    const ys = map.vertices.map((v) => v[1]);
    this.minX = Math.min(...xs, 0) - MARGIN;
    const maxX = Math.max(...xs, 0) + MARGIN;
    this.maxY = Math.max(...ys, 0) + MARGIN;
    const minY = Math.min(...ys, 0) - MARGIN;
    this.scale = scale;
    this.width = Math.max(1, Math.ceil((maxX - this.minX) * scale));
    this.height = Math.max(1, Math.ceil((this.maxY - minY) * scale));
  }

  toPixel(x: number, y: number): [number, number] {
    return [Math.floor((x - this.minX) * this.scale), Math.floor((this.maxY - y) * this.scale)];
  }

  render(ownId: string | null, tick: TickMessage | null, sightings: Sighting[] = []): PixelBuffer {
    const buffer = new PixelBuffer(this.width, this.height);
    for (let y = 0; y < this.height; y++) {
      for (let x = 0; x < this.width; x++) buffer.set(x, y, BG);
    }
    for (const [u, w] of this.map.edges) {
      const [ax, ay] = this.map.vertices[u];
      const [bx, by] = this.map.vertices[w];
      const length = Math.hypot(bx - ax, by - ay);
      const steps = Math.max(1, Math.ceil(length * this.scale * 4));
      for (let s = 0; s < steps; s++) {
        const t = s / steps;
        const [px, py] = this.toPixel(ax + t * (bx - ax), ay + t * (by - ay));
        if (px >= 0 && px < this.width && py >= 0 && py < this.height) {
          buffer.set(px, py, WALL);
        }
      }
    }
    for (const sighting of sightings) {
      this.drawArrowhead(buffer, sighting.x, sighting.y, 0, paletteColor(sighting.playerId), true);
    }
    if (ownId && tick) {
      this.drawArrowhead(buffer, tick.pose.x, tick.pose.y, tick.pose.theta, paletteColor(ownId), false);
    }
    return buffer;
  }

  private drawArrowhead(
    buffer: PixelBuffer,
    x: number,
    y: number,
    theta: number,
    color: [number, number, number],
    dotOnly: boolean,
  ): void {
    const [cx, cy] = this.toPixel(x, y);
    const template: [number, number][] = dotOnly
      ? [
          [0, 0],
          [1, 0],
          [0, 1],
          [1, 1],
        ]
      : [
          [0, 0],
          [1, 0],
          [2, 0],
          [1, 1],
          [1, -1],
        ];
    const cos = Math.cos(theta);
    const sin = Math.sin(theta);
    for (const [u, v] of template) {
      const wx = u * cos - v * sin;
      const wy = u * sin + v * cos;
      const px = cx + Math.floor(wx + 0.5);
      const py = cy + Math.floor(-wy + 0.5);
      if (px >= 0 && px < buffer.width && py >= 0 && py < buffer.height) {
        buffer.set(px, py, color);
      }
    }
  }
}
