/**
 * Column renderer for tick messages.
 *
 * Mirrors the server's reference raycast renderer arithmetic operation for
 * operation (same wall-height formula, fisheye correction, shading, sprite
 * z-test with the verified center column always drawn, and floor(x + 0.5)
 * pixel rounding), so a frame rendered here from a tick message is
 * byte-identical to the server's rendering of the same message.
 */

import { SpriteDocument, TickMessage, ViewDocument } from "./protocol.js";

// Mirror of the server palette; sprites are drawn in these exact colors.
export const PLAYER_PALETTE: [number, number, number][] = [
  [230, 40, 40],
  [40, 200, 70],
  [60, 120, 235],
  [225, 200, 40],
  [200, 60, 200],
  [40, 210, 210],
  [240, 130, 30],
  [130, 230, 130],
];

export const CEILING_COLOR: [number, number, number] = [25, 30, 40];
export const FLOOR_COLOR: [number, number, number] = [45, 40, 35];

const WALL_WORLD_HEIGHT = 1.0;
const WALL_BASE_GRAY = 210;
const WALL_SHADE_FLOOR = 0.25;
const DISPARITY_MIN_DISTANCE = 1e-3;

export function paletteColor(playerId: string): [number, number, number] {
  let slot: number;
  if (/^p\d+$/.test(playerId)) {
    slot = parseInt(playerId.slice(1), 10) - 1;
  } else {
    slot = [...playerId].reduce((acc, ch) => acc + ch.charCodeAt(0), 0);
  }
  const idx = ((slot % PLAYER_PALETTE.length) + PLAYER_PALETTE.length) % PLAYER_PALETTE.length;
  return PLAYER_PALETTE[idx];
}

/** RGB pixel buffer, row-major, drawable without any DOM dependency. */
export class PixelBuffer {
  readonly data: Uint8ClampedArray;

  constructor(
    readonly width: number,
    readonly height: number,
  ) {
    this.data = new Uint8ClampedArray(width * height * 3);
  }

  set(x: number, y: number, rgb: [number, number, number]): void {
    const i = (y * this.width + x) * 3;
    this.data[i] = rgb[0];
    this.data[i + 1] = rgb[1];
    this.data[i + 2] = rgb[2];
  }

  get(x: number, y: number): [number, number, number] {
    const i = (y * this.width + x) * 3;
    return [this.data[i], this.data[i + 1], this.data[i + 2]];
  }
}

function px(value: number): number {
  return Math.floor(value + 0.5);
}

/** Half-up rounding to 6 decimals, matching the wire quantization. */
function missLevel(maxRange: number): number {
  return Math.floor((1.0 / maxRange) * 1e6 + 0.5) / 1e6;
}

export interface ColumnData {
  perp: Float64Array; // perpendicular wall distance per frame column
  miss: Uint8Array;
}

/** Reconstruct per-column wall distances from wire disparity values. */
export function columnsFromDisparity(
  disparity: number[],
  view: ViewDocument,
  width: number,
): ColumnData {
  const k = view.columns;
  const level = missLevel(view.max_range) + 1e-12;
  const perpK = new Float64Array(k);
  const missK = new Uint8Array(k);
  for (let j = 0; j < k; j++) {
    const disp = disparity[j];
    const miss = disp <= level;
    const dist = miss ? view.max_range : 1.0 / Math.max(disp, 1e-12);
    const bearing = view.fov * (0.5 - (j + 0.5) / k);
    perpK[j] = dist * Math.cos(bearing);
    missK[j] = miss ? 1 : 0;
  }
  if (width === k) {
    return { perp: perpK, miss: missK };
  }
  const perp = new Float64Array(width);
  const miss = new Uint8Array(width);
  for (let x = 0; x < width; x++) {
    const src = Math.min(Math.floor((x * k) / width), k - 1);
    perp[x] = perpK[src];
    miss[x] = missK[src];
  }
  return { perp, miss };
}

/** Render a tick message into a fresh native-resolution pixel buffer. */
export function renderView(
  msg: Pick<TickMessage, "disparity" | "sprites">,
  view: ViewDocument,
  width: number,
  height: number,
): PixelBuffer {
  if (width <= 0 || height <= 0) {
    throw new Error("frame dimensions must be positive");
  }
  const buffer = new PixelBuffer(width, height);
  const { perp, miss } = columnsFromDisparity(msg.disparity, view, width);
  const focal = width / 2.0 / Math.tan(view.fov / 2.0);
  const half = Math.floor(height / 2);

  for (let x = 0; x < width; x++) {
    for (let y = 0; y < half; y++) buffer.set(x, y, CEILING_COLOR);
    for (let y = half; y < height; y++) buffer.set(x, y, FLOOR_COLOR);
    if (miss[x]) continue;
    const perpClamped = Math.max(perp[x], DISPARITY_MIN_DISTANCE);
    let sliceH = Math.floor((focal * WALL_WORLD_HEIGHT) / perpClamped + 0.5);
    sliceH = Math.min(sliceH, 4 * height);
    const rawTop = Math.floor((height - sliceH) / 2);
    const top = Math.min(Math.max(rawTop, 0), height);
    const bottom = Math.min(Math.max(rawTop + sliceH, 0), height);
    const shade = Math.max(WALL_SHADE_FLOOR, 1.0 - perp[x] / view.max_range);
    const gray = Math.floor(WALL_BASE_GRAY * shade + 0.5);
    for (let y = top; y < bottom; y++) buffer.set(x, y, [gray, gray, gray]);
  }

  const colScale = width / view.columns;
  const ordered = [...msg.sprites].sort(
    (a, b) =>
      b.distance - a.distance ||
      a.player_id.length - b.player_id.length ||
      (a.player_id < b.player_id ? -1 : a.player_id > b.player_id ? 1 : 0),
  );
  for (const sprite of ordered) {
    drawSprite(buffer, sprite, view, perp, colScale);
  }
  return buffer;
}

function drawSprite(
  buffer: PixelBuffer,
  sprite: SpriteDocument,
  view: ViewDocument,
  perp: Float64Array,
  colScale: number,
): void {
  const { width, height } = buffer;
  const color = paletteColor(sprite.player_id);
  const bearing = view.fov * (0.5 - sprite.screen_column / view.columns);
  const spritePerp = sprite.distance * Math.cos(bearing);
  const center = Math.min(Math.max(px(sprite.screen_column * colScale), 0), width - 1);
  const hPx = Math.min(Math.max(px(sprite.scale * colScale), 1), 4 * height);
  const wPx = Math.min(Math.max(px(sprite.scale * colScale * 0.5), 1), width);
  const sTop = Math.max(Math.floor((height - hPx) / 2), 0);
  const sBottom = Math.min(sTop + hPx, height);
  const left = center - Math.floor(wPx / 2);
  for (let col = Math.max(left, 0); col < Math.min(left + wPx, width); col++) {
    // Server-emitted sprites passed the geometric line-of-sight test, so the
    // center column draws regardless of the quantized z-buffer.
    if (spritePerp < perp[col] + 1e-9 || col === center) {
      for (let y = sTop; y < sBottom; y++) buffer.set(col, y, color);
    }
  }
}

/** Integer nearest-neighbor upscale (the canvas blit path uses the same). */
export function scaleNearest(src: PixelBuffer, factor: number): PixelBuffer {
  const out = new PixelBuffer(src.width * factor, src.height * factor);
  for (let y = 0; y < out.height; y++) {
    const sy = Math.floor(y / factor);
    for (let x = 0; x < out.width; x++) {
      out.set(x, y, src.get(Math.floor(x / factor), sy));
    }
  }
  return out;
}
