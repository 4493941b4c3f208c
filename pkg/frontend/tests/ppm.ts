/** Minimal binary PPM (P6) reader for golden comparisons in tests. */

import { readFileSync } from "node:fs";

export interface Ppm {
  width: number;
  height: number;
  pixels: Uint8Array; // RGB, row-major
}

export function loadPpm(path: string): Ppm {
  const raw = readFileSync(path);
  const header = raw.subarray(0, 64).toString("latin1");
  const match = header.match(/^P6\n(\d+) (\d+)\n255\n/);
  if (!match) throw new Error(`not a P6 PPM: ${path}`);
  const width = parseInt(match[1], 10);
  const height = parseInt(match[2], 10);
  const offset = match[0].length;
  const pixels = new Uint8Array(raw.subarray(offset, offset + width * height * 3));
  if (pixels.length !== width * height * 3) {
    throw new Error(`truncated PPM payload in ${path}`);
  }
  return { width, height, pixels };
}
