import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { TickMessage, ViewDocument } from "../src/protocol.js";
import {
  CEILING_COLOR,
  FLOOR_COLOR,
  PixelBuffer,
  renderView,
  scaleNearest,
} from "../src/renderer.js";
import { loadPpm } from "./ppm.js";

const HERE = dirname(fileURLToPath(import.meta.url));
const FIXTURES = join(HERE, "..", "fixtures");

interface FixtureRecord {
  name: string;
  line: string;
}

function loadFixtures(): { name: string; msg: TickMessage }[] {
  const text = readFileSync(join(FIXTURES, "tick_fixture.ndjson"), "utf-8");
  return text
    .trim()
    .split("\n")
    .map((line) => {
      const record = JSON.parse(line) as FixtureRecord;
      return { name: record.name, msg: JSON.parse(record.line) as TickMessage };
    });
}

const VIEW: ViewDocument = {
  fov: Math.PI / 2,
  columns: 320,
  max_range: 64.0,
  width: 320,
  height: 200,
};

describe("renderView golden conformance", () => {
  for (const { name, msg } of loadFixtures()) {
    it(`matches the engine golden for ${name}`, () => {
      const golden = loadPpm(join(FIXTURES, `golden_client_${name}.ppm`));
      const buffer = renderView(msg, VIEW, VIEW.width, VIEW.height);
      expect(buffer.width).toBe(golden.width);
      expect(buffer.height).toBe(golden.height);
      expect(Buffer.from(buffer.data).equals(Buffer.from(golden.pixels))).toBe(true);
    });

    it(`matches under 2x nearest-neighbor scaling for ${name}`, () => {
      const golden = loadPpm(join(FIXTURES, `golden_client_${name}.ppm`));
      const scaled = scaleNearest(renderView(msg, VIEW, VIEW.width, VIEW.height), 2);
      expect(scaled.width).toBe(golden.width * 2);
      for (const [x, y] of [
        [0, 0],
        [317, 101],
        [639, 399],
        [160, 200],
        [451, 77],
      ]) {
        const expected = [
          golden.pixels[((y >> 1) * golden.width + (x >> 1)) * 3],
          golden.pixels[((y >> 1) * golden.width + (x >> 1)) * 3 + 1],
          golden.pixels[((y >> 1) * golden.width + (x >> 1)) * 3 + 2],
        ];
        expect(scaled.get(x, y)).toEqual(expected);
      }
    });
  }
});

describe("renderView basics", () => {
  it("renders all-miss disparity as half ceiling, half floor", () => {
    const disparity = new Array(VIEW.columns).fill(1 / VIEW.max_range);
    const buffer = renderView({ disparity, sprites: [] }, VIEW, 320, 200);
    expect(buffer.get(10, 0)).toEqual([...CEILING_COLOR]);
    expect(buffer.get(10, 99)).toEqual([...CEILING_COLOR]);
    expect(buffer.get(10, 100)).toEqual([...FLOOR_COLOR]);
    expect(buffer.get(10, 199)).toEqual([...FLOOR_COLOR]);
  });

  it("draws a centered sprite block in the opponent color", () => {
    const disparity = new Array(VIEW.columns).fill(1 / VIEW.max_range);
    const buffer = renderView(
      {
        disparity,
        sprites: [{ player_id: "p2", screen_column: 160, distance: 8, scale: 14 }],
      },
      VIEW,
      320,
      200,
    );
    expect(buffer.get(160, 100)).toEqual([40, 200, 70]);
  });

  it("rejects empty dimensions", () => {
    expect(() => renderView({ disparity: [], sprites: [] }, VIEW, 0, 10)).toThrow();
  });

  it("nearest-neighbor scaling is exact block replication", () => {
    const buffer = new PixelBuffer(2, 1);
    buffer.set(0, 0, [1, 2, 3]);
    buffer.set(1, 0, [4, 5, 6]);
    const scaled = scaleNearest(buffer, 3);
    expect(scaled.get(2, 2)).toEqual([1, 2, 3]);
    expect(scaled.get(3, 0)).toEqual([4, 5, 6]);
  });
});
