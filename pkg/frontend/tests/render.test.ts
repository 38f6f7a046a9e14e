import { describe, expect, it } from "vitest";

import type { TraceResponse } from "../src/api.js";
import { chosenLevel0Cell, traceCellCorners } from "../src/render.js";

const trace: TraceResponse = {
  levels: 2,
  location: [0.25, 0.25, 0.74],
  cell_index: [1, 1],
  grids: [
    {
      origin: [0, 0],
      cell_size: 0.1,
      level: 0,
      occupancy: Array.from({ length: 6 }, () => Array(6).fill(1)),
    },
  ],
};

describe("trace overlay helpers", () => {
  it("cell corners span one cell on the support plane", () => {
    const corners = traceCellCorners(trace.grids[0], 2, 3, 0.74);
    expect(corners[0][0]).toBeCloseTo(0.2, 12);
    expect(corners[0][1]).toBeCloseTo(0.3, 12);
    expect(corners[2][0]).toBeCloseTo(0.3, 12);
    expect(corners[2][1]).toBeCloseTo(0.4, 12);
    expect(corners.every((c) => c[2] === 0.74)).toBe(true);
  });

  it("chosen cell is the level-0 cell containing the location", () => {
    expect(chosenLevel0Cell(trace)).toEqual([2, 2]);
  });

  it("chosen cell clamps to the grid", () => {
    const edge: TraceResponse = {
      ...trace,
      location: [100, -100, 0.74],
    };
    expect(chosenLevel0Cell(edge)).toEqual([5, 0]);
  });

  it("empty trace yields no chosen cell", () => {
    expect(chosenLevel0Cell({ levels: null, grids: [] })).toBeNull();
  });
});
