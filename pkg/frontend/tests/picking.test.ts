import { describe, expect, it } from "vitest";

import { pixelFootprint, rayThroughPixel, type CameraPose } from "../src/camera.js";
import type { ParsedMesh } from "../src/glb.js";
import { dot, sub, type Vec3 } from "../src/math.js";
import { pickPoint } from "../src/picking.js";

/** Table-top fixture: a two-triangle rectangle at z = 0.74. */
function tableMesh(): ParsedMesh {
  const z = 0.74;
  const positions = new Float32Array([
    -0.6, -0.4, z,
    0.6, -0.4, z,
    0.6, 0.4, z,
    -0.6, 0.4, z,
  ]);
  const indices = new Uint32Array([0, 1, 2, 0, 2, 3]);
  return { positions, indices };
}

const pose: CameraPose = {
  eye: [0, -1.6, 2.2],
  target: [0, 0, 0.74],
  up: [0, 0, 1],
  fovYRadians: Math.PI / 4,
  width: 1024,
  height: 768,
};

/** Analytic expectation: intersection of the pixel ray with the z-plane. */
function planeHit(px: number, py: number, z: number): Vec3 {
  const ray = rayThroughPixel(pose, px, py);
  const t = (z - ray.origin[2]) / ray.direction[2];
  return [
    ray.origin[0] + t * ray.direction[0],
    ray.origin[1] + t * ray.direction[1],
    z,
  ];
}

describe("pick accuracy (analytic camera fixture)", () => {
  it("returns the known world point within one pixel footprint for 20 clicks", () => {
    const mesh = tableMesh();
    // 20 scripted pixels that all land on the table
    const clicks: [number, number][] = [];
    for (let k = 0; k < 20; k++) {
      clicks.push([312 + k * 20, 300 + (k % 5) * 40]);
    }
    for (const [px, py] of clicks) {
      const expected = planeHit(px, py, 0.74);
      expect(Math.abs(expected[0])).toBeLessThan(0.6); // sanity: really on the table
      expect(Math.abs(expected[1])).toBeLessThan(0.4);
      const hit = pickPoint(pose, mesh, px, py);
      expect(hit).not.toBeNull();
      const depth = dot(sub(hit!.point, pose.eye), rayThroughPixel(pose, px, py).direction);
      const footprint = pixelFootprint(pose, depth);
      const error = Math.hypot(
        hit!.point[0] - expected[0],
        hit!.point[1] - expected[1],
        hit!.point[2] - expected[2],
      );
      expect(error).toBeLessThanOrEqual(footprint);
    }
  });

  it("clicking the sky returns no hit", () => {
    expect(pickPoint(pose, tableMesh(), 5, 5)).toBeNull();
  });

  it("returns the nearest of stacked surfaces", () => {
    const lower = tableMesh();
    const upper = tableMesh();
    for (let i = 2; i < upper.positions.length; i += 3) upper.positions[i] = 0.9;
    const combined: ParsedMesh = {
      positions: new Float32Array([...lower.positions, ...upper.positions]),
      indices: new Uint32Array([
        ...lower.indices,
        ...Array.from(upper.indices, (i) => i + 4),
      ]),
    };
    const hit = pickPoint(pose, combined, 512, 384);
    expect(hit).not.toBeNull();
    expect(hit!.point[2]).toBeCloseTo(0.9, 5);
  });
});
