/**
 * Point picking: cast the camera ray through a pixel and return the nearest
 * mesh intersection. Null means the click missed the scene.
 */

import { rayThroughPixel, type CameraPose } from "./camera.js";
import { add, rayTriangle, scale, type Vec3 } from "./math.js";
import type { ParsedMesh } from "./glb.js";

export interface PickHit {
  point: Vec3;
  distance: number;
  triangle: number;
}

export function pickPoint(
  pose: CameraPose,
  mesh: ParsedMesh,
  px: number,
  py: number,
): PickHit | null {
  const ray = rayThroughPixel(pose, px, py);
  let best: PickHit | null = null;
  const { positions, indices } = mesh;
  for (let f = 0; f < indices.length; f += 3) {
    const ia = indices[f] * 3;
    const ib = indices[f + 1] * 3;
    const ic = indices[f + 2] * 3;
    const a: Vec3 = [positions[ia], positions[ia + 1], positions[ia + 2]];
    const b: Vec3 = [positions[ib], positions[ib + 1], positions[ib + 2]];
    const c: Vec3 = [positions[ic], positions[ic + 1], positions[ic + 2]];
    const t = rayTriangle(ray, a, b, c);
    if (t !== null && (best === null || t < best.distance)) {
      best = { point: add(ray.origin, scale(ray.direction, t)), distance: t, triangle: f / 3 };
    }
  }
  return best;
}
