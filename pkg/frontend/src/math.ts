/** Minimal 3D vector helpers and ray-triangle intersection. */

export type Vec3 = [number, number, number];

export const add = (a: Vec3, b: Vec3): Vec3 => [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
export const sub = (a: Vec3, b: Vec3): Vec3 => [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
export const scale = (a: Vec3, s: number): Vec3 => [a[0] * s, a[1] * s, a[2] * s];
export const dot = (a: Vec3, b: Vec3): number => a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
export const cross = (a: Vec3, b: Vec3): Vec3 => [
  a[1] * b[2] - a[2] * b[1],
  a[2] * b[0] - a[0] * b[2],
  a[0] * b[1] - a[1] * b[0],
];
export const length = (a: Vec3): number => Math.hypot(a[0], a[1], a[2]);

export function normalize(a: Vec3): Vec3 {
  const len = length(a);
  if (len === 0) throw new Error("cannot normalize a zero vector");
  return [a[0] / len, a[1] / len, a[2] / len];
}

export const mean = (points: Vec3[]): Vec3 => {
  if (points.length === 0) throw new Error("mean of zero points");
  const total = points.reduce(add, [0, 0, 0] as Vec3);
  return scale(total, 1 / points.length);
};

export interface Ray {
  origin: Vec3;
  direction: Vec3; // unit length
}

/**
 * Moller-Trumbore ray-triangle intersection.
 * Returns the ray parameter t (distance for unit directions), or null.
 */
export function rayTriangle(ray: Ray, a: Vec3, b: Vec3, c: Vec3): number | null {
  const e1 = sub(b, a);
  const e2 = sub(c, a);
  const h = cross(ray.direction, e2);
  const det = dot(e1, h);
  if (Math.abs(det) < 1e-12) return null;
  const inv = 1 / det;
  const s = sub(ray.origin, a);
  const u = dot(s, h) * inv;
  if (u < 0 || u > 1) return null;
  const q = cross(s, e1);
  const v = dot(ray.direction, q) * inv;
  if (v < 0 || u + v > 1) return null;
  const t = dot(e2, q) * inv;
  return t > 1e-9 ? t : null;
}
