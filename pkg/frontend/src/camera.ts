/**
 * Pinhole camera: world Z-up, vertical field of view, pixel origin at the
 * top-left with pixel centers at half-integers. `rayThroughPixel` and
 * `project` are exact inverses for points in front of the camera.
 */

import { add, cross, normalize, scale, sub, dot, type Ray, type Vec3 } from "./math.js";

export interface CameraPose {
  eye: Vec3;
  target: Vec3;
  up: Vec3;
  fovYRadians: number;
  width: number;   // viewport pixels
  height: number;
}

export interface CameraBasis {
  forward: Vec3;
  right: Vec3;
  upward: Vec3;
}

export function basis(pose: CameraPose): CameraBasis {
  const forward = normalize(sub(pose.target, pose.eye));
  const right = normalize(cross(forward, pose.up));
  const upward = cross(right, forward);
  return { forward, right, upward };
}

export function rayThroughPixel(pose: CameraPose, px: number, py: number): Ray {
  const { forward, right, upward } = basis(pose);
  const tanHalf = Math.tan(pose.fovYRadians / 2);
  const aspect = pose.width / pose.height;
  const ndcX = ((2 * (px + 0.5)) / pose.width - 1) * tanHalf * aspect;
  const ndcY = (1 - (2 * (py + 0.5)) / pose.height) * tanHalf;
  const direction = normalize(add(forward, add(scale(right, ndcX), scale(upward, ndcY))));
  return { origin: pose.eye, direction };
}

/** Pixel position of a world point, or null when behind the camera. */
export function project(pose: CameraPose, point: Vec3): [number, number] | null {
  const { forward, right, upward } = basis(pose);
  const v = sub(point, pose.eye);
  const depth = dot(v, forward);
  if (depth <= 1e-12) return null;
  const tanHalf = Math.tan(pose.fovYRadians / 2);
  const aspect = pose.width / pose.height;
  const x = dot(v, right) / (depth * tanHalf * aspect);
  const y = dot(v, upward) / (depth * tanHalf);
  const px = ((x + 1) / 2) * pose.width - 0.5;
  const py = ((1 - y) / 2) * pose.height - 0.5;
  return [px, py];
}

/** World-space size of one pixel at the given depth along the view axis. */
export function pixelFootprint(pose: CameraPose, depth: number): number {
  return (2 * depth * Math.tan(pose.fovYRadians / 2)) / pose.height;
}

/** Orbit the eye around the target: yaw about +Z, pitch about the right axis. */
export function orbit(pose: CameraPose, yaw: number, pitch: number): CameraPose {
  const offset = sub(pose.eye, pose.target);
  const radius = Math.hypot(offset[0], offset[1], offset[2]);
  const currentYaw = Math.atan2(offset[1], offset[0]);
  const currentPitch = Math.asin(offset[2] / radius);
  const newYaw = currentYaw + yaw;
  const newPitch = Math.min(Math.max(currentPitch + pitch, -1.45), 1.45);
  const eye: Vec3 = [
    pose.target[0] + radius * Math.cos(newPitch) * Math.cos(newYaw),
    pose.target[1] + radius * Math.cos(newPitch) * Math.sin(newYaw),
    pose.target[2] + radius * Math.sin(newPitch),
  ];
  return { ...pose, eye };
}

export function zoom(pose: CameraPose, factor: number): CameraPose {
  const offset = sub(pose.eye, pose.target);
  return { ...pose, eye: add(pose.target, scale(offset, factor)) };
}
