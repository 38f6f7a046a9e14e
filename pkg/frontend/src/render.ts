/**
 * Canvas2D flat-shaded painter renderer plus the placement-trace overlay.
 * No local geometry processing beyond projection: the mesh is always the
 * server's latest GLB.
 */

import { project, type CameraPose } from "./camera.js";
import { cross, normalize, sub, type Vec3 } from "./math.js";
import type { ParsedMesh } from "./glb.js";
import type { TraceGrid, TraceResponse } from "./api.js";

const LIGHT: Vec3 = normalize([0.4, 0.25, 0.88]);

export function renderMesh(
  ctx: CanvasRenderingContext2D,
  pose: CameraPose,
  mesh: ParsedMesh,
): void {
  ctx.fillStyle = "#10141c";
  ctx.fillRect(0, 0, pose.width, pose.height);
  const { positions, indices } = mesh;
  const faceCount = indices.length / 3;
  const order: { depth: number; f: number }[] = [];
  const projected: ([number, number] | null)[] = new Array(positions.length / 3).fill(null);
  const seen = new Uint8Array(positions.length / 3);

  const vertex = (i: number): Vec3 => [positions[i * 3], positions[i * 3 + 1], positions[i * 3 + 2]];

  for (let f = 0; f < faceCount; f++) {
    let depth = 0;
    let visible = true;
    for (let k = 0; k < 3; k++) {
      const vi = indices[f * 3 + k];
      if (!seen[vi]) {
        projected[vi] = project(pose, vertex(vi));
        seen[vi] = 1;
      }
      if (projected[vi] === null) {
        visible = false;
        break;
      }
      const p = vertex(vi);
      depth +=
        (p[0] - pose.eye[0]) ** 2 + (p[1] - pose.eye[1]) ** 2 + (p[2] - pose.eye[2]) ** 2;
    }
    if (visible) order.push({ depth, f });
  }
  order.sort((a, b) => b.depth - a.depth);

  for (const { f } of order) {
    const ia = indices[f * 3];
    const ib = indices[f * 3 + 1];
    const ic = indices[f * 3 + 2];
    const a = vertex(ia);
    const n = normalize(cross(sub(vertex(ib), a), sub(vertex(ic), a)));
    const shade = 0.35 + 0.65 * Math.max(0, n[0] * LIGHT[0] + n[1] * LIGHT[1] + n[2] * LIGHT[2]);
    const tone = Math.round(70 + 150 * shade);
    ctx.fillStyle = `rgb(${tone - 18}, ${tone - 6}, ${tone})`;
    const pa = projected[ia]!;
    const pb = projected[ib]!;
    const pc = projected[ic]!;
    ctx.beginPath();
    ctx.moveTo(pa[0], pa[1]);
    ctx.lineTo(pb[0], pb[1]);
    ctx.lineTo(pc[0], pc[1]);
    ctx.closePath();
    ctx.fill();
  }
}

/** World-space corners of a level-0 cell, on the placement's support plane. */
export function traceCellCorners(grid: TraceGrid, i: number, j: number, z: number): Vec3[] {
  const [x0, y0] = grid.origin;
  const s = grid.cell_size;
  return [
    [x0 + i * s, y0 + j * s, z],
    [x0 + (i + 1) * s, y0 + j * s, z],
    [x0 + (i + 1) * s, y0 + (j + 1) * s, z],
    [x0 + i * s, y0 + (j + 1) * s, z],
  ];
}

/** Level-0 cell containing the chosen placement point. */
export function chosenLevel0Cell(trace: TraceResponse): [number, number] | null {
  if (trace.levels === null || !trace.grids.length || !trace.location) return null;
  const level0 = trace.grids[0];
  const i = Math.floor((trace.location[0] - level0.origin[0]) / level0.cell_size);
  const j = Math.floor((trace.location[1] - level0.origin[1]) / level0.cell_size);
  const rows = level0.occupancy.length;
  const cols = level0.occupancy[0].length;
  return [Math.min(Math.max(i, 0), rows - 1), Math.min(Math.max(j, 0), cols - 1)];
}

export function renderTraceOverlay(
  ctx: CanvasRenderingContext2D,
  pose: CameraPose,
  trace: TraceResponse,
): void {
  if (trace.levels === null || trace.grids.length === 0 || !trace.location) return;
  const level0 = trace.grids[0];
  const z = trace.location[2] + 0.002;
  const chosen = chosenLevel0Cell(trace);

  const drawCell = (i: number, j: number, style: string) => {
    const corners = traceCellCorners(level0, i, j, z).map((p) => project(pose, p));
    if (corners.some((c) => c === null)) return;
    ctx.fillStyle = style;
    ctx.beginPath();
    const first = corners[0]!;
    ctx.moveTo(first[0], first[1]);
    for (const c of corners.slice(1)) ctx.lineTo(c![0], c![1]);
    ctx.closePath();
    ctx.fill();
  };

  for (let i = 0; i < level0.occupancy.length; i++) {
    for (let j = 0; j < level0.occupancy[i].length; j++) {
      if (level0.occupancy[i][j] === 1) drawCell(i, j, "rgba(80, 200, 120, 0.25)");
    }
  }
  if (chosen) drawCell(chosen[0], chosen[1], "rgba(255, 120, 40, 0.8)");
}

export function renderPickedPoints(
  ctx: CanvasRenderingContext2D,
  pose: CameraPose,
  points: Vec3[],
): void {
  ctx.fillStyle = "#ffd166";
  for (const point of points) {
    const p = project(pose, point);
    if (p === null) continue;
    ctx.beginPath();
    ctx.arc(p[0], p[1], 4, 0, 2 * Math.PI);
    ctx.fill();
  }
}
