/**
 * End-to-end tests against the live editing service. Spawns the server and
 * drives it exactly the way the browser UI does: GLB in, JSON ops out.
 */

import { createHash } from "node:crypto";
import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { SessionClient } from "../src/api.js";
import type { CameraPose } from "../src/camera.js";
import { parseGlb } from "../src/glb.js";
import { mean, type Vec3 } from "../src/math.js";
import { pickPoint } from "../src/picking.js";

const HERE = dirname(fileURLToPath(import.meta.url));
const REPO_ROOT = join(HERE, "..", "..");
const PORT = 8600 + (process.pid % 700);
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess | null = null;
let workdir: string;
let scenePath: string;
let annotationsPath: string;

const pose: CameraPose = {
  eye: [0, -1.6, 2.2],
  target: [0, 0, 0.74],
  up: [0, 0, 1],
  fovYRadians: Math.PI / 4,
  width: 1024,
  height: 768,
};

const sha256 = (data: ArrayBuffer | Buffer): string =>
  createHash("sha256").update(Buffer.from(data as ArrayBuffer)).digest("hex");

async function waitForServer(): Promise<void> {
  const deadline = Date.now() + 60_000;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${BASE}/sessions/probe/mesh`);
      if (response.status === 404) return;
    } catch {
      /* not up yet */
    }
    await new Promise((resolve) => setTimeout(resolve, 250));
  }
  throw new Error("editing service did not come up");
}

beforeAll(async () => {
  workdir = mkdtempSync(join(tmpdir(), "viewer-test-"));
  const made = spawnSync(
    "python3",
    ["scripts/make_demo_scene.py", "--out", workdir, "--seed", "5", "--clutter", "0"],
    { cwd: REPO_ROOT, encoding: "utf-8" },
  );
  if (made.status !== 0) throw new Error(`scene generation failed: ${made.stderr}`);
  scenePath = join(workdir, "scene.ply");
  annotationsPath = join(workdir, "scene.json");

  server = spawn(
    "python3",
    ["-m", "sceneedit.cli", "serve", "--port", String(PORT)],
    { cwd: REPO_ROOT, stdio: "pipe" },
  );
  await waitForServer();
}, 90_000);

afterAll(() => {
  server?.kill();
  rmSync(workdir, { recursive: true, force: true });
});

describe("live session", () => {
  it(
    "serves a parseable GLB for a fresh session",
    async () => {
      const client = await SessionClient.create(BASE, scenePath, annotationsPath);
      const mesh = parseGlb(await client.mesh());
      expect(mesh.indices.length % 3).toBe(0);
      expect(mesh.positions.length).toBeGreaterThan(100);
    },
    30_000,
  );

  it(
    "translate via two picked points moves the object to the exact mean",
    async () => {
      const client = await SessionClient.create(BASE, scenePath, annotationsPath);
      const edit = await client.submitPrompt("place a cup on the table");
      const tag = edit.outcomes[0].affected_tags[0];

      const mesh = parseGlb(await client.mesh());
      // pixels on the right half of the table, clear of the inserted cup
      const hitA = pickPoint(pose, mesh, 640, 350);
      const hitB = pickPoint(pose, mesh, 700, 420);
      expect(hitA).not.toBeNull();
      expect(hitB).not.toBeNull();
      // both clicks landed on the table top
      expect(hitA!.point[2]).toBeCloseTo(0.74, 3);
      expect(hitB!.point[2]).toBeCloseTo(0.74, 3);

      const points: [number, number, number][] = [
        [hitA!.point[0], hitA!.point[1], hitA!.point[2]],
        [hitB!.point[0], hitB!.point[1], hitB!.point[2]],
      ];
      const expected = mean(points as Vec3[]);
      const response = await client.translate(tag, points);
      const got = response.base_centroid as [number, number, number];
      expect(got[0]).toBeCloseTo(expected[0], 12);
      expect(got[1]).toBeCloseTo(expected[1], 12);
      expect(got[2]).toBeCloseTo(expected[2], 12);
    },
    60_000,
  );

  it(
    "pick -> translate -> undo leaves the displayed mesh equal to the pre-translate fetch",
    async () => {
      const client = await SessionClient.create(BASE, scenePath, annotationsPath);
      const edit = await client.submitPrompt("place a book on the table");
      const tag = edit.outcomes[0].affected_tags[0];
      const before = await client.mesh();
      await client.translate(tag, [[0.3, 0.1, 0.74]]);
      const moved = await client.mesh();
      expect(sha256(moved)).not.toBe(sha256(before));
      await client.undo();
      const after = await client.mesh();
      expect(sha256(after)).toBe(sha256(before));
    },
    60_000,
  );

  it(
    "viewer sequence matches the package-driven sequence (final mesh hash parity)",
    async () => {
      const client = await SessionClient.create(BASE, scenePath, annotationsPath);
      const initialHash = sha256(await client.mesh());

      const edit = await client.submitPrompt("place a cup on the table");
      const tag = edit.outcomes[0].affected_tags[0];
      const angle = (45 * Math.PI) / 180;
      await client.rotate(tag, angle, "cw");
      const points: [number, number, number][] = [
        [0.25, -0.1, 0.74],
        [0.05, 0.2, 0.74],
      ];
      await client.translate(tag, points);
      const midHash = sha256(await client.mesh());
      expect(midHash).not.toBe(initialHash);
      await client.undo();
      await client.undo();
      await client.undo();
      const finalHash = sha256(await client.mesh());

      const ops = [
        { op: "prompt", text: "place a cup on the table" },
        { op: "rotate", tag, angle, direction: "cw" },
        { op: "translate", tag, points },
        { op: "undo" },
        { op: "undo" },
        { op: "undo" },
      ];
      const out = join(workdir, "driver.glb");
      const driver = spawnSync(
        "python3",
        [join(HERE, "helpers", "session_driver.py"), scenePath, annotationsPath,
         out, JSON.stringify(ops)],
        { cwd: REPO_ROOT, encoding: "utf-8" },
      );
      expect(driver.status, driver.stderr).toBe(0);
      expect(finalHash).toBe(sha256(readFileSync(out)));
    },
    120_000,
  );

  it(
    "server rejects bad prompts without changing the scene",
    async () => {
      const client = await SessionClient.create(BASE, scenePath, annotationsPath);
      const before = sha256(await client.mesh());
      await expect(client.submitPrompt("polish the silverware")).rejects.toThrow();
      expect(sha256(await client.mesh())).toBe(before);
    },
    30_000,
  );
});
