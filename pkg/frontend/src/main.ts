/**
 * DOM shell: wires the session client, picking, state and renderer to the
 * controls in index.html. Every mutation refetches the mesh from the server
 * and re-renders; nothing is edited client-side.
 */

import { SessionClient, ApiError, type TraceResponse } from "./api.js";
import { orbit, zoom, type CameraPose } from "./camera.js";
import { parseGlb, type ParsedMesh } from "./glb.js";
import { mean, type Vec3 } from "./math.js";
import { pickPoint } from "./picking.js";
import { renderMesh, renderPickedPoints, renderTraceOverlay } from "./render.js";
import { ViewerState } from "./state.js";

const canvas = document.getElementById("viewport") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const state = new ViewerState();

let client: SessionClient | null = null;
let mesh: ParsedMesh | null = null;
let trace: TraceResponse | null = null;
let pose: CameraPose = {
  eye: [2.4, -2.4, 2.0],
  target: [0, 0, 0.6],
  up: [0, 0, 1],
  fovYRadians: Math.PI / 4,
  width: canvas.width,
  height: canvas.height,
};

const element = <T extends HTMLElement>(id: string): T =>
  document.getElementById(id) as T;

const toast = (message: string, isError = false) => {
  const box = element<HTMLDivElement>("toast");
  box.textContent = message;
  box.className = isError ? "toast error" : "toast";
  setTimeout(() => (box.textContent = ""), 5000);
};

function redraw(): void {
  if (mesh === null) return;
  renderMesh(ctx, pose, mesh);
  if (state.traceOverlay && trace) renderTraceOverlay(ctx, pose, trace);
  renderPickedPoints(ctx, pose, state.pendingPoints);
}

function setControlsEnabled(enabled: boolean): void {
  for (const id of ["prompt-send", "rotate-cw", "rotate-ccw", "apply-translate", "undo"]) {
    element<HTMLButtonElement>(id).disabled = !enabled;
  }
}

async function refetch(): Promise<void> {
  if (client === null) return;
  const buffer = await client.mesh();
  mesh = parseGlb(buffer);
  trace = await client.trace();
  await refreshTags();
  redraw();
}

async function refreshTags(): Promise<void> {
  if (client === null) return;
  const tags = await client.tags();
  const select = element<HTMLSelectElement>("tag-select");
  const previous = state.selectedTag;
  select.innerHTML = "<option value=''>(no selection)</option>";
  for (const tag of Object.keys(tags)) {
    const option = document.createElement("option");
    option.value = tag;
    option.textContent = `${tag} (${tags[tag].label})`;
    select.appendChild(option);
  }
  if (previous && previous in tags) select.value = previous;
  else state.selectTag(null);
}

async function guarded(action: () => Promise<void>): Promise<void> {
  setControlsEnabled(false);
  try {
    await state.mutate(action);
  } catch (error) {
    toast(error instanceof ApiError ? error.message : String(error), true);
  } finally {
    setControlsEnabled(true);
    redraw();
  }
}

element<HTMLButtonElement>("connect").addEventListener("click", async () => {
  const base = element<HTMLInputElement>("server-url").value.replace(/\/$/, "");
  const scene = element<HTMLInputElement>("scene-path").value;
  const annotations = element<HTMLInputElement>("annotations-path").value || undefined;
  try {
    client = await SessionClient.create(base, scene, annotations);
    element<HTMLSpanElement>("session-id").textContent = client.sessionId;
    await refetch();
    toast("session created");
  } catch (error) {
    toast(String(error), true);
  }
});

element<HTMLButtonElement>("prompt-send").addEventListener("click", () =>
  guarded(async () => {
    if (client === null) throw new Error("connect first");
    const prompt = element<HTMLInputElement>("prompt").value;
    const response = await client.submitPrompt(prompt);
    const warnings = response.outcomes.flatMap((o) => o.warnings);
    toast(warnings.length ? warnings.join("; ") : `done: ${response.task.kind}`);
    await refetch();
  }),
);

element<HTMLSelectElement>("tag-select").addEventListener("change", (event) => {
  const value = (event.target as HTMLSelectElement).value;
  state.selectTag(value === "" ? null : value);
  redraw();
});

canvas.addEventListener("click", (event) => {
  if (mesh === null) return;
  const rect = canvas.getBoundingClientRect();
  const px = ((event.clientX - rect.left) / rect.width) * pose.width;
  const py = ((event.clientY - rect.top) / rect.height) * pose.height;
  const hit = pickPoint(pose, mesh, px, py);
  if (hit === null) {
    toast("no hit", true);
    return;
  }
  if (!state.addPickedPoint(hit.point)) {
    toast("select an object tag before picking target points", true);
    return;
  }
  element<HTMLSpanElement>("point-count").textContent = String(state.pendingPoints.length);
  redraw();
});

element<HTMLButtonElement>("apply-translate").addEventListener("click", () =>
  guarded(async () => {
    if (client === null || state.selectedTag === null) throw new Error("select an object");
    if (state.pendingPoints.length === 0) throw new Error("pick at least one point");
    const target = mean(state.pendingPoints);
    void target; // the server computes the same mean from the raw points
    await client.translate(
      state.selectedTag,
      state.pendingPoints.map((p) => [p[0], p[1], p[2]] as [number, number, number]),
    );
    state.clearPoints();
    element<HTMLSpanElement>("point-count").textContent = "0";
    await refetch();
  }),
);

const rotateBy = (direction: "cw" | "ccw") =>
  guarded(async () => {
    if (client === null || state.selectedTag === null) throw new Error("select an object");
    const degrees = parseFloat(element<HTMLInputElement>("rotate-degrees").value) || 45;
    await client.rotate(state.selectedTag, (degrees * Math.PI) / 180, direction);
    await refetch();
  });

element<HTMLButtonElement>("rotate-cw").addEventListener("click", () => rotateBy("cw"));
element<HTMLButtonElement>("rotate-ccw").addEventListener("click", () => rotateBy("ccw"));

element<HTMLButtonElement>("undo").addEventListener("click", () =>
  guarded(async () => {
    if (client === null) throw new Error("connect first");
    await client.undo();
    await refetch();
  }),
);

element<HTMLInputElement>("trace-toggle").addEventListener("change", () => {
  state.toggleTrace();
  redraw();
});

let dragging = false;
let lastX = 0;
let lastY = 0;
canvas.addEventListener("mousedown", (event) => {
  dragging = true;
  lastX = event.clientX;
  lastY = event.clientY;
});
window.addEventListener("mouseup", () => (dragging = false));
window.addEventListener("mousemove", (event) => {
  if (!dragging) return;
  pose = orbit(pose, -(event.clientX - lastX) * 0.01, (event.clientY - lastY) * 0.01);
  lastX = event.clientX;
  lastY = event.clientY;
  redraw();
});
canvas.addEventListener("wheel", (event) => {
  event.preventDefault();
  pose = zoom(pose, event.deltaY > 0 ? 1.1 : 0.9);
  redraw();
});
