/**
 * Typed client for the editing service. The viewer never mutates geometry
 * locally: every mesh it renders is a fresh server response.
 */

export interface PlacementSummary {
  location: [number, number, number];
  levels: number;
  cell_index: [number, number];
  rotation_z: number | null;
  penetration_before: number | null;
  penetration_after: number | null;
}

export interface Outcome {
  affected_tags: string[];
  warnings: string[];
  placement: PlacementSummary | null;
}

export interface EditResponse {
  task: { kind: string; primary: string[]; grounding: string; rationale: string };
  outcomes: Outcome[];
}

export interface TraceGrid {
  origin: [number, number];
  cell_size: number;
  level: number;
  occupancy: number[][];
}

export interface TraceResponse {
  levels: number | null;
  location?: [number, number, number];
  cell_index?: [number, number];
  grids: TraceGrid[];
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly kind: string,
    detail: string,
  ) {
    super(`${kind}: ${detail}`);
  }
}

async function expectOk(response: Response): Promise<any> {
  if (response.ok) {
    return response.headers.get("content-type")?.includes("json")
      ? response.json()
      : response.arrayBuffer();
  }
  let kind = `HTTP ${response.status}`;
  let detail = response.statusText;
  try {
    const body = await response.json();
    kind = body.error ?? kind;
    detail = body.detail ?? JSON.stringify(body);
  } catch {
    /* non-JSON error body */
  }
  throw new ApiError(response.status, kind, detail);
}

export class SessionClient {
  constructor(
    readonly baseUrl: string,
    readonly sessionId: string,
  ) {}

  static async create(baseUrl: string, scene: string, annotations?: string): Promise<SessionClient> {
    const response = await fetch(`${baseUrl}/sessions`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ scene, annotations: annotations ?? null }),
    });
    const body = await expectOk(response);
    return new SessionClient(baseUrl, body.id);
  }

  private url(suffix: string): string {
    return `${this.baseUrl}/sessions/${this.sessionId}${suffix}`;
  }

  private async post(suffix: string, payload: unknown): Promise<any> {
    const response = await fetch(this.url(suffix), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
    return expectOk(response);
  }

  async mesh(): Promise<ArrayBuffer> {
    const response = await fetch(this.url("/mesh"));
    if (!response.ok) throw new ApiError(response.status, "MeshFetch", response.statusText);
    return response.arrayBuffer();
  }

  async submitPrompt(prompt: string): Promise<EditResponse> {
    return this.post("/edits", { prompt });
  }

  async submitTask(kind: string, primary: string[], grounding: string): Promise<EditResponse> {
    return this.post("/edits", { kind, primary, grounding });
  }

  async translate(tag: string, points: [number, number, number][]): Promise<any> {
    return this.post("/translate", { tag, points });
  }

  async rotate(tag: string, angleRadians: number, direction: "cw" | "ccw"): Promise<any> {
    return this.post("/rotate", { tag, angle: angleRadians, direction });
  }

  async undo(): Promise<any> {
    return this.post("/undo", {});
  }

  async trace(): Promise<TraceResponse> {
    const response = await fetch(this.url("/trace"));
    return expectOk(response);
  }

  async tags(): Promise<Record<string, { label: string }>> {
    const response = await fetch(this.url("/tags"));
    return (await expectOk(response)).tags;
  }
}
