/**
 * Viewer interaction state. Picked points are only accepted while an object
 * tag is selected, and at most one mutation is in flight at a time (the UI
 * disables its controls while `busy`, mirroring the server's 409 contract).
 */

import type { Vec3 } from "./math.js";

export class ViewerState {
  selectedTag: string | null = null;
  pendingPoints: Vec3[] = [];
  traceOverlay = false;
  busy = false;

  selectTag(tag: string | null): void {
    this.selectedTag = tag;
    this.pendingPoints = [];
  }

  /** Returns true when the point was accepted (a tag must be selected). */
  addPickedPoint(point: Vec3): boolean {
    if (this.selectedTag === null) return false;
    this.pendingPoints.push(point);
    return true;
  }

  clearPoints(): void {
    this.pendingPoints = [];
  }

  toggleTrace(): boolean {
    this.traceOverlay = !this.traceOverlay;
    return this.traceOverlay;
  }

  /**
   * Guard one mutation: resolves the action's result after clearing `busy`;
   * throws immediately when another mutation is already running.
   */
  async mutate<T>(action: () => Promise<T>): Promise<T> {
    if (this.busy) throw new Error("another edit is in flight");
    this.busy = true;
    try {
      return await action();
    } finally {
      this.busy = false;
    }
  }
}
