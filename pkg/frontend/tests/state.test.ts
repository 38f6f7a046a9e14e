import { describe, expect, it } from "vitest";

import { ViewerState } from "../src/state.js";

describe("ViewerState", () => {
  it("rejects picked points while nothing is selected", () => {
    const state = new ViewerState();
    expect(state.addPickedPoint([0, 0, 0])).toBe(false);
    expect(state.pendingPoints).toHaveLength(0);
    state.selectTag("cup_1");
    expect(state.addPickedPoint([0.1, 0.2, 0.74])).toBe(true);
    expect(state.pendingPoints).toHaveLength(1);
  });

  it("changing the selection clears pending points", () => {
    const state = new ViewerState();
    state.selectTag("cup_1");
    state.addPickedPoint([0, 0, 0]);
    state.selectTag("book_2");
    expect(state.pendingPoints).toHaveLength(0);
  });

  it("allows a single in-flight mutation at a time", async () => {
    const state = new ViewerState();
    let release!: () => void;
    const first = state.mutate(
      () => new Promise<void>((resolve) => (release = resolve)),
    );
    await expect(state.mutate(async () => {})).rejects.toThrow("in flight");
    release();
    await first;
    await expect(state.mutate(async () => "ok")).resolves.toBe("ok");
  });

  it("clears busy even when the mutation fails", async () => {
    const state = new ViewerState();
    await expect(
      state.mutate(async () => {
        throw new Error("boom");
      }),
    ).rejects.toThrow("boom");
    expect(state.busy).toBe(false);
  });

  it("trace toggle flips", () => {
    const state = new ViewerState();
    expect(state.toggleTrace()).toBe(true);
    expect(state.toggleTrace()).toBe(false);
  });
});
