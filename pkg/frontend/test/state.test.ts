import { describe, expect, it } from "vitest";

import {
  actionLinkCoref,
  actionMarkRs,
  actionRelate,
  actionSegment,
} from "../src/actions.js";
import { CanvasState } from "../src/state.js";

function loadedState(): CanvasState {
  const state = new CanvasState();
  state.applyView({
    sessionId: "s1",
    version: 3,
    viewId: "work",
    document:
      '<body><p><seg type="unit" id="u1">One. </seg>' +
      '<seg type="unit" id="u2">Two <rs type="person" id="p1">guys</rs>. </seg>' +
      "rest.</p></body>",
  });
  return state;
}

describe("CanvasState", () => {
  it("tracks the server version and clears staleness on refresh", () => {
    const state = loadedState();
    expect(state.version).toBe(3);
    expect(state.stale).toBe(false);
    state.markStale(5);
    expect(state.stale).toBe(true);
    expect(state.pendingVersion).toBe(5);
    state.applyView({ sessionId: "s1", version: 5, viewId: "work",
                      document: "<body></body>" });
    expect(state.stale).toBe(false);
    expect(state.pendingVersion).toBeNull();
  });

  it("keeps at most two selected nodes and toggles", () => {
    const state = loadedState();
    state.select("u1");
    state.select("u2");
    state.select("u1"); // toggle off
    expect(state.selection).toEqual(["u2"]);
    state.select("u1");
    state.select("u2"); // toggles u2 off again
    expect(state.selection).toEqual(["u1"]);
  });

  it("drops selection entries that vanish from the document", () => {
    const state = loadedState();
    state.select("u1");
    state.applyView({ sessionId: "s1", version: 4, viewId: "work",
                      document: "<body><p>plain</p></body>" });
    expect(state.selection).toEqual([]);
  });
});

describe("actions", () => {
  it("segment emits one markUnitBoundary edit", () => {
    const state = loadedState();
    expect(actionSegment(state, 5)).toEqual({ kind: "markUnitBoundary", offset: 5 });
  });

  it("segment refuses offsets inside an rs", () => {
    const state = loadedState();
    // rs "guys" sits at unit u2 (global 6..15 is "Two guys. "): find it
    const rs = state.model!.rs[0];
    const unit = state.model!.units[rs.unitIndex];
    const inside = unit.start + rs.start + 1;
    expect(() => actionSegment(state, inside)).toThrow(/inside rs/);
    expect(() => actionSegment(state, 0)).toThrow(/outside/);
  });

  it("relate needs two selected nodes and one nucleus", () => {
    const state = loadedState();
    state.select("u1");
    expect(() => actionRelate(state, { first: true, second: false }))
      .toThrow(/exactly two/);
    state.select("u2");
    expect(() => actionRelate(state, { first: false, second: false }))
      .toThrow(/nuclear/);
    const edit = actionRelate(state, { first: true, second: false }, "narration");
    expect(edit).toEqual({
      kind: "createRelation",
      targetA: "u1",
      targetB: "u2",
      nuclei: ["u1"],
      name: "narration",
    });
  });

  it("span and link actions emit single edits", () => {
    expect(actionMarkRs(3, 8)).toEqual(
      { kind: "markRS", start: 3, end: 8, type: "person" });
    expect(actionLinkCoref("p2", "p1")).toEqual(
      { kind: "linkCoref", source: "p2", target: "p1" });
  });
});
