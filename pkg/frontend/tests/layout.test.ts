import { describe, expect, it } from "vitest";

import { ForceLayout } from "../src/layout.js";

function dist(a: { x: number; y: number }, b: { x: number; y: number }): number {
  return Math.hypot(a.x - b.x, a.y - b.y);
}

describe("ForceLayout", () => {
  it("is deterministic for the same graph", () => {
    const build = () => {
      const layout = new ForceLayout(800, 600);
      layout.setGraph(
        ["a", "b", "c", "d"],
        [
          { source: "a", target: "b" },
          { source: "b", target: "c" },
        ],
      );
      layout.settle();
      return ["a", "b", "c", "d"].map((id) => layout.positionOf(id));
    };
    const first = build();
    const second = build();
    for (let i = 0; i < first.length; i++) {
      expect(first[i]).toEqual(second[i]);
    }
  });

  it("pulls connected nodes closer than disconnected ones", () => {
    const layout = new ForceLayout(800, 600);
    layout.setGraph(
      ["hub", "linked", "stray"],
      [{ source: "hub", target: "linked" }],
    );
    layout.settle();
    const hub = layout.positionOf("hub")!;
    expect(dist(hub, layout.positionOf("linked")!)).toBeLessThan(
      dist(hub, layout.positionOf("stray")!),
    );
  });

  it("never produces NaN, even with coincident start positions", () => {
    const layout = new ForceLayout(400, 400);
    const ids = Array.from({ length: 30 }, (_, i) => `n${i}`);
    const edges = ids.slice(1).map((id) => ({ source: "n0", target: id }));
    layout.setGraph(ids, edges);
    layout.settle();
    for (const id of ids) {
      const pos = layout.positionOf(id)!;
      expect(Number.isFinite(pos.x)).toBe(true);
      expect(Number.isFinite(pos.y)).toBe(true);
    }
  });

  it("keeps existing positions when the graph grows", () => {
    const layout = new ForceLayout(800, 600);
    layout.setGraph(["a", "b"], [{ source: "a", target: "b" }]);
    layout.settle();
    const before = { ...layout.positionOf("a")! };
    layout.setGraph(["a", "b", "c"], [{ source: "a", target: "b" }]);
    const after = layout.positionOf("a")!;
    expect(after.x).toBe(before.x);
    expect(after.y).toBe(before.y);
  });

  it("honors pinned nodes", () => {
    const layout = new ForceLayout(800, 600);
    layout.setGraph(["a", "b"], [{ source: "a", target: "b" }]);
    layout.pin("a", 100, 100);
    layout.settle();
    const pos = layout.positionOf("a")!;
    expect(pos.x).toBe(100);
    expect(pos.y).toBe(100);
    layout.release("a");
    layout.step(50);
    const moved = layout.positionOf("a")!;
    expect(moved.x === 100 && moved.y === 100).toBe(false);
  });

  it("reports settling", () => {
    const layout = new ForceLayout(800, 600);
    layout.setGraph(["a", "b", "c"], [{ source: "a", target: "b" }]);
    expect(layout.settled).toBe(false);
    layout.settle();
    expect(layout.settled).toBe(true);
  });
});
