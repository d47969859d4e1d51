// @vitest-environment happy-dom
import { describe, expect, it } from "vitest";

import {
  buildConceptTable,
  fadeAlpha,
  fillFor,
  GraphView,
  radiusFor,
  TABLE_FALLBACK_THRESHOLD,
} from "../src/graphview.js";
import { parseJson } from "../src/jsontext.js";
import { wmSnapshot } from "../src/types.js";

function snap(conceptIds: string[], extra?: { predicates?: string; edges?: string }): string {
  const concepts = conceptIds
    .map(
      (id) =>
        `{"id": "${id}", "surface": null, "salience": 0.5, "truth": "positive",
          "pinned": false, "covered": false, "tense": null, "last_mention": 1, "types": []}`,
    )
    .join(",");
  return `{"turn": 1, "concepts": [${concepts}],
    "predicates": [${extra?.predicates ?? ""}], "edges": [${extra?.edges ?? ""}]}`;
}

describe("visual scales", () => {
  it("maps salience to radius on an absolute, clamped scale", () => {
    expect(radiusFor(0)).toBe(5);
    expect(radiusFor(1)).toBe(13);
    expect(radiusFor(2)).toBe(13);
    expect(radiusFor(-1)).toBe(5);
    // equal saliences always read as equal sizes
    expect(radiusFor(0.4)).toBe(radiusFor(0.4));
    expect(radiusFor(0.6)).toBeGreaterThan(radiusFor(0.3));
  });

  it("tints negative-truth nodes red regardless of salience", () => {
    expect(fillFor(0.9, "negative")).toBe("#8c2f39");
    expect(fillFor(0.1, "negative")).toBe("#8c2f39");
    expect(fillFor(0.9, "positive")).not.toBe(fillFor(0.1, "positive"));
  });

  it("fades pruned nodes out over time", () => {
    expect(fadeAlpha(0)).toBe(1);
    expect(fadeAlpha(450)).toBeCloseTo(0.5);
    expect(fadeAlpha(900)).toBe(0);
    expect(fadeAlpha(5000)).toBe(0);
  });
});

describe("GraphView", () => {
  function view(onSelect: (id: string | null) => void = () => {}) {
    const canvas = document.createElement("canvas");
    canvas.width = 400;
    canvas.height = 300;
    document.body.appendChild(canvas);
    let clock = 0;
    const gv = new GraphView(canvas, { onSelect }, () => (clock += 16));
    return { canvas, gv };
  }

  it("tracks snapshot nodes", () => {
    const { gv } = view();
    gv.setSnapshot(wmSnapshot(parseJson(snap(["a", "b", "c"]))));
    expect(gv.nodeCount).toBe(3);
    gv.setSnapshot(wmSnapshot(parseJson(snap(["a"]))));
    expect(gv.nodeCount).toBe(1);
    gv.dispose();
  });

  it("deselects when the selected node leaves memory", () => {
    const selections: (string | null)[] = [];
    const { gv } = view((id) => selections.push(id));
    gv.setSnapshot(wmSnapshot(parseJson(snap(["a", "b"]))));
    gv.select("b");
    gv.setSnapshot(wmSnapshot(parseJson(snap(["a"]))));
    expect(selections).toEqual([null]);
    gv.dispose();
  });

  it("hitTest misses far-away points and highlight is safe headless", () => {
    const { gv } = view();
    gv.setSnapshot(wmSnapshot(parseJson(snap(["a"]))));
    expect(gv.hitTest(-5000, -5000)).toBeNull();
    gv.highlight(["a", "ghost"]);
    gv.draw();
    gv.dispose();
  });
});

describe("buildConceptTable", () => {
  it("prints every concept with its salience lexeme", () => {
    const doc = parseJson(`{"turn": 3, "concepts": [
      {"id": "x", "surface": null, "salience": 1e-05, "truth": "positive",
       "pinned": false, "covered": false, "tense": null, "last_mention": 3, "types": ["thing"]}
    ], "predicates": [], "edges": []}`);
    const table = buildConceptTable(document, wmSnapshot(doc));
    expect(table.textContent).toContain("x");
    expect(table.textContent).toContain("1e-05");
    expect(table.textContent).toContain("thing");
    expect(table.textContent).toContain(String(TABLE_FALLBACK_THRESHOLD));
  });
});
