import { readFileSync } from "node:fs";
import { resolve } from "node:path";
import { describe, expect, it } from "vitest";

import { digest, digestsEqual, modelFromVxd } from "../src/model.js";

const goriotText = readFileSync(
  resolve(__dirname, "../../tests/fixtures/goriot.vxd"), "utf-8");

describe("modelFromVxd", () => {
  const model = modelFromVxd(goriotText);

  it("collects units in text order with offsets", () => {
    expect(model.units.map((u) => u.id)).toEqual(
      ["u1", "u2", "u3", "u4", "u5", "u6", "u7", "u8", "u9", "u10"]);
    expect(model.units[0].start).toBe(0);
    expect(model.units[1].start).toBe(model.units[0].end);
    expect(model.text.length).toBe(model.units[9].end);
  });

  it("maps rs to their units with in-unit offsets", () => {
    const p77 = model.rs.find((s) => s.id === "p77");
    expect(p77?.unitIndex).toBe(7); // u8
    expect(p77?.text).toBe("SA SOEUR");
    const within = model.units[7].text.slice(p77!.start, p77!.end);
    expect(within).toBe("SA SOEUR");
  });

  it("separates link kinds", () => {
    expect(model.corefPairs).toHaveLength(14);
    expect(model.bridges).toEqual([
      { source: "p72", target: "p71", name: "POSS" },
    ]);
    expect(model.relations).toHaveLength(9);
  });
});

describe("digest", () => {
  const model = modelFromVxd(goriotText);

  it("builds the four coreference chains", () => {
    const d = digest(model);
    const sizes = d.chains.map((c) => c.length).sort((a, b) => a - b);
    expect(sizes).toEqual([1, 1, 1, 3, 3, 4, 8]);
  });

  it("is invariant under systematic id renaming", () => {
    const renamed = modelFromVxd(goriotText);
    const rename = (id: string) => (id ? `ren-${id}` : id);
    for (const unit of renamed.units) {
      unit.id = rename(unit.id);
    }
    for (const span of [...renamed.rs, ...renamed.names]) {
      span.id = rename(span.id);
    }
    renamed.corefPairs = renamed.corefPairs.map(
      ([a, b]) => [rename(a), rename(b)]);
    for (const bridge of renamed.bridges) {
      bridge.source = rename(bridge.source);
      bridge.target = rename(bridge.target);
    }
    for (const relation of renamed.relations) {
      relation.id = rename(relation.id);
      relation.targets = [rename(relation.targets[0]), rename(relation.targets[1])];
      relation.nuclei = relation.nuclei.map(rename);
    }
    expect(digestsEqual(digest(model), digest(renamed))).toBe(true);
  });

  it("tree signature is a single rooted shape", () => {
    const d = digest(model);
    expect(d.tree).not.toBeNull();
    const root = d.tree as { nuclei: [boolean, boolean]; children: unknown[] };
    expect(root.nuclei).toEqual([true, false]); // u1 nuclear, rest satellite
  });

  it("digest differs when nuclearity differs", () => {
    const flipped = modelFromVxd(
      goriotText.replace('id="l9" targets="u1 l8" nuclei="u1"',
                         'id="l9" targets="u1 l8" nuclei="l8"'));
    expect(digestsEqual(digest(model), digest(flipped))).toBe(false);
  });
});
