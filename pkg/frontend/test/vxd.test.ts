import { readFileSync } from "node:fs";
import { resolve } from "node:path";
import { describe, expect, it } from "vitest";

import { elementsByTag, isUnit, parseVxd, textContent, walk } from "../src/vxd.js";

const goriotText = readFileSync(
  resolve(__dirname, "../../tests/fixtures/goriot.vxd"), "utf-8");

describe("parseVxd", () => {
  it("parses the goriot fixture with full counts", () => {
    const root = parseVxd(goriotText);
    expect(root.tag).toBe("body");
    const units: string[] = [];
    walk(root, (el) => {
      if (isUnit(el)) {
        units.push(el.attrs["id"]);
      }
    });
    expect(units).toHaveLength(10);
    expect(elementsByTag(root, "rs")).toHaveLength(21);
    expect(elementsByTag(root, "link")).toHaveLength(24);
  });

  it("reads nested rs and preserves text", () => {
    const root = parseVxd(goriotText);
    const rs = elementsByTag(root, "rs");
    const p74a = rs.find((el) => el.attrs["id"] === "p74a");
    expect(p74a && textContent(p74a)).toBe("UN HOMME D'ARGENT");
  });

  it("handles uppercase tags and open-form links", () => {
    const root = parseVxd(
      '<BODY><LINKGRP TYPE="RELATION">' +
      '<LINK ID="L1" TARGETS="U1 U2" NUCLEI="U1">' +
      "</LINKGRP></BODY>");
    const links = elementsByTag(root, "link");
    expect(links).toHaveLength(1);
    expect(links[0].attrs["id"]).toBe("L1");
  });

  it("unescapes entities", () => {
    const root = parseVxd('<body><p><seg type="unit" id="u1">a &amp; b &lt;c&gt; &#233;</seg></p></body>');
    const unit = elementsByTag(root, "seg")[0];
    expect(textContent(unit)).toBe("a & b <c> é");
  });

  it("rejects unknown tags and mismatched closes", () => {
    expect(() => parseVxd("<body><para>x</para></body>")).toThrow(/unknown tag/);
    expect(() => parseVxd("<body><p>x</body>")).toThrow(/mismatched/);
  });
});
