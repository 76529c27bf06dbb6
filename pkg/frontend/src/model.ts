/** Document model and id-independent digests for equivalence checks. */

import { ElementNode, isUnit, parseVxd, textContent, walk } from "./vxd.js";

export interface SpanModel {
  id: string;
  unitIndex: number; // 0-based; -1 when outside any unit
  start: number; // character offset within the unit text
  end: number;
  text: string;
  type: string;
  key?: string;
}

export interface UnitModel {
  id: string;
  index: number; // 0-based text order
  text: string;
  start: number; // global character offset
  end: number;
}

export interface RelationModel {
  id: string;
  targets: [string, string];
  nuclei: string[];
  name?: string;
}

export interface DocumentModel {
  text: string;
  units: UnitModel[];
  rs: SpanModel[];
  names: SpanModel[];
  corefPairs: [string, string][];
  bridges: { source: string; target: string; name: string }[];
  relations: RelationModel[];
}

export function modelFromVxd(document: string): DocumentModel {
  return modelFromTree(parseVxd(document));
}

export function modelFromTree(root: ElementNode): DocumentModel {
  const units: UnitModel[] = [];
  const rs: SpanModel[] = [];
  const names: SpanModel[] = [];
  let globalOffset = 0;

  const unitStack: { index: number; start: number }[] = [];

  const scan = (el: ElementNode) => {
    const entering = isUnit(el);
    if (entering) {
      unitStack.push({ index: units.length, start: globalOffset });
      units.push({
        id: (el.attrs["id"] ?? "").toLowerCase(),
        index: units.length,
        text: textContent(el),
        start: globalOffset,
        end: globalOffset + textContent(el).length,
      });
    }
    const spanStart = globalOffset;
    for (const child of el.children) {
      if (typeof child === "string") {
        globalOffset += child.length;
      } else {
        scan(child);
      }
    }
    if (el.tag === "rs" || el.tag === "name") {
      const inUnit = unitStack[unitStack.length - 1];
      const span: SpanModel = {
        id: (el.attrs["id"] ?? "").toLowerCase(),
        unitIndex: inUnit ? inUnit.index : -1,
        start: inUnit ? spanStart - inUnit.start : spanStart,
        end: (inUnit ? spanStart - inUnit.start : spanStart)
          + (globalOffset - spanStart),
        text: textContent(el),
        type: (el.attrs["type"] ?? "").toLowerCase(),
      };
      if (el.tag === "name") {
        span.key = el.attrs["key"] ?? "";
      }
      (el.tag === "rs" ? rs : names).push(span);
    }
    if (entering) {
      unitStack.pop();
    }
  };
  scan(root);

  const corefPairs: [string, string][] = [];
  const bridges: { source: string; target: string; name: string }[] = [];
  const relations: RelationModel[] = [];
  walk(root, (el) => {
    if (el.tag !== "linkGrp") {
      return;
    }
    const groupType = (el.attrs["type"] ?? "").toLowerCase();
    for (const child of el.children) {
      if (typeof child === "string" || child.tag !== "link") {
        continue;
      }
      const targets = (child.attrs["targets"] ?? "")
        .split(/\s+/).filter(Boolean).map((t) => t.toLowerCase());
      if (groupType.startsWith("coref") && targets.length === 2) {
        corefPairs.push([targets[0], targets[1]]);
      } else if (groupType === "bridge" && targets.length === 2) {
        bridges.push({
          source: targets[0],
          target: targets[1],
          name: child.attrs["name"] ?? "",
        });
      } else if (groupType === "relation" && targets.length === 2) {
        relations.push({
          id: (child.attrs["id"] ?? "").toLowerCase(),
          targets: [targets[0], targets[1]],
          nuclei: (child.attrs["nuclei"] ?? "")
            .split(/\s+/).filter(Boolean).map((t) => t.toLowerCase()),
          name: child.attrs["subtype"],
        });
      }
    }
  });

  return {
    text: textContent(root),
    units,
    rs,
    names,
    corefPairs,
    bridges,
    relations,
  };
}

// ---------------------------------------------------------------------
// Digest: a canonical JSON value equal for any id-renaming of the same
// annotation.


type SpanKey = string;

function spanKey(span: SpanModel): SpanKey {
  return `${span.unitIndex}:${span.start}:${span.end}:${span.text}`;
}

function chainPartition(model: DocumentModel): SpanKey[][] {
  const keyOf = new Map<string, SpanKey>();
  for (const span of model.rs) {
    keyOf.set(span.id, spanKey(span));
  }
  const parent = new Map<SpanKey, SpanKey>();
  const find = (key: SpanKey): SpanKey => {
    let current = key;
    while ((parent.get(current) ?? current) !== current) {
      current = parent.get(current)!;
    }
    return current;
  };
  for (const span of model.rs) {
    parent.set(spanKey(span), spanKey(span));
  }
  for (const [source, target] of model.corefPairs) {
    const a = keyOf.get(source);
    const b = keyOf.get(target);
    if (!a || !b) {
      continue;
    }
    const ra = find(a);
    const rb = find(b);
    if (ra !== rb) {
      parent.set(ra, rb);
    }
  }
  const groups = new Map<SpanKey, SpanKey[]>();
  for (const span of model.rs) {
    const root = find(spanKey(span));
    const group = groups.get(root) ?? [];
    group.push(spanKey(span));
    groups.set(root, group);
  }
  return [...groups.values()]
    .map((group) => group.sort())
    .sort((a, b) => a[0].localeCompare(b[0]));
}

type TreeSig =
  | number
  | { nuclei: [boolean, boolean]; name: string; children: [TreeSig, TreeSig] };

function treeSignature(model: DocumentModel): TreeSig | null {
  const byId = new Map(model.relations.map((r) => [r.id, r]));
  const referenced = new Set<string>();
  for (const relation of model.relations) {
    for (const target of relation.targets) {
      referenced.add(target);
    }
  }
  const roots = model.relations.filter((r) => !referenced.has(r.id));
  if (roots.length !== 1) {
    return null;
  }
  const unitIndex = new Map(model.units.map((u) => [u.id, u.index]));

  const leftmost = (key: string): number => {
    const relation = byId.get(key);
    if (!relation) {
      return unitIndex.get(key) ?? Number.MAX_SAFE_INTEGER;
    }
    return Math.min(...relation.targets.map(leftmost));
  };

  const signature = (key: string): TreeSig => {
    const relation = byId.get(key);
    if (!relation) {
      return unitIndex.get(key) ?? -1;
    }
    const ordered = [...relation.targets].sort((a, b) => leftmost(a) - leftmost(b));
    const nuclei = ordered.map((t) => relation.nuclei.includes(t)) as [boolean, boolean];
    return {
      nuclei,
      name: relation.name ?? "",
      children: [signature(ordered[0]), signature(ordered[1])],
    };
  };
  return signature(roots[0].id);
}

export interface Digest {
  units: string[];
  rs: SpanKey[];
  names: string[];
  chains: SpanKey[][];
  bridges: string[];
  tree: TreeSig | null;
}

/** Canonical content digest; equal digests mean equivalent annotation
 * up to renaming of identifiers and regrouping of link groups. */
export function digest(model: DocumentModel): Digest {
  return {
    units: model.units.map((u) => u.text),
    rs: model.rs.map(spanKey).sort(),
    names: model.names
      .map((n) => `${spanKey(n)}:${n.key ?? ""}`)
      .sort(),
    chains: chainPartition(model),
    bridges: model.bridges
      .map((b) => {
        const source = model.rs.find((s) => s.id === b.source);
        const target = model.rs.find((s) => s.id === b.target);
        return `${source ? spanKey(source) : b.source}->` +
          `${target ? spanKey(target) : b.target}:${b.name}`;
      })
      .sort(),
    tree: treeSignature(model),
  };
}

export function digestsEqual(a: Digest, b: Digest): boolean {
  return JSON.stringify(a) === JSON.stringify(b);
}
