/** DOM rendering: text pane with unit/rs highlights, tree pane for the
 * current forest, and the live metrics panel. */

import { CanvasState } from "./state.js";
import { DocumentModel } from "./model.js";

export interface Handlers {
  onSegment: (offset: number) => void;
  onSelect: (nodeId: string) => void;
  onHoverUnit: (unitId: string | null) => void;
}

function el(tag: string, className?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

/** Tokens are click targets: clicking a token proposes a unit boundary
 * right after it. */
export function renderTextPane(
  container: HTMLElement,
  state: CanvasState,
  handlers: Handlers,
): void {
  container.replaceChildren();
  const model = state.model;
  if (!model) {
    container.append(el("p", "placeholder", "load a document to begin"));
    return;
  }
  if (state.stale) {
    container.append(el("div", "stale-banner",
      "state is behind the server; refreshing"));
  }
  const pane = el("div", "text-pane");
  const unitsByStart = new Map(model.units.map((u) => [u.start, u]));
  const unitEnds = new Set(model.units.map((u) => u.end));
  let offset = 0;
  let currentUnit: HTMLElement | null = null;
  for (const token of model.text.split(/(?<= )/)) {
    const start = offset;
    offset += token.length;
    const startingUnit = unitsByStart.get(start);
    if (startingUnit) {
      currentUnit = el("span", "unit");
      currentUnit.dataset["unitId"] = startingUnit.id;
      currentUnit.addEventListener("mouseenter", () =>
        handlers.onHoverUnit(startingUnit.id));
      currentUnit.addEventListener("mouseleave", () => handlers.onHoverUnit(null));
      currentUnit.addEventListener("click", (event) => {
        if ((event as MouseEvent).shiftKey) {
          handlers.onSelect(startingUnit.id);
        }
      });
      pane.append(currentUnit);
    }
    const tokenEl = el("span", "token", token);
    tokenEl.dataset["end"] = String(offset);
    tokenEl.addEventListener("dblclick", () => handlers.onSegment(offset));
    (currentUnit ?? pane).append(tokenEl);
    if (unitEnds.has(offset)) {
      currentUnit = null;
    }
  }
  highlightSpans(pane, model);
  container.append(pane);
}

function highlightSpans(pane: HTMLElement, model: DocumentModel): void {
  // rs highlighting is annotation feedback, not structure: mark the
  // containing unit spans with a count badge
  const counts = new Map<string, number>();
  for (const span of model.rs) {
    const unit = model.units[span.unitIndex];
    if (unit) {
      counts.set(unit.id, (counts.get(unit.id) ?? 0) + 1);
    }
  }
  for (const unitEl of pane.querySelectorAll<HTMLElement>(".unit")) {
    const unitId = unitEl.dataset["unitId"] ?? "";
    const count = counts.get(unitId);
    if (count) {
      const badge = el("sup", "rs-count", String(count));
      badge.title = `${count} reference string(s)`;
      unitEl.append(badge);
    }
  }
}

export function renderTreePane(
  container: HTMLElement,
  state: CanvasState,
  handlers: Handlers,
): void {
  container.replaceChildren();
  const model = state.model;
  if (!model) {
    return;
  }
  const referenced = new Set(model.relations.flatMap((r) => r.targets));
  const byId = new Map(model.relations.map((r) => [r.id, r]));

  const renderNode = (key: string): HTMLElement => {
    const relation = byId.get(key);
    if (!relation) {
      const unit = model.units.find((u) => u.id === key);
      const leaf = el("li", "leaf", unit ? unit.id : key);
      attachSelect(leaf, key);
      return leaf;
    }
    const item = el("li", "relation");
    const label = el("span", "relation-label",
      relation.name ? `${relation.id} (${relation.name})` : relation.id);
    attachSelect(label, relation.id);
    item.append(label);
    const list = el("ul");
    relation.targets.forEach((target, index) => {
      const child = renderNode(target);
      // nuclearity glyphs: filled = nucleus, hollow = satellite
      const glyph = relation.nuclei.includes(target) ? "● " : "○ ";
      child.prepend(el("span", "nuclearity", glyph));
      child.classList.add(index === 0 ? "left" : "right");
      list.append(child);
    });
    item.append(list);
    return item;
  };

  const attachSelect = (node: HTMLElement, key: string) => {
    node.addEventListener("click", () => handlers.onSelect(key));
    if (state.selection.includes(key)) {
      node.classList.add("selected");
    }
  };

  const forest = el("ul", "tree-pane");
  for (const relation of model.relations) {
    if (!referenced.has(relation.id)) {
      forest.append(renderNode(relation.id));
    }
  }
  for (const unit of model.units) {
    if (!referenced.has(unit.id)) {
      forest.append(renderNode(unit.id));
    }
  }
  container.append(forest);
}

export function renderMetricsPanel(
  container: HTMLElement,
  state: CanvasState,
  hoveredUnit: string | null,
): void {
  container.replaceChildren();
  const metrics = state.metrics;
  if (metrics.missing && !metrics.comparison) {
    const checklist = el("div", "checklist");
    checklist.append(el("h3", undefined, "still needed"));
    checklist.append(el("p", undefined, metrics.missing));
    container.append(checklist);
  }
  if (metrics.comparison) {
    const table = el("table", "metrics");
    const rows: [string, string][] = [
      ["transitions", String(metrics.comparison.transitions)],
      ["CT score", `${metrics.comparison.ctTotal} (avg ${metrics.comparison.ctAverage})`],
      ["VT score", `${metrics.comparison.vtTotal} (avg ${metrics.comparison.vtAverage})`],
      ["direct references", String(metrics.comparison.references.direct)],
      ["indirect", String(metrics.comparison.references.indirect)],
      ["inaccessible", String(metrics.comparison.references.inaccessible)],
    ];
    for (const [label, value] of rows) {
      const row = el("tr");
      row.append(el("th", undefined, label), el("td", undefined, value));
      table.append(row);
    }
    container.append(table);
  }
  if (metrics.veins && hoveredUnit) {
    for (const tree of metrics.veins.trees) {
      const domain = tree.domains[hoveredUnit];
      if (domain) {
        const line = el("div", "domain-line",
          `domain(${hoveredUnit}) = ${domain.join(" ")}`);
        container.append(line);
        const vein = tree.veins[hoveredUnit];
        if (vein) {
          container.append(el("div", "vein-line",
            `vein(${hoveredUnit}) = ${vein}`));
        }
      }
    }
  }
  if (state.stale) {
    container.append(el("div", "stale-banner", "metrics pending refresh"));
  }
}

/** Highlight the accessibility domain of the hovered unit in the text pane. */
export function applyDomainHighlight(
  textPane: HTMLElement,
  state: CanvasState,
  hoveredUnit: string | null,
): void {
  for (const unitEl of textPane.querySelectorAll<HTMLElement>(".unit")) {
    unitEl.classList.remove("in-domain", "hovered");
  }
  if (!hoveredUnit || !state.metrics.veins) {
    return;
  }
  const domains = state.metrics.veins.trees
    .map((t) => t.domains[hoveredUnit])
    .find((d) => d !== undefined);
  if (!domains) {
    return;
  }
  const inDomain = new Set(domains);
  for (const unitEl of textPane.querySelectorAll<HTMLElement>(".unit")) {
    const unitId = unitEl.dataset["unitId"] ?? "";
    if (inDomain.has(unitId)) {
      unitEl.classList.add(unitId === hoveredUnit ? "hovered" : "in-domain");
    }
  }
}
