/** Browser entry point: wires the panes to the annotation service. */

import { Client } from "./api.js";
import {
  actionLinkBridge,
  actionLinkCoref,
  actionMarkName,
  actionMarkRs,
  actionRelate,
  actionSegment,
  refresh,
  submitEdit,
} from "./actions.js";
import { CanvasState } from "./state.js";
import {
  applyDomainHighlight,
  renderMetricsPanel,
  renderTextPane,
  renderTreePane,
} from "./render.js";

const client = new Client(
  (window as { VEINTEX_BASE_URL?: string }).VEINTEX_BASE_URL ?? "");
const state = new CanvasState();
let hoveredUnit: string | null = null;

const byId = (id: string) => document.getElementById(id) as HTMLElement;

function showError(message: string): void {
  const box = byId("error-box");
  box.textContent = message;
  box.classList.toggle("hidden", message === "");
}

function renderAll(): void {
  const textPane = byId("text-pane");
  renderTextPane(textPane, state, handlers);
  renderTreePane(byId("tree-pane"), state, handlers);
  renderMetricsPanel(byId("metrics-pane"), state, hoveredUnit);
  applyDomainHighlight(textPane, state, hoveredUnit);
  byId("version-label").textContent =
    state.version >= 0 ? `version ${state.version}${state.stale ? " (stale)" : ""}` : "";
}

async function perform(build: () => Parameters<typeof submitEdit>[2]): Promise<void> {
  try {
    showError("");
    const edit = build();
    await submitEdit(client, state, edit);
    await refresh(client, state);
  } catch (error) {
    showError(error instanceof Error ? error.message : String(error));
    try {
      await refresh(client, state);
    } catch {
      // keep the original error visible
    }
  }
  renderAll();
}

const handlers = {
  onSegment: (offset: number) => {
    void perform(() => actionSegment(state, offset));
  },
  onSelect: (nodeId: string) => {
    state.select(nodeId);
    renderAll();
  },
  onHoverUnit: (unitId: string | null) => {
    hoveredUnit = unitId;
    renderMetricsPanel(byId("metrics-pane"), state, hoveredUnit);
    applyDomainHighlight(byId("text-pane"), state, hoveredUnit);
  },
};

function selectionOffsets(): { start: number; end: number } | null {
  const selection = window.getSelection();
  if (!selection || selection.isCollapsed || selection.rangeCount === 0) {
    return null;
  }
  const range = selection.getRangeAt(0);
  const offsetOf = (node: Node, within: number): number | null => {
    const tokenEl = (node instanceof Element ? node : node.parentElement)
      ?.closest<HTMLElement>(".token");
    if (!tokenEl || !tokenEl.dataset["end"]) {
      return null;
    }
    const end = Number(tokenEl.dataset["end"]);
    const length = tokenEl.textContent?.length ?? 0;
    return end - length + within;
  };
  const start = offsetOf(range.startContainer, range.startOffset);
  const end = offsetOf(range.endContainer, range.endOffset);
  if (start === null || end === null || start >= end) {
    return null;
  }
  return { start, end };
}

function wireToolbar(): void {
  byId("open-button").addEventListener("click", () => {
    void (async () => {
      try {
        showError("");
        const hubText = (byId("hub-input") as HTMLTextAreaElement).value;
        const created = await client.openSession(hubText);
        state.sessionId = created.sessionId;
        state.version = created.version;
        await refresh(client, state);
      } catch (error) {
        showError(error instanceof Error ? error.message : String(error));
      }
      renderAll();
    })();
  });

  byId("mark-rs-button").addEventListener("click", () => {
    const offsets = selectionOffsets();
    if (!offsets) {
      showError("select a text range first");
      return;
    }
    void perform(() => actionMarkRs(offsets.start, offsets.end));
  });

  byId("mark-name-button").addEventListener("click", () => {
    const offsets = selectionOffsets();
    if (!offsets) {
      showError("select a text range first");
      return;
    }
    const key = prompt("canonical key for this name") ?? "";
    void perform(() => actionMarkName(offsets.start, offsets.end, key));
  });

  byId("coref-button").addEventListener("click", () => {
    const source = (byId("coref-source") as HTMLInputElement).value.trim();
    const target = (byId("coref-target") as HTMLInputElement).value.trim();
    void perform(() => actionLinkCoref(source, target));
  });

  byId("bridge-button").addEventListener("click", () => {
    const source = (byId("coref-source") as HTMLInputElement).value.trim();
    const target = (byId("coref-target") as HTMLInputElement).value.trim();
    const name = prompt("bridge relation name (e.g. POSS)") ?? "";
    void perform(() => actionLinkBridge(source, target, name));
  });

  byId("relate-button").addEventListener("click", () => {
    const first = (byId("nuclear-first") as HTMLInputElement).checked;
    const second = (byId("nuclear-second") as HTMLInputElement).checked;
    const name = (byId("relation-name") as HTMLInputElement).value.trim();
    void perform(() => actionRelate(state, { first, second }, name || undefined));
    state.clearSelection();
  });
}

wireToolbar();
renderAll();
