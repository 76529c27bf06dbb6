/** Client-side canvas state: the rendered snapshot always corresponds
 * to a server version; anything newer is pending until refreshed. */

import { ComparisonPayload, VeinsPayload, ViewResponse } from "./api.js";
import { DocumentModel, modelFromVxd } from "./model.js";

export interface LiveMetrics {
  comparison: ComparisonPayload | null;
  veins: VeinsPayload | null;
  missing: string | null; // PrerequisiteMissing reason, rendered as checklist
}

export class CanvasState {
  sessionId = "";
  version = -1;
  model: DocumentModel | null = null;
  selection: string[] = [];
  metrics: LiveMetrics = { comparison: null, veins: null, missing: null };
  stale = false;
  pendingVersion: number | null = null;

  applyView(view: ViewResponse): void {
    this.sessionId = view.sessionId;
    this.version = view.version;
    this.model = modelFromVxd(view.document);
    this.stale = false;
    this.pendingVersion = null;
    this.pruneSelection();
  }

  markStale(serverVersion?: number): void {
    this.stale = true;
    this.pendingVersion = serverVersion ?? null;
  }

  /** Toggle a node in the two-slot selection used by relate actions. */
  select(nodeId: string): void {
    const id = nodeId.toLowerCase();
    if (this.selection.includes(id)) {
      this.selection = this.selection.filter((s) => s !== id);
      return;
    }
    this.selection = [...this.selection, id].slice(-2);
  }

  clearSelection(): void {
    this.selection = [];
  }

  private pruneSelection(): void {
    if (!this.model) {
      this.selection = [];
      return;
    }
    const known = new Set<string>();
    for (const unit of this.model.units) {
      known.add(unit.id);
    }
    for (const relation of this.model.relations) {
      known.add(relation.id);
    }
    this.selection = this.selection.filter((id) => known.has(id));
  }
}
