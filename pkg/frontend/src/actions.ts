/** UI actions, each mapping to exactly one edit request. */

import { ApiError, Client, Edit, EditAccepted } from "./api.js";
import { CanvasState } from "./state.js";

/** Segment the text: a click lands a unit boundary at the offset. */
export function actionSegment(state: CanvasState, clickOffset: number): Edit {
  if (!state.model) {
    throw new Error("no document loaded");
  }
  if (clickOffset <= 0 || clickOffset > state.model.text.length) {
    throw new Error(`offset ${clickOffset} outside the text`);
  }
  for (const span of state.model.rs) {
    const unit = state.model.units[span.unitIndex];
    const start = (unit ? unit.start : 0) + span.start;
    const end = (unit ? unit.start : 0) + span.end;
    if (clickOffset > start && clickOffset < end) {
      throw new Error(`offset ${clickOffset} falls inside rs ${span.id}`);
    }
  }
  return { kind: "markUnitBoundary", offset: clickOffset };
}

export function actionMarkRs(start: number, end: number, type = "person"): Edit {
  return { kind: "markRS", start, end, type };
}

export function actionMarkName(
  start: number,
  end: number,
  key: string,
  type = "person",
): Edit {
  return { kind: "markName", start, end, key, type };
}

export function actionLinkCoref(source: string, target: string): Edit {
  return { kind: "linkCoref", source, target };
}

export function actionLinkBridge(source: string, target: string, name: string): Edit {
  return { kind: "linkBridge", source, target, name };
}

export interface NucleiChoice {
  first: boolean;
  second: boolean;
}

/** Relate the two selected roots/leaves; nuclei flags pick the nucleus
 * side(s).  The server rejects non-adjacent spans with SpanMismatch. */
export function actionRelate(
  state: CanvasState,
  nucleiChoice: NucleiChoice,
  relationName?: string,
): Edit {
  if (state.selection.length !== 2) {
    throw new Error("select exactly two nodes to relate");
  }
  if (!nucleiChoice.first && !nucleiChoice.second) {
    throw new Error("at least one side must be nuclear");
  }
  const [first, second] = state.selection;
  const nuclei: string[] = [];
  if (nucleiChoice.first) {
    nuclei.push(first);
  }
  if (nucleiChoice.second) {
    nuclei.push(second);
  }
  const edit: Edit = {
    kind: "createRelation",
    targetA: first,
    targetB: second,
    nuclei,
  };
  if (relationName) {
    edit["name"] = relationName;
  }
  return edit;
}

/** Submit an edit with the state's version; on a version conflict,
 * refresh once and retry, per the optimistic-retry model. */
export async function submitEdit(
  client: Client,
  state: CanvasState,
  edit: Edit,
): Promise<EditAccepted> {
  try {
    return await client.applyEdit(state.sessionId, state.version, edit);
  } catch (error) {
    if (error instanceof ApiError && error.isStale) {
      state.markStale(error.currentVersion);
      state.applyView(await client.getView(state.sessionId));
      return await client.applyEdit(state.sessionId, state.version, edit);
    }
    throw error;
  }
}

/** Refresh the rendered document and the live metrics panel. */
export async function refresh(client: Client, state: CanvasState): Promise<void> {
  state.applyView(await client.getView(state.sessionId));
  state.metrics = { comparison: null, veins: null, missing: null };
  try {
    state.metrics.veins = await client.getVeins(state.sessionId);
  } catch (error) {
    if (!(error instanceof ApiError && error.isPrerequisite)) {
      throw error;
    }
    state.metrics.missing = error.detail;
  }
  try {
    state.metrics.comparison = await client.getComparison(state.sessionId);
  } catch (error) {
    if (!(error instanceof ApiError && error.isPrerequisite)) {
      throw error;
    }
    state.metrics.missing = state.metrics.missing ?? error.detail;
  }
}
