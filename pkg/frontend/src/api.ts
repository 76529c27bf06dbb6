/** Typed client for the veintex annotation service. */

export interface SessionCreated {
  sessionId: string;
  version: number;
  activeView: string;
}

export interface ViewResponse {
  sessionId: string;
  version: number;
  viewId: string;
  document: string;
}

export interface EditAccepted {
  version: number;
  created: string[];
  modified: string[];
  deleted: string[];
  summary: string;
}

export interface ReferenceCounts {
  direct: number;
  indirect: number;
  inaccessible: number;
}

export interface ComparisonPayload {
  kind: "comparison";
  transitions: number;
  ctTotal: number;
  ctAverage: string;
  vtTotal: number;
  vtAverage: string;
  references: ReferenceCounts;
}

export interface VeinsTreePayload {
  root: string;
  unitCount: number;
  partial: boolean;
  heads: Record<string, string>;
  veins: Record<string, string>;
  domains: Record<string, string[]>;
}

export interface VeinsPayload {
  kind: "veins";
  partial: boolean;
  trees: VeinsTreePayload[];
}

export type Edit = Record<string, unknown> & { kind: string };

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly errorName: string,
    readonly detail: string,
    readonly currentVersion?: number,
  ) {
    super(`${errorName}: ${detail}`);
  }

  get isStale(): boolean {
    return this.status === 409;
  }

  get isPrerequisite(): boolean {
    return this.status === 422 && this.errorName === "PrerequisiteMissing";
  }
}

async function decodeError(response: Response): Promise<never> {
  let name = `HTTP ${response.status}`;
  let detail = response.statusText;
  let currentVersion: number | undefined;
  try {
    const body = await response.json();
    name = body.error ?? name;
    detail = body.detail ?? JSON.stringify(body);
    currentVersion = body.currentVersion;
  } catch {
    // non-JSON error body: keep the status text
  }
  throw new ApiError(response.status, name, detail, currentVersion);
}

export class Client {
  constructor(readonly baseUrl: string) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      headers: { "content-type": "application/json" },
      ...init,
    });
    if (!response.ok) {
      await decodeError(response);
    }
    return (await response.json()) as T;
  }

  health(): Promise<{ status: string; sessions: number }> {
    return this.request("/health");
  }

  openSession(hub: string, plainText?: boolean): Promise<SessionCreated> {
    return this.request("/sessions", {
      method: "POST",
      body: JSON.stringify({ hub, plainText: plainText ?? null }),
    });
  }

  getView(sessionId: string, view?: string): Promise<ViewResponse> {
    const query = view ? `?view=${encodeURIComponent(view)}` : "";
    return this.request(`/sessions/${sessionId}/view${query}`);
  }

  applyEdit(sessionId: string, version: number, edit: Edit): Promise<EditAccepted> {
    return this.request(`/sessions/${sessionId}/edits`, {
      method: "POST",
      body: JSON.stringify({ version, edit }),
    });
  }

  getComparison(sessionId: string): Promise<ComparisonPayload> {
    return this.request(`/sessions/${sessionId}/analysis?kind=comparison`);
  }

  getVeins(sessionId: string): Promise<VeinsPayload> {
    return this.request(`/sessions/${sessionId}/analysis?kind=veins`);
  }
}
