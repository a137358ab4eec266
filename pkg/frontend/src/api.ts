// Thin fetch wrapper over the server endpoints. Error bodies are
// {error, detail}; both plus the HTTP status travel on ApiError.

import type { IterationRequest, ResponseEntry } from "./protocol";

export interface LauncherSummary {
  id: string;
  label: string;
  icon?: string;
}

export interface AppSummary {
  appId: string;
  name: string;
  version: number;
  launchers: LauncherSummary[];
}

export interface StepOutcome {
  instanceId?: number;
  status: string;
  request?: IterationRequest;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly error: string,
    readonly detail: string,
  ) {
    super(`[${status} ${error}] ${detail}`);
    this.name = "ApiError";
  }
}

async function unwrap(response: Response): Promise<any> {
  if (response.ok) return response.json();
  let error = "HttpError";
  let detail = response.statusText;
  try {
    const body = await response.json();
    error = body.error ?? error;
    detail = body.detail ?? detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(response.status, error, detail);
}

export class Api {
  constructor(private readonly base: string = "") {}

  fetchApp(appId: string): Promise<AppSummary> {
    return fetch(`${this.base}/apps/${appId}`).then(unwrap);
  }

  launch(appId: string, launcherId: string): Promise<StepOutcome> {
    return fetch(`${this.base}/apps/${appId}/launchers/${launcherId}/launch`, {
      method: "POST",
    }).then(unwrap);
  }

  respond(instanceId: number, entries: ResponseEntry[]): Promise<StepOutcome> {
    return fetch(`${this.base}/instances/${instanceId}/response`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ instanceId, response: entries }),
    }).then(unwrap);
  }

  pollVersion(
    appId: string,
    since: number,
    timeoutMs: number,
  ): Promise<number> {
    const query = `since=${since}&timeoutMs=${timeoutMs}`;
    return fetch(`${this.base}/apps/${appId}/version?${query}`)
      .then(unwrap)
      .then((body) => body.version as number);
  }
}
