/** Typed client for the drag session service. */

export interface Pair {
  handle: [number, number];
  target: [number, number];
}

export interface SessionInfo {
  session_id: string;
  state: string;
  image_png_base64: string;
  image_shape: [number, number, number];
  feature_resolution: number;
  n_layers: number;
  latent_dim: number;
  suggested_pair: Pair | null;
}

export interface SessionConfig {
  learning_rate: number;
  n_pca: number | null;
  w_plus_layers: number;
  stopping_distance?: number;
  max_iterations?: number;
  pairs: Pair[];
}

export interface StepRecord {
  iteration: number;
  motion_loss: number;
  grad_magnitude: number;
  t_opt: number;
  t_track: number;
  mean_distance: number;
  max_distance: number;
}

export interface RunSummary {
  iterations: number;
  converged: boolean;
  t_total: number;
  ssim: number;
  ssim_per_time: number | null;
  [key: string]: unknown;
}

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, init);
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = await response.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      /* non-JSON error body */
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

function post<T>(url: string, body?: unknown): Promise<T> {
  return request<T>(url, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(body ?? {}),
  });
}

export class DragApi {
  constructor(public baseUrl: string) {}

  createSession(seed: number, scenario?: string): Promise<SessionInfo> {
    return post(`${this.baseUrl}/sessions`, { seed, scenario: scenario ?? null });
  }

  configure(sessionId: string, config: SessionConfig) {
    return post<Record<string, unknown>>(
      `${this.baseUrl}/sessions/${sessionId}/config`,
      config,
    );
  }

  getImage(sessionId: string) {
    return request<{
      state: string;
      iteration: number;
      image_png_base64: string;
      pairs: Pair[];
    }>(`${this.baseUrl}/sessions/${sessionId}/image`);
  }

  startRun(sessionId: string) {
    return post<{ state: string }>(`${this.baseUrl}/sessions/${sessionId}/run`);
  }

  step(sessionId: string) {
    return post<{ state: string; record: StepRecord | null; summary: RunSummary | null }>(
      `${this.baseUrl}/sessions/${sessionId}/step`,
    );
  }

  pause(sessionId: string) {
    return post<{ state: string; iteration: number }>(
      `${this.baseUrl}/sessions/${sessionId}/pause`,
    );
  }

  remove(sessionId: string) {
    return request<{ state: string }>(`${this.baseUrl}/sessions/${sessionId}`, {
      method: "DELETE",
    });
  }

  async fetchTrace(sessionId: string): Promise<string[]> {
    const response = await fetch(`${this.baseUrl}/sessions/${sessionId}/trace`);
    if (!response.ok) throw new ApiError(response.status, response.statusText);
    const text = await response.text();
    return text.trim() === "" ? [] : text.trim().split("\n");
  }

  eventsUrl(sessionId: string): string {
    return `${this.baseUrl}/sessions/${sessionId}/events`;
  }
}
