import type { ExperimentSnapshot, SeriesPoint, TrialsPage } from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export interface StopResult {
  stopped: boolean;
  /** true when the server answered 409 (experiment no longer running) */
  conflict: boolean;
}

async function getJson<T>(url: string): Promise<T> {
  const response = await fetch(url);
  if (!response.ok) {
    throw new ApiError(response.status, `GET ${url} -> ${response.status}`);
  }
  return (await response.json()) as T;
}

/** Thin client over the status endpoints; POST /stop is the only mutation. */
export class ApiClient {
  constructor(private readonly base: string = "") {}

  listExperiments(): Promise<ExperimentSnapshot[]> {
    return getJson(`${this.base}/api/experiments`);
  }

  getExperiment(id: string): Promise<ExperimentSnapshot> {
    return getJson(`${this.base}/api/experiments/${encodeURIComponent(id)}`);
  }

  getTrials(id: string, page = 1, perPage = 100): Promise<TrialsPage> {
    return getJson(
      `${this.base}/api/experiments/${encodeURIComponent(id)}/trials?page=${page}&per_page=${perPage}`,
    );
  }

  async getSeries(id: string): Promise<SeriesPoint[]> {
    const body = await getJson<{ series: SeriesPoint[] }>(
      `${this.base}/api/experiments/${encodeURIComponent(id)}/series`,
    );
    return body.series;
  }

  async stop(id: string): Promise<StopResult> {
    const response = await fetch(
      `${this.base}/api/experiments/${encodeURIComponent(id)}/stop`,
      { method: "POST" },
    );
    if (response.ok) return { stopped: true, conflict: false };
    if (response.status === 409) return { stopped: false, conflict: true };
    throw new ApiError(response.status, `stop ${id} -> ${response.status}`);
  }
}
