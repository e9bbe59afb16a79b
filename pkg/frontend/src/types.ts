/** Shapes served by the status API; rendered verbatim, never recomputed. */

export interface TrialCounts {
  running: number;
  succeeded: number;
  failed: number;
  timeout: number;
  done: number;
  total: number;
}

export interface BestInfo {
  objective: number;
  trial_id: number;
  values: Record<string, number | string>;
}

export interface ExperimentSnapshot {
  id: string;
  status: string;
  reason: string | null;
  generation: number;
  trials: TrialCounts;
  concurrency: number;
  tuner: string;
  best: BestInfo | null;
  created_at: number | null;
  finished_at: number | null;
  elapsed: number | null;
}

export interface TrialRow {
  trial_id: number;
  generation: number;
  status: string;
  objective: number | null;
  elapsed: number | null;
  values: Record<string, number | string>;
  failure: string | null;
}

export interface TrialsPage {
  page: number;
  per_page: number;
  total: number;
  trials: TrialRow[];
}

/** [trial index, incumbent objective] pairs; non-increasing by contract. */
export type SeriesPoint = [number, number];
