/** Test doubles built from the API's committed golden responses, so the
 * dashboard is exercised against exactly what the backend serves. */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import type { ExperimentSnapshot, SeriesPoint, TrialsPage } from "../src/types.js";

const GOLDEN = join(dirname(fileURLToPath(import.meta.url)), "..", "..", "tests", "golden");

function golden<T>(name: string): T {
  return JSON.parse(readFileSync(join(GOLDEN, name), "utf-8")) as T;
}

export const experimentsFixture = golden<ExperimentSnapshot[]>("experiments.json");
export const finishedFixture = golden<ExperimentSnapshot>("experiment_finished.json");
export const seriesFixture = golden<{ series: SeriesPoint[] }>("series.json").series;
export const trialsFixture = golden<TrialsPage>("trials_page1.json");
export const bestFixture = finishedFixture.best!;

type Handler = (url: string, init?: RequestInit) => { status: number; body?: unknown };

/** Install a fetch stub; returns the request log for assertions. */
export function stubFetch(handler: Handler): Array<{ url: string; method: string }> {
  const calls: Array<{ url: string; method: string }> = [];
  globalThis.fetch = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = String(input);
    calls.push({ url, method: init?.method ?? "GET" });
    const result = handler(url, init);
    return new Response(
      result.body === undefined ? null : JSON.stringify(result.body),
      { status: result.status, headers: { "content-type": "application/json" } },
    );
  }) as typeof fetch;
  return calls;
}

/** Serve the fixture API: list, detail, series, trials for fixture-finished. */
export function fixtureApiHandler(stopStatus = 200): Handler {
  return (url, init) => {
    if (init?.method === "POST" && url.endsWith("/stop")) {
      return stopStatus === 200
        ? { status: 200, body: { status: "stopping" } }
        : { status: stopStatus, body: { detail: "experiment is finished, not running" } };
    }
    if (url.endsWith("/api/experiments")) return { status: 200, body: experimentsFixture };
    if (url.includes("/trials")) return { status: 200, body: trialsFixture };
    if (url.endsWith("/series")) return { status: 200, body: { series: seriesFixture } };
    if (url.includes("/api/experiments/fixture-finished")) {
      return { status: 200, body: finishedFixture };
    }
    return { status: 404, body: { detail: "unknown" } };
  };
}
