import type { ApiClient } from "./api.js";
import type { BestInfo, ExperimentSnapshot, TrialRow } from "./types.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function statusBadge(status: string): HTMLElement {
  return el("span", `badge badge-${status}`, status);
}

/** Experiment list table; every number comes verbatim from the snapshot. */
export function renderExperimentTable(
  container: HTMLElement,
  experiments: ExperimentSnapshot[],
  onSelect: (id: string) => void,
  selectedId: string | null = null,
): void {
  container.replaceChildren();
  if (experiments.length === 0) {
    container.appendChild(el("p", "empty-state", "No experiments in the journal directory."));
    return;
  }
  const table = el("table", "experiment-table");
  const head = el("thead");
  const headRow = el("tr");
  for (const title of ["id", "status", "tuner", "gen", "done", "total", "best"]) {
    headRow.appendChild(el("th", undefined, title));
  }
  head.appendChild(headRow);
  table.appendChild(head);
  const body = el("tbody");
  for (const exp of experiments) {
    const row = el("tr", exp.id === selectedId ? "selected" : undefined);
    row.dataset.id = exp.id;
    row.appendChild(el("td", "mono", exp.id));
    const statusCell = el("td");
    statusCell.appendChild(statusBadge(exp.status));
    row.appendChild(statusCell);
    row.appendChild(el("td", undefined, exp.tuner));
    row.appendChild(el("td", "num", String(exp.generation)));
    row.appendChild(el("td", "num", String(exp.trials.done)));
    row.appendChild(el("td", "num", String(exp.trials.total)));
    row.appendChild(el("td", "num", exp.best === null ? "-" : String(exp.best.objective)));
    row.addEventListener("click", () => onSelect(exp.id));
    body.appendChild(row);
  }
  table.appendChild(body);
  container.appendChild(table);
}

/** Best-configuration card: parameter values exactly as the API reports them. */
export function renderBestCard(container: HTMLElement, best: BestInfo | null): void {
  container.replaceChildren();
  const heading = el("h3", undefined, "Best configuration");
  container.appendChild(heading);
  if (best === null) {
    container.appendChild(el("p", "empty-state", "No successful trial yet."));
    return;
  }
  container.appendChild(
    el("p", "best-objective", `objective ${best.objective} (trial ${best.trial_id})`),
  );
  const list = el("dl", "config-list");
  for (const [name, value] of Object.entries(best.values)) {
    list.appendChild(el("dt", undefined, name));
    list.appendChild(el("dd", "mono", String(value)));
  }
  container.appendChild(list);
}

export function renderTrialRows(container: HTMLElement, trials: TrialRow[]): void {
  container.replaceChildren();
  if (trials.length === 0) {
    container.appendChild(el("p", "empty-state", "No trials recorded yet."));
    return;
  }
  const table = el("table", "trial-table");
  const head = el("tr");
  for (const title of ["trial", "gen", "status", "objective", "elapsed (s)"]) {
    head.appendChild(el("th", undefined, title));
  }
  table.appendChild(head);
  for (const trial of trials) {
    const row = el("tr");
    row.appendChild(el("td", "num", String(trial.trial_id)));
    row.appendChild(el("td", "num", String(trial.generation)));
    const statusCell = el("td");
    statusCell.appendChild(statusBadge(trial.status));
    row.appendChild(statusCell);
    row.appendChild(el("td", "num", trial.objective === null ? "-" : String(trial.objective)));
    row.appendChild(el("td", "num", trial.elapsed === null ? "-" : trial.elapsed.toFixed(3)));
    table.appendChild(row);
  }
  container.appendChild(table);
}

export function showBanner(container: HTMLElement, message: string | null): void {
  container.replaceChildren();
  if (message === null) return;
  container.appendChild(el("div", "error-banner", message));
}

export function showToast(container: HTMLElement, message: string): void {
  const toast = el("div", "toast", message);
  container.appendChild(toast);
  setTimeout(() => toast.remove(), 4000);
}

export interface StopButtonHooks {
  /** confirmation dialog; injectable for tests (defaults to window.confirm) */
  confirm?: (message: string) => boolean;
  onResult?: (outcome: "stopped" | "conflict" | "error") => void;
}

/** Stop control: confirm, single POST, disabled while pending and after success. */
export function createStopButton(
  api: ApiClient,
  experimentId: string,
  toastHost: HTMLElement,
  hooks: StopButtonHooks = {},
): HTMLButtonElement {
  const confirmFn = hooks.confirm ?? ((msg: string) => window.confirm(msg));
  const button = el("button", "stop-button", "Stop experiment");
  button.addEventListener("click", () => {
    if (button.disabled) return;
    if (!confirmFn(`Stop experiment ${experimentId}? In-flight trials will finish.`)) {
      return;
    }
    button.disabled = true;
    void api
      .stop(experimentId)
      .then((result) => {
        if (result.stopped) {
          button.textContent = "Stopping...";
          showToast(toastHost, `Stop requested for ${experimentId}.`);
          hooks.onResult?.("stopped");
        } else {
          button.textContent = "Not running";
          showToast(toastHost, `${experimentId} is already stopped.`);
          hooks.onResult?.("conflict");
        }
      })
      .catch(() => {
        button.disabled = false; // allow retrying transient failures
        showToast(toastHost, `Stop request for ${experimentId} failed.`);
        hooks.onResult?.("error");
      });
  });
  return button;
}
