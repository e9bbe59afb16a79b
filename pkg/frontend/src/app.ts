import { ApiClient } from "./api.js";
import { canUseLogScale, renderConvergence } from "./chart.js";
import { Poller } from "./poll.js";
import type { ExperimentSnapshot, SeriesPoint } from "./types.js";
import {
  createStopButton,
  renderBestCard,
  renderExperimentTable,
  renderTrialRows,
  showBanner,
  statusBadge,
} from "./views.js";

export interface AppElements {
  banner: HTMLElement;
  table: HTMLElement;
  detail: HTMLElement;
  chart: HTMLElement;
  best: HTMLElement;
  trials: HTMLElement;
  toasts: HTMLElement;
}

/** Single-page operator loop: watch convergence, read the best, stop early. */
export class DashboardApp {
  readonly listPoller: Poller;
  readonly detailPoller: Poller;
  private experiments: ExperimentSnapshot[] = [];
  private selectedId: string | null = null;
  private logScale = false;
  private lastSeries: SeriesPoint[] = [];

  constructor(
    private readonly api: ApiClient,
    private readonly ui: AppElements,
    pollMs = 2000,
  ) {
    this.listPoller = new Poller(() => this.refreshList(), pollMs);
    this.detailPoller = new Poller(() => this.refreshDetail(), pollMs);
  }

  start(): void {
    this.listPoller.start();
  }

  get selected(): ExperimentSnapshot | null {
    return this.experiments.find((e) => e.id === this.selectedId) ?? null;
  }

  async refreshList(): Promise<void> {
    try {
      this.experiments = await this.api.listExperiments();
    } catch (error) {
      // keep the last table; surface the failure
      showBanner(this.ui.banner, `Cannot reach the status API (${String(error)}); retrying.`);
      throw error;
    }
    showBanner(this.ui.banner, null);
    renderExperimentTable(this.ui.table, this.experiments, (id) => this.select(id),
                          this.selectedId);
    if (this.selectedId === null && this.experiments.length > 0) {
      this.select(this.experiments[0].id);
    }
  }

  select(id: string): void {
    if (this.selectedId === id) return;
    this.selectedId = id;
    renderExperimentTable(this.ui.table, this.experiments, (x) => this.select(x), id);
    this.detailPoller.stop();
    this.detailPoller.start();
  }

  toggleLogScale(): void {
    this.logScale = !this.logScale;
    this.renderChart();
  }

  private renderChart(): void {
    const log = this.logScale && canUseLogScale(this.lastSeries);
    renderConvergence(this.ui.chart, this.lastSeries, { log });
  }

  async refreshDetail(): Promise<void> {
    const id = this.selectedId;
    if (id === null) return;
    const [snapshot, series, trialsPage] = await Promise.all([
      this.api.getExperiment(id),
      this.api.getSeries(id),
      this.api.getTrials(id, 1, 50),
    ]);
    if (this.selectedId !== id) return; // selection changed mid-flight
    const index = this.experiments.findIndex((e) => e.id === id);
    if (index >= 0) this.experiments[index] = snapshot;
    this.lastSeries = series;
    this.renderDetailHeader(snapshot);
    this.renderChart();
    renderBestCard(this.ui.best, snapshot.best);
    renderTrialRows(this.ui.trials, trialsPage.trials);
  }

  private renderDetailHeader(snapshot: ExperimentSnapshot): void {
    const host = this.ui.detail;
    host.replaceChildren();
    const title = document.createElement("h2");
    title.textContent = snapshot.id;
    title.appendChild(statusBadge(snapshot.status));
    host.appendChild(title);

    const meta = document.createElement("p");
    meta.className = "detail-meta";
    meta.textContent =
      `${snapshot.tuner} | generation ${snapshot.generation} | ` +
      `${snapshot.trials.done}/${snapshot.trials.total} trials ` +
      `(${snapshot.trials.succeeded} ok, ${snapshot.trials.failed} failed, ` +
      `${snapshot.trials.timeout} timeout)` +
      (snapshot.reason ? ` | ${snapshot.reason}` : "");
    host.appendChild(meta);

    const controls = document.createElement("div");
    controls.className = "detail-controls";
    const logToggle = document.createElement("button");
    logToggle.textContent = this.logScale ? "Linear scale" : "Log scale";
    logToggle.className = "log-toggle";
    logToggle.disabled = !canUseLogScale(this.lastSeries);
    logToggle.addEventListener("click", () => this.toggleLogScale());
    controls.appendChild(logToggle);
    if (snapshot.status === "running") {
      controls.appendChild(
        createStopButton(this.api, snapshot.id, this.ui.toasts, {
          onResult: () => void this.detailPoller.runOnce(),
        }),
      );
    }
    host.appendChild(controls);
  }
}

export function mount(root: Document = document): DashboardApp {
  const byId = (id: string): HTMLElement => {
    const node = root.getElementById(id);
    if (!node) throw new Error(`missing #${id}`);
    return node;
  };
  const app = new DashboardApp(new ApiClient(""), {
    banner: byId("banner"),
    table: byId("experiments"),
    detail: byId("detail"),
    chart: byId("chart"),
    best: byId("best"),
    trials: byId("trials"),
    toasts: byId("toasts"),
  });
  app.start();
  return app;
}
