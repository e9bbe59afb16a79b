/** Polling loop with overlap deduplication and failure backoff.
 *
 * One tick runs at a time: if a refresh is still in flight when the timer
 * fires, that tick is skipped rather than stacked. Failures grow the
 * interval exponentially up to maxMs; a success resets it.
 */
export class Poller {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private inFlight = false;
  private currentInterval: number;
  private stopped = true;

  constructor(
    private readonly tick: () => Promise<void>,
    private readonly intervalMs = 2000,
    private readonly maxMs = 30_000,
  ) {
    this.currentInterval = intervalMs;
  }

  start(): void {
    if (!this.stopped) return;
    this.stopped = false;
    void this.runOnce();
  }

  stop(): void {
    this.stopped = true;
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
  }

  /** Run a tick immediately (deduplicated against an in-flight one). */
  async runOnce(): Promise<void> {
    if (this.inFlight) return;
    this.inFlight = true;
    try {
      await this.tick();
      this.currentInterval = this.intervalMs;
    } catch {
      this.currentInterval = Math.min(this.currentInterval * 2, this.maxMs);
    } finally {
      this.inFlight = false;
    }
    if (!this.stopped) {
      this.timer = setTimeout(() => void this.runOnce(), this.currentInterval);
    }
  }

  get interval(): number {
    return this.currentInterval;
  }
}
