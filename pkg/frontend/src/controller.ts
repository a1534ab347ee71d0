/** Headless console state machine: everything main.ts renders lives here.
 *
 * All session state is server-side; this controller only tracks what the
 * operator is looking at (current session, pending request, local selections)
 * and never caches a stale pending request: after every successful mutation
 * it re-polls before rendering again.
 */

import { ApiClient, ApiError } from "./api.js";
import { isComplete, pairKey, toggleFlip, votesBody } from "./model.js";
import type {
  DatasetInfo,
  MapBody,
  MetricsBody,
  Pending,
  SessionRow,
  StateSummary,
} from "./types.js";

export interface ConsoleState {
  datasets: DatasetInfo[];
  sessions: SessionRow[];
  current: StateSummary | null;
  pending: Pending;
  selections: Map<string, number>;
  flips: Set<number>;
  map: MapBody | null;
  metrics: MetricsBody | null;
  error: string | null;
  busy: boolean;
  consecutiveFailures: number;
}

type Listener = (state: ConsoleState) => void;

export class ConsoleController {
  state: ConsoleState = {
    datasets: [],
    sessions: [],
    current: null,
    pending: null,
    selections: new Map(),
    flips: new Set(),
    map: null,
    metrics: null,
    error: null,
    busy: false,
    consecutiveFailures: 0,
  };

  private listeners: Listener[] = [];

  constructor(public api: ApiClient) {}

  onChange(listener: Listener): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener(this.state);
  }

  private fail(error: unknown): void {
    this.state.error =
      error instanceof ApiError
        ? `${error.status}: ${error.detail}`
        : String(error);
    this.state.consecutiveFailures += 1;
    this.emit();
  }

  private ok(): void {
    this.state.error = null;
    this.state.consecutiveFailures = 0;
  }

  /** Seconds to wait before the next poll; grows after repeated failures. */
  get pollBackoff(): number {
    return Math.min(30, 2 ** this.state.consecutiveFailures);
  }

  async refreshDashboard(): Promise<void> {
    try {
      this.state.datasets = await this.api.listDatasets();
      this.state.sessions = await this.api.listSessions();
      this.ok();
    } catch (error) {
      this.fail(error);
      return;
    }
    this.emit();
  }

  async createSession(
    dataset: string,
    config: Record<string, unknown>,
  ): Promise<void> {
    try {
      const summary = await this.api.createSession(dataset, config);
      this.state.current = summary;
      this.ok();
    } catch (error) {
      this.fail(error);
      return;
    }
    await this.poll();
  }

  async selectSession(id: string): Promise<void> {
    try {
      this.state.current = await this.api.state(id);
      this.ok();
    } catch (error) {
      this.fail(error);
      return;
    }
    await this.poll();
  }

  /** Refresh session state and the pending queue; reconcile local selections. */
  async poll(): Promise<void> {
    const current = this.state.current;
    if (current === null) return;
    try {
      const summary = await this.api.state(current.id);
      const pending = await this.api.pending(current.id);
      this.state.current = summary;
      if (JSON.stringify(pending) !== JSON.stringify(this.state.pending)) {
        // a different request is pending; stale answers must not carry over
        this.state.pending = pending;
        this.state.selections = new Map();
        this.state.flips = new Set();
      }
      this.ok();
    } catch (error) {
      this.fail(error);
      return;
    }
    this.emit();
  }

  selectVote(newLocation: number, opponent: number, preferred: number): void {
    this.state.selections.set(pairKey(newLocation, opponent), preferred);
    this.emit();
  }

  get votesComplete(): boolean {
    return (
      this.state.pending?.type === "votes" &&
      isComplete(this.state.pending, this.state.selections)
    );
  }

  async submitVotes(): Promise<boolean> {
    const pending = this.state.pending;
    const current = this.state.current;
    if (current === null || pending?.type !== "votes") return false;
    let body;
    try {
      body = votesBody(pending, this.state.selections);
    } catch (error) {
      this.fail(error);
      return false;
    }
    this.state.busy = true;
    this.emit();
    try {
      await this.api.submitVotes(current.id, body);
      this.ok();
    } catch (error) {
      this.fail(error);
      return false;
    } finally {
      this.state.busy = false;
    }
    await this.poll();
    return true;
  }

  toggleFlip(logIndex: number): void {
    this.state.flips = toggleFlip(this.state.flips, logIndex);
    this.emit();
  }

  async submitValidation(): Promise<number | null> {
    const current = this.state.current;
    if (current === null || this.state.pending?.type !== "validation") {
      return null;
    }
    this.state.busy = true;
    this.emit();
    let corrections: number;
    try {
      const result = await this.api.validate(current.id, [...this.state.flips]);
      corrections = result.corrections;
      this.ok();
    } catch (error) {
      this.fail(error);
      return null;
    } finally {
      this.state.busy = false;
    }
    await this.poll();
    return corrections;
  }

  async stepSession(): Promise<void> {
    const current = this.state.current;
    if (current === null) return;
    this.state.busy = true;
    this.emit();
    try {
      await this.api.step(current.id);
      this.ok();
    } catch (error) {
      this.fail(error);
      return;
    } finally {
      this.state.busy = false;
    }
    await this.poll();
  }

  async loadMap(): Promise<void> {
    const current = this.state.current;
    if (current === null) return;
    try {
      this.state.map = await this.api.map(current.id);
      this.ok();
    } catch (error) {
      this.fail(error);
      return;
    }
    this.emit();
  }

  async loadMetrics(): Promise<void> {
    const current = this.state.current;
    if (current === null) return;
    try {
      this.state.metrics = await this.api.metrics(current.id);
      this.ok();
    } catch (error) {
      this.fail(error);
      return;
    }
    this.emit();
  }
}
