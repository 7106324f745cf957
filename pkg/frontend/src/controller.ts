/** Orchestrates the annotate / submit / retrain loop against the API. */

import { ApiClient, ApiError, type LabelPayload } from "./api.js";
import { renderHistoryChart } from "./chart.js";
import {
  type WorkbenchState,
  agreementLoaded,
  assignLevel,
  batchLoaded,
  initialState,
  isBatchComplete,
  labelsSubmitted,
  noteMessage,
  poolExhausted,
  retrainRecorded,
  submitFailed,
  toggleScores,
  withHistory,
} from "./state.js";
import {
  type KeyValueStore,
  clearPending,
  loadPending,
  savePending,
} from "./storage.js";

export interface WorkbenchOptions {
  sessionId: string;
  api: ApiClient;
  store: KeyValueStore;
  annotator?: string;
  batchSize?: number;
  onRender?: (state: WorkbenchState) => void;
}

export class Workbench {
  state: WorkbenchState;
  private readonly api: ApiClient;
  private readonly store: KeyValueStore;
  private readonly annotator: string;
  private readonly batchSize: number | undefined;
  private readonly onRender: (state: WorkbenchState) => void;

  constructor(options: WorkbenchOptions) {
    this.api = options.api;
    this.store = options.store;
    this.annotator = options.annotator ?? "annotator";
    this.batchSize = options.batchSize;
    this.onRender = options.onRender ?? (() => undefined);
    this.state = initialState(options.sessionId);
  }

  private render(): void {
    this.onRender(this.state);
  }

  async start(): Promise<void> {
    const status = await this.api.status(this.state.sessionId);
    this.state = withHistory(
      this.state,
      status.history.map((row) => ({
        step: row.step,
        size: row.size,
        accuracy: row.mean_accuracy,
        spread: row.spread,
      })),
    );
    await this.refreshAgreement();
    await this.loadBatch();
  }

  async loadBatch(): Promise<void> {
    let payload;
    try {
      payload = await this.api.nextBatch(this.state.sessionId, this.batchSize);
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        this.state = poolExhausted(this.state);
        this.render();
        return;
      }
      throw error;
    }
    const saved = loadPending(this.store, this.state.sessionId);
    this.state = batchLoaded(this.state, payload.batch, payload.cold_start, saved);
    this.render();
  }

  async handleKey(key: string): Promise<void> {
    if (key >= "1" && key <= "5") {
      await this.assign(Number(key));
    } else if (key === "u") {
      this.toggleScoreBadge();
    }
  }

  async assign(level: number): Promise<void> {
    const before = this.state;
    this.state = assignLevel(before, level);
    if (this.state === before) {
      return;
    }
    savePending(this.store, this.state.sessionId, this.state.pending);
    this.render();
    if (isBatchComplete(this.state)) {
      await this.submitPending();
    }
  }

  async retrySubmit(): Promise<void> {
    if (isBatchComplete(this.state)) {
      await this.submitPending();
    }
  }

  private async submitPending(): Promise<void> {
    // only documents actually shown in the current batch may be submitted
    const labels: LabelPayload[] = [];
    for (const item of this.state.batch) {
      const level = this.state.pending[item.id];
      if (level !== undefined) {
        labels.push({ document_id: item.id, level });
      }
    }
    try {
      await this.api.submitLabels(this.state.sessionId, this.annotator, labels);
    } catch (error) {
      const message = error instanceof Error ? error.message : String(error);
      this.state = submitFailed(this.state, message);
      this.render();
      return;
    }
    clearPending(this.store, this.state.sessionId);
    this.state = labelsSubmitted(this.state);
    this.render();
  }

  async retrain(): Promise<void> {
    let summary;
    try {
      summary = await this.api.retrain(this.state.sessionId);
    } catch (error) {
      const message = error instanceof Error ? error.message : String(error);
      this.state = noteMessage(this.state, `retrain rejected: ${message}`);
      this.render();
      return;
    }
    this.state = retrainRecorded(this.state, {
      step: summary.step,
      size: summary.size,
      accuracy: summary.mean_accuracy,
      spread: summary.spread,
    });
    await this.refreshAgreement();
    this.render();
  }

  private async refreshAgreement(): Promise<void> {
    try {
      const payload = await this.api.agreement(this.state.sessionId);
      this.state = agreementLoaded(this.state, {
        kappa: payload.kappa,
        band: payload.band,
        pairs: payload.pairs,
      });
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        this.state = agreementLoaded(this.state, null);
        return;
      }
      throw error;
    }
  }

  toggleScoreBadge(): void {
    this.state = toggleScores(this.state);
    this.render();
  }

  chartSvg(): string {
    return renderHistoryChart(this.state.history);
  }
}
