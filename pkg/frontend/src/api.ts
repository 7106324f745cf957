/** Thin typed client for the /api/v1 annotation endpoints. */

import type { BatchItem } from "./state.js";

export interface JsonResponse {
  readonly ok: boolean;
  readonly status: number;
  json(): Promise<unknown>;
}

export interface FetchInit {
  method?: string;
  headers?: Record<string, string>;
  body?: string;
}

export type FetchLike = (url: string, init?: FetchInit) => Promise<JsonResponse>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export interface BatchPayload {
  readonly batch: readonly BatchItem[];
  readonly cold_start: boolean;
  readonly truncated: boolean;
}

export interface LabelPayload {
  readonly document_id: string;
  readonly level: number;
}

export interface RetrainPayload {
  readonly step: number;
  readonly size: number;
  readonly mean_accuracy: number;
  readonly spread: number;
}

export interface StatusPayload {
  readonly history: readonly RetrainPayload[];
  readonly labeled_size: number;
  readonly pool_size: number;
  readonly double_labeled: number;
}

export interface AgreementPayload {
  readonly kappa: number;
  readonly band: string;
  readonly pairs: number;
}

export class ApiClient {
  constructor(
    private readonly fetchFn: FetchLike,
    private readonly base = "",
  ) {}

  private async request(method: string, path: string, body?: unknown): Promise<unknown> {
    const init: FetchInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(`${this.base}/api/v1${path}`, init);
    const payload = (await response.json()) as Record<string, unknown>;
    if (!response.ok) {
      throw new ApiError(
        response.status,
        typeof payload.error === "string" ? payload.error : "unknown",
        typeof payload.message === "string" ? payload.message : "request failed",
      );
    }
    return payload;
  }

  async nextBatch(sessionId: string, k?: number): Promise<BatchPayload> {
    const query = k === undefined ? "" : `?k=${k}`;
    const raw = (await this.request(
      "GET",
      `/sessions/${sessionId}/batch${query}`,
    )) as Record<string, unknown>;
    return {
      batch: (raw.batch as BatchItem[]) ?? [],
      cold_start: Boolean(raw.cold_start),
      truncated: Boolean(raw.truncated),
    };
  }

  async submitLabels(
    sessionId: string,
    annotator: string,
    labels: readonly LabelPayload[],
  ): Promise<void> {
    await this.request("POST", `/sessions/${sessionId}/labels`, {
      annotator,
      labels,
    });
  }

  async retrain(sessionId: string): Promise<RetrainPayload> {
    return (await this.request(
      "POST",
      `/sessions/${sessionId}/retrain`,
    )) as RetrainPayload;
  }

  async status(sessionId: string): Promise<StatusPayload> {
    return (await this.request(
      "GET",
      `/sessions/${sessionId}/status`,
    )) as StatusPayload;
  }

  async agreement(sessionId: string): Promise<AgreementPayload> {
    return (await this.request(
      "GET",
      `/sessions/${sessionId}/agreement`,
    )) as AgreementPayload;
  }
}
