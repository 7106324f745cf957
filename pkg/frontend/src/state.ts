/**
 * Pure workbench state and transitions.
 *
 * Everything here is a plain function of its inputs so the view can be
 * reproduced exactly from (server responses, locally pending labels).
 */

export interface BatchItem {
  readonly id: string;
  readonly text: string;
  readonly score: number;
}

export interface HistoryPoint {
  readonly step: number;
  readonly size: number;
  readonly accuracy: number;
  readonly spread: number;
}

export interface AgreementView {
  readonly kappa: number;
  readonly band: string;
  readonly pairs: number;
}

export type Connection = "idle" | "ready" | "error" | "complete";

export interface WorkbenchState {
  readonly sessionId: string;
  readonly batch: readonly BatchItem[];
  readonly coldStart: boolean;
  readonly position: number;
  readonly pending: Readonly<Record<string, number>>;
  readonly history: readonly HistoryPoint[];
  readonly agreement: AgreementView | null;
  readonly connection: Connection;
  readonly message: string;
  readonly showScores: boolean;
}

export const LEVELS = [1, 2, 3, 4, 5] as const;

export function initialState(sessionId: string): WorkbenchState {
  return {
    sessionId,
    batch: [],
    coldStart: false,
    position: 0,
    pending: {},
    history: [],
    agreement: null,
    connection: "idle",
    message: "",
    showScores: true,
  };
}

export function withHistory(
  state: WorkbenchState,
  points: readonly HistoryPoint[],
): WorkbenchState {
  return { ...state, history: [...points] };
}

/** Install a fresh batch; saved labels for other batches are discarded. */
export function batchLoaded(
  state: WorkbenchState,
  batch: readonly BatchItem[],
  coldStart: boolean,
  savedPending: Readonly<Record<string, number>> = {},
): WorkbenchState {
  const pending: Record<string, number> = {};
  for (const item of batch) {
    const level = savedPending[item.id];
    if (level !== undefined && Number.isInteger(level) && level >= 1 && level <= 5) {
      pending[item.id] = level;
    }
  }
  // resume at the first document without a label
  let position = batch.length;
  for (let i = 0; i < batch.length; i++) {
    const item = batch[i];
    if (item !== undefined && pending[item.id] === undefined) {
      position = i;
      break;
    }
  }
  return {
    ...state,
    batch: [...batch],
    coldStart,
    position,
    pending,
    connection: "ready",
    message: coldStart ? "random seed batch" : "",
  };
}

export function poolExhausted(state: WorkbenchState): WorkbenchState {
  return {
    ...state,
    batch: [],
    position: 0,
    pending: {},
    connection: "complete",
    message: "annotation complete",
  };
}

export function currentDocument(state: WorkbenchState): BatchItem | null {
  if (state.position < 0 || state.position >= state.batch.length) {
    return null;
  }
  return state.batch[state.position] ?? null;
}

export function isBatchComplete(state: WorkbenchState): boolean {
  return state.batch.length > 0 && state.position >= state.batch.length;
}

export function progressLabel(state: WorkbenchState): string {
  if (state.batch.length === 0) {
    return "";
  }
  const shown = Math.min(state.position + 1, state.batch.length);
  return `${shown} of ${state.batch.length}`;
}

/** Record a level for the displayed document and advance. */
export function assignLevel(state: WorkbenchState, level: number): WorkbenchState {
  const doc = currentDocument(state);
  if (doc === null || !Number.isInteger(level) || level < 1 || level > 5) {
    return state;
  }
  return {
    ...state,
    pending: { ...state.pending, [doc.id]: level },
    position: state.position + 1,
  };
}

export function labelsSubmitted(state: WorkbenchState): WorkbenchState {
  return {
    ...state,
    batch: [],
    position: 0,
    pending: {},
    connection: "ready",
    message: "batch submitted — retrain when ready",
  };
}

export function submitFailed(state: WorkbenchState, message: string): WorkbenchState {
  return { ...state, connection: "error", message: `submit failed: ${message}` };
}

export function retrainRecorded(
  state: WorkbenchState,
  point: HistoryPoint,
): WorkbenchState {
  return {
    ...state,
    history: [...state.history, point],
    connection: state.connection === "complete" ? "complete" : "ready",
    message: `retrained on ${point.size} texts`,
  };
}

export function agreementLoaded(
  state: WorkbenchState,
  view: AgreementView | null,
): WorkbenchState {
  return { ...state, agreement: view };
}

export function noteMessage(state: WorkbenchState, message: string): WorkbenchState {
  return { ...state, message };
}

export function toggleScores(state: WorkbenchState): WorkbenchState {
  return { ...state, showScores: !state.showScores };
}
