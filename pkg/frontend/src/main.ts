/** Browser entry point: binds the workbench to the DOM. */

import { ApiClient } from "./api.js";
import { Workbench } from "./controller.js";
import {
  type WorkbenchState,
  LEVELS,
  currentDocument,
  isBatchComplete,
  progressLabel,
} from "./state.js";

function escapeHtml(value: string): string {
  return value
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function agreementPanel(state: WorkbenchState): string {
  if (state.agreement === null) {
    return `<p class="muted">no double labels yet</p>`;
  }
  const { kappa, band, pairs } = state.agreement;
  return `<p>kappa <strong>${kappa.toFixed(3)}</strong>
    <span class="badge band-badge">${escapeHtml(band)}</span>
    over ${pairs} documents</p>`;
}

function readingPane(state: WorkbenchState): string {
  if (state.connection === "complete") {
    return `<div class="terminal">annotation complete — the pool is empty</div>`;
  }
  if (isBatchComplete(state)) {
    const retry =
      state.connection === "error"
        ? `<button id="retry">retry submit</button>`
        : "";
    return `<div class="between-batches">
      <p>${escapeHtml(state.message)}</p>
      ${retry}
      <button id="retrain">retrain</button>
      <button id="next-batch">next batch</button>
    </div>`;
  }
  const doc = currentDocument(state);
  if (doc === null) {
    return `<p class="muted">loading…</p>`;
  }
  const banner = state.coldStart
    ? `<div class="banner">random seed batch</div>`
    : "";
  const badge = state.showScores
    ? `<span class="badge score-badge">distance ${doc.score.toFixed(4)}</span>`
    : "";
  const keys = LEVELS.map(
    (level) => `<button class="level-key" data-level="${level}">${level}</button>`,
  ).join("");
  return `${banner}
    <div class="progress">${progressLabel(state)} ${badge}</div>
    <article class="document">${escapeHtml(doc.text) || "<em>(no text on file)</em>"}</article>
    <div class="keys">${keys}
      <span class="hint">press 1–5 to grade, u to toggle the score badge</span>
    </div>`;
}

function view(workbench: Workbench, state: WorkbenchState): string {
  return `<header><h1>readlevel workbench</h1>
      <span class="session">session ${escapeHtml(state.sessionId)}</span>
    </header>
    <main>
      <section class="pane reading">${readingPane(state)}</section>
      <section class="pane side">
        <h2>accuracy</h2>
        ${workbench.chartSvg()}
        <h2>agreement</h2>
        ${agreementPanel(state)}
        <p class="status ${state.connection}">${escapeHtml(state.message)}</p>
      </section>
    </main>`;
}

function boot(): void {
  const root = document.getElementById("app");
  if (root === null) {
    return;
  }
  const params = new URLSearchParams(window.location.search);
  const sessionId = params.get("session");
  if (sessionId === null || sessionId === "") {
    root.innerHTML = `<p>open this page as <code>/?session=&lt;session-id&gt;</code>
      (create one with <code>POST /api/v1/sessions</code>)</p>`;
    return;
  }
  const sizeParam = params.get("k");
  const workbench = new Workbench({
    sessionId,
    api: new ApiClient((url, init) => fetch(url, init)),
    store: window.localStorage,
    annotator: params.get("annotator") ?? "annotator",
    ...(sizeParam !== null ? { batchSize: Number(sizeParam) } : {}),
    onRender: (state) => {
      root.innerHTML = view(workbench, state);
    },
  });

  document.addEventListener("keydown", (event) => {
    if (!event.repeat) {
      void workbench.handleKey(event.key);
    }
  });
  root.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    if (target.id === "retrain") {
      void workbench.retrain();
    } else if (target.id === "retry") {
      void workbench.retrySubmit();
    } else if (target.id === "next-batch") {
      void workbench.loadBatch();
    } else if (target.classList.contains("level-key")) {
      void workbench.assign(Number(target.dataset.level));
    }
  });

  void workbench.start().catch((error: unknown) => {
    root.innerHTML = `<p class="status error">failed to load session: ${escapeHtml(
      error instanceof Error ? error.message : String(error),
    )}</p>`;
  });
}

boot();
