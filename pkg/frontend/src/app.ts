/**
 * The labeling view: one pending instance at a time with click or number-key
 * class selection, a submit gate that requires the whole batch, live
 * progress with the learning curve, and stale-batch reconciliation.
 *
 * All numbers shown come from the server; the UI computes nothing itself.
 */

import { ApiError, SessionApi } from "./api.js";
import type { Progress } from "./api.js";
import { renderCurveSvg } from "./chart.js";
import {
  BatchState,
  batchState,
  clearSelections,
  isComplete,
  labeledCount,
  loadSelections,
  moveCursor,
  reconcile,
  saveSelections,
  select,
  selectByKey,
  toLabelEntries,
} from "./state.js";

export interface AppOptions {
  root: HTMLElement;
  api: SessionApi;
  sessionId: string;
  storage: Storage;
  pollIntervalMs?: number;
  sleep?: (ms: number) => Promise<void>;
}

const defaultSleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

export class LabelerApp {
  batch: BatchState | null = null;
  progress: Progress | null = null;
  notice = "";

  private readonly root: HTMLElement;
  private readonly api: SessionApi;
  private readonly sessionId: string;
  private readonly storage: Storage;
  private readonly pollIntervalMs: number;
  private readonly sleep: (ms: number) => Promise<void>;
  private keyListener: ((event: KeyboardEvent) => void) | null = null;
  private polling = false;

  constructor(options: AppOptions) {
    this.root = options.root;
    this.api = options.api;
    this.sessionId = options.sessionId;
    this.storage = options.storage;
    this.pollIntervalMs = options.pollIntervalMs ?? 1000;
    this.sleep = options.sleep ?? defaultSleep;
  }

  /** Fetch current progress (and the pending batch when one is waiting),
   * restore any locally saved selections, and render. */
  async start(): Promise<void> {
    this.keyListener = (event) => this.handleKey(event);
    this.root.ownerDocument.addEventListener("keydown", this.keyListener);
    await this.refresh();
    if (this.progress?.status === "training") {
      void this.pollUntilIdle();
    }
  }

  stop(): void {
    if (this.keyListener) {
      this.root.ownerDocument.removeEventListener("keydown", this.keyListener);
      this.keyListener = null;
    }
    this.polling = false;
  }

  async refresh(): Promise<void> {
    this.progress = await this.api.getProgress(this.sessionId);
    if (this.progress.status === "awaiting_labels") {
      await this.loadBatch();
    } else {
      this.batch = null;
    }
    this.render();
  }

  private async loadBatch(): Promise<void> {
    const fresh = await this.api.getBatch(this.sessionId);
    const saved = loadSelections(this.storage, this.sessionId, fresh.batch_id);
    this.batch = batchState(fresh, saved);
    saveSelections(this.storage, this.sessionId, this.batch);
  }

  /** Poll progress at the configured interval until training finishes, then
   * pick up the next batch (or the finished summary). */
  async pollUntilIdle(timeoutMs = 120_000): Promise<Progress> {
    if (this.polling) throw new Error("already polling");
    this.polling = true;
    const deadline = Date.now() + timeoutMs;
    try {
      while (Date.now() < deadline) {
        this.progress = await this.api.getProgress(this.sessionId);
        this.render();
        if (this.progress.status !== "training") {
          if (this.progress.status === "awaiting_labels") {
            await this.loadBatch();
            this.render();
          }
          return this.progress;
        }
        await this.sleep(this.pollIntervalMs);
      }
    } finally {
      this.polling = false;
    }
    throw new Error("timed out waiting for training to finish");
  }

  selectClass(instanceId: number, classIndex: number): void {
    if (!this.batch || this.progress?.status !== "awaiting_labels") return;
    this.batch = select(this.batch, instanceId, classIndex);
    saveSelections(this.storage, this.sessionId, this.batch);
    this.render();
  }

  handleKey(event: KeyboardEvent): void {
    if (!this.batch || this.progress?.status !== "awaiting_labels") return;
    if (/^[1-9]$/.test(event.key)) {
      this.batch = selectByKey(this.batch, event.key);
      saveSelections(this.storage, this.sessionId, this.batch);
      this.render();
    } else if (event.key === "ArrowRight" || event.key === "j") {
      this.batch = moveCursor(this.batch, 1);
      this.render();
    } else if (event.key === "ArrowLeft" || event.key === "k") {
      this.batch = moveCursor(this.batch, -1);
      this.render();
    }
  }

  /** Submit the complete batch. On a stale-batch conflict, refetch and
   * reconcile, keeping every selection that is still pending. */
  async submit(): Promise<void> {
    if (!this.batch) throw new Error("no pending batch");
    if (!isComplete(this.batch)) throw new Error("batch is not completely labeled");
    const submitted = this.batch;
    try {
      await this.api.submitLabels(this.sessionId, submitted.batchId, toLabelEntries(submitted));
    } catch (failure) {
      if (failure instanceof ApiError && failure.code === "stale_batch") {
        this.notice = "The server moved on to a different batch; your overlapping selections were kept.";
        const fresh = await this.api.getBatch(this.sessionId);
        this.batch = reconcile(submitted, fresh);
        saveSelections(this.storage, this.sessionId, this.batch);
        this.render();
        return;
      }
      throw failure;
    }
    clearSelections(this.storage, this.sessionId, submitted.batchId);
    this.notice = "";
    this.batch = null;
    this.progress = { ...(this.progress as Progress), status: "training" };
    this.render();
    await this.pollUntilIdle();
  }

  render(): void {
    const progress = this.progress;
    const status = progress?.status ?? "loading";
    this.root.innerHTML = `
      <header class="top">
        <h1>labeling session <code id="session-id">${escapeHtml(this.sessionId)}</code></h1>
        <span id="status-pill" class="pill pill-${status}">${status}</span>
      </header>
      <section id="progress-panel">
        <span id="iteration-counter">iteration ${progress ? progress.iteration : "-"}</span>
        <span id="labeled-count">${progress ? progress.num_labeled : 0} labeled</span>
        <div id="chart-area">${progress ? renderCurveSvg(progress.curve) : ""}</div>
        ${this.summaryCard()}
        ${status === "error" ? `<div id="error-banner">${escapeHtml(progress?.detail ?? "training failed")}</div>` : ""}
      </section>
      <section id="batch-panel" class="${status === "awaiting_labels" ? "" : "disabled"}">
        ${status === "training" ? '<div id="spinner" class="spinner">training…</div>' : ""}
        ${this.batchArea()}
      </section>
      ${this.notice ? `<div id="notice">${escapeHtml(this.notice)}</div>` : ""}
    `;
    this.bind();
  }

  private summaryCard(): string {
    if (this.progress?.status !== "finished") return "";
    const curve = this.progress.curve;
    const last = curve.length > 0 ? curve[curve.length - 1] : undefined;
    const accuracy =
      last && typeof last.accuracy === "number" ? last.accuracy.toFixed(3) : "n/a";
    return `<div id="summary-card">
      <strong>session finished</strong>
      <span id="final-accuracy">final accuracy ${accuracy}</span>
      <span id="total-labels">${this.progress.num_labeled} labels collected</span>
    </div>`;
  }

  private batchArea(): string {
    const batch = this.batch;
    if (!batch || this.progress?.status !== "awaiting_labels") return "";
    const inst = batch.instances[batch.cursor];
    const chosen = batch.selections.get(inst.id);
    const dots = batch.instances
      .map((entry, index) => {
        const classes = [
          "dot",
          batch.selections.has(entry.id) ? "done" : "todo",
          index === batch.cursor ? "current" : "",
        ].join(" ");
        return `<button class="${classes}" data-jump="${index}" title="instance ${entry.id}"></button>`;
      })
      .join("");
    const buttons = batch.classNames
      .map(
        (name, index) =>
          `<button class="class-button ${chosen === index ? "selected" : ""}"
                   data-class-index="${index}">[${index + 1}] ${escapeHtml(name)}</button>`,
      )
      .join("");
    return `
      <div id="batch-progress">${labeledCount(batch)} of ${batch.instances.length} labeled
        (batch ${batch.batchId})</div>
      <div id="dot-strip">${dots}</div>
      <article id="instance-card" data-instance-id="${inst.id}">
        <p id="instance-text">${escapeHtml(inst.text)}</p>
        <div id="class-buttons">${buttons}</div>
      </article>
      <nav id="batch-nav">
        <button id="prev-button">&#8592; prev</button>
        <span id="position">${batch.cursor + 1} / ${batch.instances.length}</span>
        <button id="next-button">next &#8594;</button>
      </nav>
      <button id="submit-button" ${isComplete(batch) ? "" : "disabled"}>submit batch</button>
    `;
  }

  private bind(): void {
    const batch = this.batch;
    if (batch && this.progress?.status === "awaiting_labels") {
      const inst = batch.instances[batch.cursor];
      this.root.querySelectorAll<HTMLButtonElement>(".class-button").forEach((button) => {
        button.addEventListener("click", () =>
          this.selectClass(inst.id, Number(button.dataset.classIndex)),
        );
      });
      this.root.querySelectorAll<HTMLButtonElement>("[data-jump]").forEach((button) => {
        button.addEventListener("click", () => {
          if (!this.batch) return;
          this.batch = { ...this.batch, cursor: Number(button.dataset.jump) };
          this.render();
        });
      });
      this.root.querySelector("#prev-button")?.addEventListener("click", () => {
        if (!this.batch) return;
        this.batch = moveCursor(this.batch, -1);
        this.render();
      });
      this.root.querySelector("#next-button")?.addEventListener("click", () => {
        if (!this.batch) return;
        this.batch = moveCursor(this.batch, 1);
        this.render();
      });
      this.root.querySelector("#submit-button")?.addEventListener("click", () => {
        void this.submit().catch((failure) => {
          this.notice = failure instanceof Error ? failure.message : String(failure);
          this.render();
        });
      });
    }
  }
}

function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}
