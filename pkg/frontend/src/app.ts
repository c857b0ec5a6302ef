import { ApiClient, ApiError } from "./api";
import type { LeaderboardResponse, PairResponse, Winner } from "./types";

export interface AppOptions {
  annotator: string;
  /** Leaderboard poll period in ms; 0 disables the timer (tests drive it). */
  leaderboardPollMs?: number;
}

const TEMPLATE = `
  <header class="top">
    <h1>Which question is harder?</h1>
    <div class="session-info">
      Annotator <strong data-ref="annotator"></strong>
      &middot; judged <span data-ref="judged-count">0</span>
    </div>
  </header>
  <div class="banner hidden" data-ref="banner">
    <span data-ref="banner-text"></span>
    <button type="button" data-ref="retry">Retry</button>
  </div>
  <div class="instruction hidden" data-ref="instruction"></div>
  <main class="pair-area" data-ref="pair-area">
    <section class="panel">
      <p class="question-text" data-ref="left-text"></p>
      <button type="button" data-ref="pick-left" disabled>
        &larr; Left is harder
      </button>
    </section>
    <section class="panel">
      <p class="question-text" data-ref="right-text"></p>
      <button type="button" data-ref="pick-right" disabled>
        Right is harder &rarr;
      </button>
    </section>
  </main>
  <section class="board">
    <h2>Leaderboard <small data-ref="board-version"></small></h2>
    <table class="leaderboard">
      <thead>
        <tr><th>#</th><th>question</th><th>rating</th>
        <th>comparisons</th><th>label</th></tr>
      </thead>
      <tbody data-ref="board-body"></tbody>
    </table>
  </section>
`;

interface PendingSubmission {
  token: string;
  winner: Winner;
}

/**
 * The annotation session: fetch a pair, record one judgment per token,
 * fetch the next. All state lives server-side; the judged count and the
 * leaderboard are always re-read from responses, never recomputed here.
 */
export class AnnotationApp {
  private readonly api: ApiClient;
  private readonly annotator: string;
  private readonly refs: Record<string, HTMLElement>;

  private currentPair: PairResponse | null = null;
  private submitting = false;
  private loadingPair = false;
  private pendingRetry: (() => void) | null = null;
  private lastBoardVersion = -1;
  private pollTimer: ReturnType<typeof setInterval> | null = null;

  constructor(root: HTMLElement, api: ApiClient, options: AppOptions) {
    this.api = api;
    this.annotator = options.annotator;
    root.innerHTML = TEMPLATE;
    this.refs = {};
    for (const el of root.querySelectorAll<HTMLElement>("[data-ref]")) {
      this.refs[el.dataset.ref as string] = el;
    }
    this.refs["annotator"]!.textContent = this.annotator;
    this.button("pick-left").addEventListener("click", () => {
      void this.submit("LEFT");
    });
    this.button("pick-right").addEventListener("click", () => {
      void this.submit("RIGHT");
    });
    this.button("retry").addEventListener("click", () => {
      const retry = this.pendingRetry;
      this.hideBanner();
      retry?.();
    });
    root.ownerDocument.addEventListener("keydown", (event) => {
      if (event.key === "ArrowLeft") void this.submit("LEFT");
      if (event.key === "ArrowRight") void this.submit("RIGHT");
    });
    const pollMs = options.leaderboardPollMs ?? 4000;
    if (pollMs > 0) {
      this.pollTimer = setInterval(() => void this.refreshLeaderboard(), pollMs);
    }
  }

  /** Start the session loop: first pair + first leaderboard snapshot. */
  async start(): Promise<void> {
    await this.loadNextPair();
    await this.refreshLeaderboard();
  }

  stop(): void {
    if (this.pollTimer !== null) clearInterval(this.pollTimer);
  }

  private button(ref: string): HTMLButtonElement {
    return this.refs[ref] as HTMLButtonElement;
  }

  private setButtonsEnabled(enabled: boolean): void {
    this.button("pick-left").disabled = !enabled;
    this.button("pick-right").disabled = !enabled;
  }

  private showBanner(message: string, retry: () => void): void {
    this.pendingRetry = retry;
    this.refs["banner-text"]!.textContent = message;
    this.refs["banner"]!.classList.remove("hidden");
  }

  private hideBanner(): void {
    this.pendingRetry = null;
    this.refs["banner"]!.classList.add("hidden");
  }

  private showInstruction(message: string): void {
    const box = this.refs["instruction"]!;
    box.textContent = message;
    box.classList.remove("hidden");
    this.refs["pair-area"]!.classList.add("hidden");
  }

  renderPair(pair: PairResponse): void {
    this.currentPair = pair;
    this.refs["left-text"]!.textContent = pair.left.text;
    this.refs["right-text"]!.textContent = pair.right.text;
    this.refs["judged-count"]!.textContent = String(pair.my_judged_count);
    this.setButtonsEnabled(true);
  }

  async loadNextPair(): Promise<void> {
    if (this.loadingPair) return;
    this.loadingPair = true;
    this.setButtonsEnabled(false);
    try {
      const pair = await this.api.nextPair(this.annotator);
      this.hideBanner();
      this.renderPair(pair);
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        this.showInstruction(
          "Not enough questions are loaded for pairwise judging yet. " +
            "Ask the operator to load at least two questions, then reload.",
        );
      } else {
        this.showBanner("Could not fetch the next pair.", () => {
          void this.loadNextPair();
        });
      }
    } finally {
      this.loadingPair = false;
    }
  }

  /** One judgment per token: re-entry while in flight is a no-op. */
  async submit(winner: Winner): Promise<void> {
    if (!this.currentPair || this.submitting) return;
    this.submitting = true;
    this.setButtonsEnabled(false);
    const token = this.currentPair.pair_token;
    try {
      await this.api.submitJudgment(token, winner);
      // accepted: false means the server already has this token; either
      // way the judgment is recorded and the session moves on.
      this.currentPair = null;
      this.submitting = false;
      await this.loadNextPair();
      await this.refreshLeaderboard();
    } catch (error) {
      this.submitting = false;
      if (error instanceof ApiError && error.status === 410) {
        // Token expired while we held it: fetch a fresh pair.
        this.currentPair = null;
        await this.loadNextPair();
        return;
      }
      // Network failure: nothing is lost, the retry resubmits the same
      // token and the server de-duplicates.
      this.retrySubmission({ token, winner });
    }
  }

  private retrySubmission(pending: PendingSubmission): void {
    this.showBanner("Submitting failed; your judgment was kept.", () => {
      void (async () => {
        try {
          await this.api.submitJudgment(pending.token, pending.winner);
          this.currentPair = null;
          await this.loadNextPair();
          await this.refreshLeaderboard();
        } catch {
          this.retrySubmission(pending);
        }
      })();
    });
  }

  renderLeaderboard(board: LeaderboardResponse): void {
    this.lastBoardVersion = board.board_version;
    this.refs["board-version"]!.textContent = `v${board.board_version}`;
    const body = this.refs["board-body"]!;
    body.textContent = "";
    if (board.entries.length === 0) {
      const row = body.ownerDocument.createElement("tr");
      row.innerHTML = `<td colspan="5" class="empty">no questions yet</td>`;
      body.appendChild(row);
      return;
    }
    board.entries.forEach((entry, index) => {
      const row = body.ownerDocument.createElement("tr");
      const cells = [
        String(index + 1),
        entry.question_id,
        String(entry.rating),
        String(entry.comparisons),
        String(entry.label),
      ];
      for (const text of cells) {
        const cell = body.ownerDocument.createElement("td");
        cell.textContent = text;
        row.appendChild(cell);
      }
      body.appendChild(row);
    });
  }

  /** Re-render only when the server-side board version moved. */
  async refreshLeaderboard(): Promise<void> {
    try {
      const board = await this.api.leaderboard();
      if (board.board_version !== this.lastBoardVersion) {
        this.renderLeaderboard(board);
      }
    } catch {
      // Polling failure is non-fatal; the next poll retries.
    }
  }
}
