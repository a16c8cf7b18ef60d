import { ServiceClient } from "./api.js";
import { ViewState } from "./state.js";
import { Rating, RecommendResult } from "./types.js";

const RATINGS: Rating[] = ["Good", "OK", "Bad"];

export interface PanelCallbacks {
  onError?: (message: string, retry?: () => void) => void;
  onRated?: (oerId: string, rating: Rating) => void;
}

/**
 * Ranked-resource panel with Good/OK/Bad buttons.
 *
 * Ratings are optimistic: the row locks immediately, the judgment is sent,
 * and on failure the row unlocks with a retry affordance.  An acknowledged
 * pair never unlocks again for its request.
 */
export class OerPanel {
  constructor(
    private readonly container: HTMLElement,
    private readonly state: ViewState,
    private readonly client: ServiceClient,
    private readonly callbacks: PanelCallbacks = {},
  ) {}

  render(): void {
    this.container.replaceChildren();
    const results = this.state.panelResults();
    const heading = document.createElement("div");
    heading.className = "panel-heading";
    heading.textContent = results.length
      ? `resources for hop ${this.state.focusedDistance()}`
      : "no resources for this formula";
    this.container.appendChild(heading);

    for (const result of results) {
      this.container.appendChild(this.row(result));
    }
  }

  private row(result: RecommendResult): HTMLElement {
    const row = document.createElement("div");
    row.className = "oer-row";
    row.dataset.oerId = result.oer_id;

    const title = document.createElement("span");
    title.className = "oer-title";
    title.textContent = `[${result.type}] ${result.title}`;
    row.appendChild(title);

    const score = document.createElement("span");
    score.className = "oer-score";
    score.textContent = result.score.toFixed(4);
    row.appendChild(score);

    const badge = document.createElement("span");
    badge.className = "oer-distance";
    badge.textContent = `hop ${result.distance}`;
    row.appendChild(badge);

    const status = this.state.ratingStatus(result.oer_id);
    for (const rating of RATINGS) {
      const button = document.createElement("button");
      button.className = `rate rate-${rating.toLowerCase()}`;
      button.textContent = rating;
      button.disabled = status !== undefined;
      button.addEventListener("click", () => {
        void this.rate(result, rating);
      });
      row.appendChild(button);
    }
    if (status === "acked") {
      row.classList.add("rated");
    }
    return row;
  }

  async rate(result: RecommendResult, rating: Rating): Promise<void> {
    const requestId = this.state.requestId;
    if (!requestId) {
      return;
    }
    if (!this.state.beginRating(result.oer_id)) {
      return; // already pending or acknowledged for this request
    }
    this.render(); // optimistic lock
    try {
      await this.client.judge(requestId, result.oer_id, rating);
      this.state.acknowledgeRating(result.oer_id);
      this.callbacks.onRated?.(result.oer_id, rating);
    } catch (error) {
      this.state.rollbackRating(result.oer_id);
      const message = error instanceof Error ? error.message : String(error);
      this.callbacks.onError?.(`rating failed: ${message}`, () => {
        void this.rate(result, rating);
      });
    }
    this.render();
  }
}
