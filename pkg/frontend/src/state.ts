import {
  RatingStatus,
  RecommendResponse,
  RecommendResult,
  SubgraphResponse,
} from "./types.js";

function ratingKey(requestId: string, oerId: string): string {
  return `${requestId}:${oerId}`;
}

/**
 * Client-side session state.
 *
 * Invariants: the focused formula always belongs to the rendered subgraph,
 * and a rating, once acknowledged, stays locked for that (request, resource)
 * pair.  The state never computes scores; it only holds service payloads.
 */
export class ViewState {
  requestId: string | null = null;
  anchor: string | null = null;
  focused: string | null = null;
  subgraph: SubgraphResponse | null = null;
  results: RecommendResult[] = [];
  private ratings = new Map<string, RatingStatus>();

  applyRecommendation(
    recommendation: RecommendResponse,
    subgraph: SubgraphResponse,
  ): void {
    this.requestId = recommendation.request_id;
    this.anchor = recommendation.anchor;
    this.results = recommendation.results;
    this.subgraph = subgraph;
    this.focused = recommendation.anchor;
    // ratings belong to earlier requests; keep them so re-focusing after a
    // new query cannot resurrect their buttons
  }

  focus(formulaId: string): void {
    if (!this.subgraph ||
        !this.subgraph.vertices.some((v) => v.id === formulaId)) {
      throw new Error(`formula ${formulaId} is not in the rendered subgraph`);
    }
    this.focused = formulaId;
  }

  /** Resources shown for the focused formula: the full returned list on the
   * anchor, otherwise the resources it hosts. */
  panelResults(): RecommendResult[] {
    if (!this.focused || this.focused === this.anchor) {
      return this.results;
    }
    const focused = this.focused;
    return this.results.filter((r) => r.hosting_formula === focused);
  }

  focusedDistance(): number {
    if (!this.subgraph || !this.focused) {
      return 0;
    }
    const vertex = this.subgraph.vertices.find((v) => v.id === this.focused);
    return vertex ? vertex.distance : 0;
  }

  ratingStatus(oerId: string): RatingStatus | undefined {
    if (!this.requestId) {
      return undefined;
    }
    return this.ratings.get(ratingKey(this.requestId, oerId));
  }

  /** Returns false when a rating for the pair is already pending or acked. */
  beginRating(oerId: string): boolean {
    if (!this.requestId) {
      return false;
    }
    const key = ratingKey(this.requestId, oerId);
    if (this.ratings.has(key)) {
      return false;
    }
    this.ratings.set(key, "pending");
    return true;
  }

  acknowledgeRating(oerId: string): void {
    if (this.requestId) {
      this.ratings.set(ratingKey(this.requestId, oerId), "acked");
    }
  }

  rollbackRating(oerId: string): void {
    if (!this.requestId) {
      return;
    }
    const key = ratingKey(this.requestId, oerId);
    if (this.ratings.get(key) === "pending") {
      this.ratings.delete(key);
    }
  }
}
