import {
  ProjectResponse,
  QueryInput,
  Rating,
  RecommendResponse,
  SubgraphResponse,
} from "./types.js";

export class ServiceError extends Error {
  constructor(public readonly status: number, detail: string) {
    super(detail);
  }
}

async function parseError(response: Response): Promise<ServiceError> {
  let detail = `${response.status} ${response.statusText}`;
  try {
    const body = await response.json();
    if (body && typeof body.detail === "string") {
      detail = body.detail;
    }
  } catch {
    // non-JSON error body; keep the status line
  }
  return new ServiceError(response.status, detail);
}

/** Thin typed client over the recommendation service. */
export class ServiceClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) {
      throw await parseError(response);
    }
    if (response.status === 204) {
      return undefined as T;
    }
    return (await response.json()) as T;
  }

  async recommend(query: QueryInput, topN: number): Promise<RecommendResponse> {
    return this.post<RecommendResponse>("/recommend", {
      ...query,
      top_n: topN,
    });
  }

  async project(query: QueryInput): Promise<ProjectResponse> {
    return this.post<ProjectResponse>("/project", query);
  }

  async subgraph(formula: string, depth = 3): Promise<SubgraphResponse> {
    const params = new URLSearchParams({ formula, depth: String(depth) });
    const response = await this.fetchImpl(
      `${this.baseUrl}/fem/subgraph?${params.toString()}`,
    );
    if (!response.ok) {
      throw await parseError(response);
    }
    return (await response.json()) as SubgraphResponse;
  }

  async judge(requestId: string, oerId: string, rating: Rating): Promise<void> {
    await this.post<void>("/judgments", {
      request_id: requestId,
      oer_id: oerId,
      rating,
    });
  }
}
