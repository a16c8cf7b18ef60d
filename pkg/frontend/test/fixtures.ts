import {
  RecommendResponse,
  SubgraphResponse,
} from "../src/types.js";

// Payloads shaped exactly like the service responses for a chain-shaped
// neighborhood: f1 - f2 - f3(anchor) - f4 - f5.
export const SUBGRAPH: SubgraphResponse = {
  target: "f3",
  vertices: [
    { id: "f1", latex: "a+b", distance: 2, lg: 0.2, lc: 2 },
    { id: "f2", latex: "a+b+c", distance: 1, lg: 0.2, lc: 6 },
    { id: "f3", latex: "x^{2}+\\frac{1}{a+b}", distance: 0, lg: 0.2, lc: 16 },
    { id: "f4", latex: "\\sqrt{x^{2}+y^{2}}", distance: 1, lg: 0.2, lc: 12 },
    { id: "f5", latex: "\\frac{u}{v}+w^{3}", distance: 2, lg: 0.2, lc: 10 },
  ],
  edges: [
    { src: "f1", dst: "f2", p: 0.8 },
    { src: "f2", dst: "f3", p: 0.9 },
    { src: "f3", dst: "f4", p: 0.7 },
    { src: "f4", dst: "f5", p: 0.6 },
  ],
};

export const RECOMMENDATION: RecommendResponse = {
  request_id: "req-123",
  anchor: "f3",
  results: [
    { oer_id: "oer1", score: 3.2, hosting_formula: "f3", distance: 0,
      type: "video", title: "anchor video" },
    { oer_id: "oer2", score: 2.9, hosting_formula: "f2", distance: 1,
      type: "wiki", title: "neighbor wiki" },
    { oer_id: "oer3", score: 2.1, hosting_formula: "f1", distance: 2,
      type: "slides", title: "far slides" },
    { oer_id: "oer4", score: 1.7, hosting_formula: "f3", distance: 0,
      type: "code", title: "anchor code" },
  ],
};

export interface RecordedCall {
  url: string;
  method: string;
  body: unknown;
}

/**
 * fetch stub that mimics the service: serves the fixture payloads, records
 * judgment posts, and answers 404 for request ids it has not issued.
 */
export function serviceFetchStub() {
  const calls: RecordedCall[] = [];
  const judgments: Array<{ request_id: string; oer_id: string;
    rating: string }> = [];
  let failJudgments = false;
  const issuedRequests = new Set([RECOMMENDATION.request_id]);

  const impl = async (input: RequestInfo | URL, init?: RequestInit):
      Promise<Response> => {
    const url = String(input);
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    calls.push({ url, method, body });

    if (url.includes("/recommend")) {
      return jsonResponse(RECOMMENDATION);
    }
    if (url.includes("/fem/subgraph")) {
      return jsonResponse(SUBGRAPH);
    }
    if (url.includes("/judgments")) {
      if (failJudgments) {
        return new Response(JSON.stringify({ detail: "boom" }),
          { status: 500 });
      }
      const payload = body as { request_id: string; oer_id: string;
        rating: string };
      if (!issuedRequests.has(payload.request_id)) {
        return new Response(
          JSON.stringify({ detail: `unknown request '${payload.request_id}'` }),
          { status: 404 });
      }
      judgments.push(payload);
      return new Response(null, { status: 204 });
    }
    return new Response(JSON.stringify({ detail: "not found" }),
      { status: 404 });
  };

  return {
    impl: impl as typeof fetch,
    calls,
    judgments,
    setFailJudgments(value: boolean) { failJudgments = value; },
  };
}

function jsonResponse(payload: unknown): Response {
  return new Response(JSON.stringify(payload), {
    status: 200,
    headers: { "Content-Type": "application/json" },
  });
}

export function mountDom(): void {
  document.body.innerHTML = `
    <form id="query-form">
      <input name="latex" value="x^{2}+\\frac{1}{a+b}">
      <textarea name="context">square plus reciprocal</textarea>
      <input name="question" value="">
      <textarea name="abstract"></textarea>
      <input name="keywords" value="">
      <input name="topics" value="">
    </form>
    <div id="subgraph"></div>
    <div id="oer-panel"></div>
    <div id="error-box"></div>
  `;
}
