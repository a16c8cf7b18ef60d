// Scripted fixture session covering the UI fidelity contract: rendered
// counts equal the service payload, every displayed number traces back to a
// response field, and a rating click produces exactly one judgment with the
// right attribution.

import { beforeEach, describe, expect, it } from "vitest";

import { ServiceClient } from "../src/api.js";
import { App } from "../src/app.js";
import { mountDom, serviceFetchStub, RECOMMENDATION, SUBGRAPH } from
  "./fixtures.js";

function buildApp(stub = serviceFetchStub()) {
  mountDom();
  const app = new App(
    {
      form: document.getElementById("query-form") as HTMLFormElement,
      graphContainer: document.getElementById("subgraph")!,
      panelContainer: document.getElementById("oer-panel")!,
      errorBox: document.getElementById("error-box")!,
    },
    new ServiceClient("", stub.impl),
  );
  return { app, stub };
}

async function submit(app: App) {
  await app.submitQuery({
    latex: "x^{2}+\\frac{1}{a+b}",
    context: "square plus reciprocal",
  });
}

describe("scripted session", () => {
  beforeEach(() => {
    document.body.innerHTML = "";
  });

  it("renders the subgraph with payload-equal counts", async () => {
    const { app } = buildApp();
    await submit(app);
    expect(app.graph.renderedVertexCount()).toBe(SUBGRAPH.vertices.length);
    expect(app.graph.renderedEdgeCount()).toBe(SUBGRAPH.edges.length);
    const rows = document.querySelectorAll("#oer-panel .oer-row");
    expect(rows.length).toBe(RECOMMENDATION.results.length);
  });

  it("displays only numbers taken from the response", async () => {
    const { app } = buildApp();
    await submit(app);
    const scores = Array.from(
      document.querySelectorAll("#oer-panel .oer-score"),
      (el) => el.textContent);
    expect(scores).toEqual(
      RECOMMENDATION.results.map((r) => r.score.toFixed(4)));
    const badges = Array.from(
      document.querySelectorAll("#oer-panel .oer-distance"),
      (el) => el.textContent);
    expect(badges).toEqual(
      RECOMMENDATION.results.map((r) => `hop ${r.distance}`));
  });

  it("one rating click emits exactly one correct judgment and locks", async () => {
    const { app, stub } = buildApp();
    await submit(app);
    const row = document.querySelector('.oer-row[data-oer-id="oer2"]')!;
    const good = row.querySelector("button.rate-good") as HTMLButtonElement;
    good.click();
    await Promise.resolve();
    await new Promise((resolve) => setTimeout(resolve, 0));

    expect(stub.judgments).toEqual([
      { request_id: "req-123", oer_id: "oer2", rating: "Good" },
    ]);
    // the fixture's hosting/distance for oer2 joins server-side; the UI
    // displayed the same distance it was served
    const served = RECOMMENDATION.results.find((r) => r.oer_id === "oer2")!;
    expect(served.distance).toBe(1);

    const rerendered = document.querySelector(
      '.oer-row[data-oer-id="oer2"]')!;
    for (const button of rerendered.querySelectorAll("button.rate")) {
      expect((button as HTMLButtonElement).disabled).toBe(true);
    }
  });

  it("duplicate clicks are client-side prevented", async () => {
    const { app, stub } = buildApp();
    await submit(app);
    const row = document.querySelector('.oer-row[data-oer-id="oer1"]')!;
    (row.querySelector("button.rate-ok") as HTMLButtonElement).click();
    (row.querySelector("button.rate-ok") as HTMLButtonElement).click();
    await new Promise((resolve) => setTimeout(resolve, 0));
    expect(stub.judgments.length).toBe(1);
  });

  it("focusing an ancestor reloads the panel and keeps ratings", async () => {
    const { app, stub } = buildApp();
    await submit(app);
    const row = document.querySelector('.oer-row[data-oer-id="oer2"]')!;
    (row.querySelector("button.rate-good") as HTMLButtonElement).click();
    await new Promise((resolve) => setTimeout(resolve, 0));

    app.focusFormula("f1");
    let rows = Array.from(
      document.querySelectorAll<HTMLElement>("#oer-panel .oer-row"),
      (el) => el.dataset.oerId);
    expect(rows).toEqual(["oer3"]); // f1 hosts only oer3, at hop 2
    expect(document.querySelector("#oer-panel .oer-distance")!.textContent)
      .toBe("hop 2");

    app.focusFormula("f3"); // back to the anchor: full list, rating kept
    rows = Array.from(
      document.querySelectorAll<HTMLElement>("#oer-panel .oer-row"),
      (el) => el.dataset.oerId);
    expect(rows).toEqual(["oer1", "oer2", "oer3", "oer4"]);
    const rated = document.querySelector('.oer-row[data-oer-id="oer2"]')!;
    expect(rated.classList.contains("rated")).toBe(true);
    expect(stub.judgments.length).toBe(1);
  });

  it("rolls back and offers retry when the judgment post fails", async () => {
    const { app, stub } = buildApp();
    await submit(app);
    stub.setFailJudgments(true);
    const row = document.querySelector('.oer-row[data-oer-id="oer4"]')!;
    (row.querySelector("button.rate-bad") as HTMLButtonElement).click();
    await new Promise((resolve) => setTimeout(resolve, 0));

    expect(stub.judgments.length).toBe(0);
    const errorBox = document.getElementById("error-box")!;
    expect(errorBox.classList.contains("visible")).toBe(true);
    expect(errorBox.textContent).toContain("rating failed");
    const retry = errorBox.querySelector("button.retry") as HTMLButtonElement;
    expect(retry).not.toBeNull();

    stub.setFailJudgments(false);
    retry.click();
    await new Promise((resolve) => setTimeout(resolve, 0));
    expect(stub.judgments).toEqual([
      { request_id: "req-123", oer_id: "oer4", rating: "Bad" },
    ]);
  });

  it("surfaces a stale request id as a service 404", async () => {
    const { app, stub } = buildApp();
    await submit(app);
    // simulate staleness: the state still holds req-123 but the service
    // forgot it (e.g. log wiped); patch the state's request id instead
    app.state.requestId = "stale-id";
    const row = document.querySelector('.oer-row[data-oer-id="oer1"]')!;
    (row.querySelector("button.rate-good") as HTMLButtonElement).click();
    await new Promise((resolve) => setTimeout(resolve, 0));
    expect(stub.judgments.length).toBe(0);
    expect(document.getElementById("error-box")!.textContent)
      .toContain("unknown request 'stale-id'");
  });

  it("shows service parse errors inline on submit", async () => {
    const stub = serviceFetchStub();
    const failing: typeof fetch = async (input, init) => {
      if (String(input).includes("/recommend")) {
        return new Response(
          JSON.stringify({ detail: "missing argument of \\frac (byte 7)" }),
          { status: 400 });
      }
      return stub.impl(input, init);
    };
    mountDom();
    const app = new App(
      {
        form: document.getElementById("query-form") as HTMLFormElement,
        graphContainer: document.getElementById("subgraph")!,
        panelContainer: document.getElementById("oer-panel")!,
        errorBox: document.getElementById("error-box")!,
      },
      new ServiceClient("", failing),
    );
    await app.submitQuery({ latex: "\\frac{1}", context: "c" });
    expect(document.getElementById("error-box")!.textContent)
      .toContain("missing argument");
  });

  it("shows an explicit empty state when no resources come back", async () => {
    const stub = serviceFetchStub();
    const empty: typeof fetch = async (input, init) => {
      if (String(input).includes("/recommend")) {
        return new Response(JSON.stringify({
          request_id: "req-empty", anchor: "f3", results: [],
        }), { status: 200 });
      }
      return stub.impl(input, init);
    };
    mountDom();
    const app = new App(
      {
        form: document.getElementById("query-form") as HTMLFormElement,
        graphContainer: document.getElementById("subgraph")!,
        panelContainer: document.getElementById("oer-panel")!,
        errorBox: document.getElementById("error-box")!,
      },
      new ServiceClient("", empty),
    );
    await submit(app);
    expect(document.querySelector("#oer-panel .panel-heading")!.textContent)
      .toContain("no resources");
  });
});
