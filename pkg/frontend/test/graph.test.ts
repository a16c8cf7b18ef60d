import { beforeEach, describe, expect, it, vi } from "vitest";

import { SubgraphView } from "../src/graph.js";
import { layoutSubgraph } from "../src/layout.js";
import { typesetFormula } from "../src/math.js";
import { SUBGRAPH } from "./fixtures.js";

describe("SubgraphView", () => {
  let container: HTMLElement;

  beforeEach(() => {
    document.body.innerHTML = '<div id="g"></div>';
    container = document.getElementById("g")!;
  });

  it("renders exactly the payload vertex and edge counts", () => {
    const view = new SubgraphView(container);
    view.render(SUBGRAPH, "f3");
    expect(view.renderedVertexCount()).toBe(SUBGRAPH.vertices.length);
    expect(view.renderedEdgeCount()).toBe(SUBGRAPH.edges.length);
  });

  it("annotates vertices with their hop distance", () => {
    new SubgraphView(container).render(SUBGRAPH, "f3");
    const byId = new Map(
      Array.from(container.querySelectorAll<SVGGElement>("g.vertex"))
        .map((g) => [g.dataset.id, g.dataset.distance]));
    expect(byId.get("f3")).toBe("0");
    expect(byId.get("f2")).toBe("1");
    expect(byId.get("f5")).toBe("2");
  });

  it("drops edges below the probability floor when one is set", () => {
    const view = new SubgraphView(container, {}, { minProbability: 0.75 });
    view.render(SUBGRAPH, "f3");
    // only 0.8 and 0.9 survive
    expect(view.renderedEdgeCount()).toBe(2);
  });

  it("marks the focused vertex and fires click callbacks", () => {
    const onVertexClick = vi.fn();
    const view = new SubgraphView(container, { onVertexClick });
    view.render(SUBGRAPH, "f2");
    const focused = container.querySelector("g.vertex.focused") as SVGGElement;
    expect(focused.dataset.id).toBe("f2");
    (container.querySelector('g.vertex[data-id="f4"]') as SVGGElement)
      .dispatchEvent(new MouseEvent("click"));
    expect(onVertexClick).toHaveBeenCalledWith("f4");
  });
});

describe("layoutSubgraph", () => {
  it("pins vertices to rings by hop distance", () => {
    const placed = layoutSubgraph(SUBGRAPH.vertices, SUBGRAPH.edges, 640,
      480);
    const center = placed.find((v) => v.id === "f3")!;
    expect(center.x).toBeCloseTo(320);
    expect(center.y).toBeCloseTo(240);
    const radius = (v: { x: number; y: number }) =>
      Math.hypot(v.x - 320, v.y - 240);
    const hop1 = placed.filter((v) => v.distance === 1).map(radius);
    const hop2 = placed.filter((v) => v.distance === 2).map(radius);
    expect(Math.max(...hop1)).toBeLessThan(Math.min(...hop2));
    // deterministic: same inputs, same placement
    const again = layoutSubgraph(SUBGRAPH.vertices, SUBGRAPH.edges, 640, 480);
    expect(again).toEqual(placed);
  });
});

describe("typesetFormula", () => {
  it("falls back to plain source without a page renderer", () => {
    const element = document.createElement("div");
    typesetFormula("x^{2}", element);
    expect(element.dataset.renderer).toBe("plain");
    expect(element.querySelector("code")!.textContent).toBe("x^{2}");
  });

  it("delegates to the page math renderer when present", () => {
    const render = vi.fn((latex: string, el: HTMLElement) => {
      el.textContent = `typeset:${latex}`;
    });
    (globalThis as { katex?: unknown }).katex = { render };
    try {
      const element = document.createElement("div");
      typesetFormula("a+b", element);
      expect(render).toHaveBeenCalledOnce();
      expect(element.dataset.renderer).toBe("katex");
    } finally {
      delete (globalThis as { katex?: unknown }).katex;
    }
  });
});
