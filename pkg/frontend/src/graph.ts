import { layoutSubgraph } from "./layout.js";
import { typesetFormula } from "./math.js";
import { SubgraphResponse } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface GraphCallbacks {
  onVertexClick?: (formulaId: string) => void;
}

/**
 * SVG renderer for the evolution neighborhood: distance rings around the
 * queried formula, one circle per formula vertex, one line per surviving
 * evolution edge.  Only edges present in the service payload are drawn (the
 * service already enforces the probability threshold).
 */
export class SubgraphView {
  private width = 640;
  private height = 480;
  private minProbability: number;

  constructor(
    private readonly container: HTMLElement,
    private readonly callbacks: GraphCallbacks = {},
    options: { minProbability?: number } = {},
  ) {
    this.minProbability = options.minProbability ?? 0;
  }

  render(subgraph: SubgraphResponse, focused: string | null): void {
    this.container.replaceChildren();
    const svg = document.createElementNS(SVG_NS, "svg");
    svg.setAttribute("viewBox", `0 0 ${this.width} ${this.height}`);
    svg.setAttribute("class", "subgraph");

    const edges = subgraph.edges.filter((e) => e.p >= this.minProbability);
    const placed = layoutSubgraph(subgraph.vertices, edges, this.width,
      this.height);
    const position = new Map(placed.map((v) => [v.id, v]));

    // distance rings 0..max
    const maxDistance = Math.max(1, ...subgraph.vertices.map((v) => v.distance));
    const ringGap = (Math.min(this.width, this.height) / 2 - 30) / maxDistance;
    for (let ring = 1; ring <= maxDistance; ring += 1) {
      const circle = document.createElementNS(SVG_NS, "circle");
      circle.setAttribute("class", "ring");
      circle.setAttribute("cx", String(this.width / 2));
      circle.setAttribute("cy", String(this.height / 2));
      circle.setAttribute("r", String(ring * ringGap));
      svg.appendChild(circle);
    }

    for (const edge of edges) {
      const src = position.get(edge.src);
      const dst = position.get(edge.dst);
      if (!src || !dst) continue;
      const line = document.createElementNS(SVG_NS, "line");
      line.setAttribute("class", "edge");
      line.setAttribute("x1", String(src.x));
      line.setAttribute("y1", String(src.y));
      line.setAttribute("x2", String(dst.x));
      line.setAttribute("y2", String(dst.y));
      line.setAttribute("stroke-opacity", String(0.25 + 0.75 * edge.p));
      line.dataset.src = edge.src;
      line.dataset.dst = edge.dst;
      svg.appendChild(line);
    }

    for (const vertex of placed) {
      const group = document.createElementNS(SVG_NS, "g");
      group.setAttribute("class",
        `vertex distance-${vertex.distance}` +
        (vertex.id === focused ? " focused" : ""));
      group.dataset.id = vertex.id;
      group.dataset.distance = String(vertex.distance);

      const circle = document.createElementNS(SVG_NS, "circle");
      circle.setAttribute("cx", String(vertex.x));
      circle.setAttribute("cy", String(vertex.y));
      circle.setAttribute("r", vertex.distance === 0 ? "14" : "9");
      group.appendChild(circle);

      // generality/complexity surface on hover via the title element
      const title = document.createElementNS(SVG_NS, "title");
      title.textContent =
        `${vertex.latex}\ngenerality ${vertex.lg.toFixed(4)}  ` +
        `complexity ${vertex.lc}  hop ${vertex.distance}`;
      group.appendChild(title);

      const badge = document.createElementNS(SVG_NS, "text");
      badge.setAttribute("class", "badge");
      badge.setAttribute("x", String(vertex.x));
      badge.setAttribute("y", String(vertex.y + 4));
      badge.textContent = String(vertex.distance);
      group.appendChild(badge);

      group.addEventListener("click", () => {
        this.callbacks.onVertexClick?.(vertex.id);
      });
      svg.appendChild(group);
    }
    this.container.appendChild(svg);

    // typeset the focused formula under the graph
    const caption = document.createElement("div");
    caption.className = "graph-caption";
    const focusedVertex = subgraph.vertices.find((v) => v.id === focused);
    if (focusedVertex) {
      typesetFormula(focusedVertex.latex, caption);
    }
    this.container.appendChild(caption);
  }

  renderedVertexCount(): number {
    return this.container.querySelectorAll("g.vertex").length;
  }

  renderedEdgeCount(): number {
    return this.container.querySelectorAll("line.edge").length;
  }
}
