import { ServiceClient, ServiceError } from "./api.js";
import { SubgraphView } from "./graph.js";
import { OerPanel } from "./panel.js";
import { ViewState } from "./state.js";
import { QueryInput } from "./types.js";

export interface AppElements {
  form: HTMLFormElement;
  graphContainer: HTMLElement;
  panelContainer: HTMLElement;
  errorBox: HTMLElement;
}

// enough depth to populate per-ancestor panels without a second query
const RESULT_POOL_SIZE = 40;

/**
 * Wires the query form, the subgraph view and the resource panel together.
 * One recommendation request is in flight at a time; vertex clicks only
 * re-filter the already-returned results, so the request id (and therefore
 * judgment attribution) stays stable while exploring.
 */
export class App {
  readonly state = new ViewState();
  readonly graph: SubgraphView;
  readonly panel: OerPanel;
  private inFlight = false;

  constructor(
    private readonly elements: AppElements,
    private readonly client: ServiceClient,
  ) {
    this.graph = new SubgraphView(elements.graphContainer, {
      onVertexClick: (id) => this.focusFormula(id),
    });
    this.panel = new OerPanel(elements.panelContainer, this.state, client, {
      onError: (message, retry) => this.showError(message, retry),
      onRated: () => this.clearError(),
    });
    elements.form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submitQuery(this.readForm());
    });
  }

  private readForm(): QueryInput {
    const data = new FormData(this.elements.form);
    const text = (name: string) => String(data.get(name) ?? "").trim();
    const list = (name: string) =>
      text(name).split(",").map((s) => s.trim()).filter(Boolean);
    return {
      latex: text("latex"),
      context: text("context"),
      question: text("question") || undefined,
      abstract: text("abstract") || undefined,
      keywords: list("keywords"),
      topics: list("topics"),
    };
  }

  async submitQuery(query: QueryInput): Promise<void> {
    if (this.inFlight) {
      return;
    }
    this.inFlight = true;
    this.clearError();
    try {
      const recommendation = await this.client.recommend(query,
        RESULT_POOL_SIZE);
      const subgraph = await this.client.subgraph(recommendation.anchor, 3);
      this.state.applyRecommendation(recommendation, subgraph);
      this.graph.render(subgraph, this.state.focused);
      this.panel.render();
    } catch (error) {
      if (error instanceof ServiceError) {
        this.showError(error.message);
      } else {
        this.showError(error instanceof Error ? error.message : String(error));
      }
    } finally {
      this.inFlight = false;
    }
  }

  focusFormula(formulaId: string): void {
    if (!this.state.subgraph) {
      return;
    }
    this.state.focus(formulaId);
    this.graph.render(this.state.subgraph, this.state.focused);
    this.panel.render();
  }

  showError(message: string, retry?: () => void): void {
    const box = this.elements.errorBox;
    box.replaceChildren();
    box.classList.add("visible");
    const text = document.createElement("span");
    text.textContent = message;
    box.appendChild(text);
    if (retry) {
      const button = document.createElement("button");
      button.className = "retry";
      button.textContent = "retry";
      button.addEventListener("click", () => {
        this.clearError();
        retry();
      });
      box.appendChild(button);
    }
  }

  clearError(): void {
    this.elements.errorBox.replaceChildren();
    this.elements.errorBox.classList.remove("visible");
  }
}

export function mountApp(root: Document, baseUrl = ""): App {
  const require = (id: string): HTMLElement => {
    const element = root.getElementById(id);
    if (!element) {
      throw new Error(`missing element #${id}`);
    }
    return element;
  };
  return new App(
    {
      form: require("query-form") as HTMLFormElement,
      graphContainer: require("subgraph"),
      panelContainer: require("oer-panel"),
      errorBox: require("error-box"),
    },
    new ServiceClient(baseUrl),
  );
}
