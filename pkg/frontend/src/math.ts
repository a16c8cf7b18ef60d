// Formula typesetting is delegated to a standard math renderer when the
// page provides one (KaTeX loaded via its script tag exposes a global);
// otherwise the raw source is shown in a styled code element so the client
// degrades gracefully offline.

interface KatexLike {
  render(latex: string, element: HTMLElement, options?: object): void;
}

function katexGlobal(): KatexLike | null {
  const candidate = (globalThis as { katex?: unknown }).katex;
  if (
    candidate &&
    typeof (candidate as KatexLike).render === "function"
  ) {
    return candidate as KatexLike;
  }
  return null;
}

export function typesetFormula(latex: string, element: HTMLElement): void {
  element.replaceChildren();
  const katex = katexGlobal();
  if (katex) {
    try {
      katex.render(latex, element, { throwOnError: false });
      element.dataset.renderer = "katex";
      return;
    } catch {
      // fall through to the plain rendering
    }
  }
  const code = document.createElement("code");
  code.className = "formula-source";
  code.textContent = latex;
  element.appendChild(code);
  element.dataset.renderer = "plain";
}
