/** Wires the query form, preview, autocomplete, and results together. */

import { ApiFailure, explainHit, searchDocs } from "./api";
import { nativeMathML, PreviewPane } from "./preview";
import {
  renderExplanation,
  renderExplanationError,
  renderResults,
  warningBox,
} from "./results";
import type { ResultHandlers } from "./results";
import { SuggestBox } from "./suggest";
import { emptyState, readState, stateParams, toggleFacet } from "./urlstate";
import type { MathMode, UiState } from "./urlstate";

const QUERY_HELP =
  "Mix text with formulae: TeX between dollars like $x^2+y$, " +
  "or pasted MathML like <math><mi>x</mi></math>.";
const MODE_HELP =
  "both matches presentation and content math, " +
  "pmml presentation only, cmml content only.";

export class App {
  private state: UiState = emptyState();
  private readonly expanded = new Set<string>();
  private searchSeq = 0;

  private readonly input: HTMLInputElement;
  private readonly modeSelect: HTMLSelectElement;
  private readonly facetsRoot: HTMLElement;
  private readonly resultsRoot: HTMLElement;
  private readonly preview: PreviewPane;
  private readonly suggest: SuggestBox;

  constructor(
    root: HTMLElement,
    private readonly win: Window = window,
  ) {
    root.innerHTML = `
      <header class="top">
        <h1>Formulary</h1>
        <form class="query-form" role="search">
          <div class="query-row">
            <input name="q" type="text" autocomplete="off" spellcheck="false"
                   placeholder="try: energy $E=mc^2$" title="${QUERY_HELP}">
            <select name="mathmode" title="${MODE_HELP}">
              <option value="both">both</option>
              <option value="pmml">pmml</option>
              <option value="cmml">cmml</option>
            </select>
            <button type="submit">Search</button>
          </div>
          <ul class="suggestions" role="listbox" hidden></ul>
          <div class="preview" hidden></div>
          <div class="banner" hidden></div>
        </form>
      </header>
      <div class="content">
        <aside class="facets"></aside>
        <main class="results"></main>
      </div>
    `;
    const form = root.querySelector<HTMLFormElement>(".query-form")!;
    this.input = root.querySelector<HTMLInputElement>("input[name=q]")!;
    this.modeSelect = root.querySelector<HTMLSelectElement>(
      "select[name=mathmode]",
    )!;
    this.facetsRoot = root.querySelector<HTMLElement>(".facets")!;
    this.resultsRoot = root.querySelector<HTMLElement>(".results")!;
    this.preview = new PreviewPane(
      root.querySelector<HTMLElement>(".preview")!,
      root.querySelector<HTMLElement>(".banner")!,
    );
    this.suggest = new SuggestBox(
      this.input,
      root.querySelector<HTMLElement>(".suggestions")!,
      () => this.refreshPreview(),
    );

    form.addEventListener("submit", (event) => {
      event.preventDefault();
      this.suggest.close();
      this.state = { ...this.state, q: this.input.value, page: 1 };
      this.runSearch(true);
    });
    this.input.addEventListener("input", () => {
      this.refreshPreview();
      this.suggest.update();
    });
    // Caret moves without edits also retarget the preview.
    this.input.addEventListener("click", () => this.refreshPreview());
    this.input.addEventListener("keyup", (event) => {
      if (event.key.startsWith("Arrow")) this.refreshPreview();
    });
    this.input.addEventListener("keydown", (event) => {
      if (this.suggest.handleKey(event)) event.preventDefault();
    });
    this.modeSelect.addEventListener("change", () => {
      this.state = {
        ...this.state,
        mathMode: this.modeSelect.value as MathMode,
        page: 1,
      };
      if (this.state.q !== "") this.runSearch(true);
    });
    this.win.addEventListener("popstate", () => {
      this.applyState(readState(this.win.location.search));
    });
  }

  init(): void {
    const doc = this.win.document;
    doc.documentElement.classList.toggle("no-mathml", !nativeMathML(doc));
    this.applyState(readState(this.win.location.search));
  }

  private refreshPreview(): void {
    const caret = this.input.selectionStart ?? this.input.value.length;
    this.preview.update(this.input.value, caret);
  }

  private applyState(state: UiState): void {
    this.state = state;
    this.input.value = state.q;
    this.modeSelect.value = state.mathMode;
    if (state.q.trim() === "") {
      this.facetsRoot.textContent = "";
      this.resultsRoot.textContent = "";
    } else {
      this.runSearch(false);
    }
  }

  private runSearch(push: boolean): void {
    if (push) {
      const params = stateParams(this.state);
      const url = `${this.win.location.pathname}?${params}`;
      this.win.history.pushState(null, "", url);
    }
    if (this.state.q.trim() === "") {
      this.facetsRoot.textContent = "";
      this.resultsRoot.textContent = "";
      return;
    }
    const seq = ++this.searchSeq;
    void searchDocs(stateParams(this.state))
      .then((response) => {
        if (seq !== this.searchSeq) return;
        renderResults(
          this.facetsRoot,
          this.resultsRoot,
          response,
          this.state,
          this.expanded,
          this.handlers(),
        );
      })
      .catch((error: unknown) => {
        if (seq !== this.searchSeq) return;
        this.renderFailure(error);
      });
  }

  private handlers(): ResultHandlers {
    return {
      onPage: (page) => {
        this.state = { ...this.state, page };
        this.runSearch(true);
      },
      onToggleFacet: (field, value) => {
        this.state = toggleFacet(this.state, field, value);
        this.runSearch(true);
      },
      onExplain: (docId, panel) => {
        panel.textContent = "loading";
        explainHit(stateParams(this.state), docId)
          .then((explanation) => renderExplanation(panel, explanation))
          .catch((error: unknown) => {
            const message =
              error instanceof ApiFailure
                ? error.message
                : "explanation unavailable";
            renderExplanationError(panel, message);
          });
      },
    };
  }

  private renderFailure(error: unknown): void {
    this.facetsRoot.textContent = "";
    this.resultsRoot.textContent = "";
    if (error instanceof ApiFailure) {
      const lines =
        error.warnings.length > 0 ? error.warnings : [error.message];
      this.resultsRoot.append(warningBox(lines));
    } else {
      this.resultsRoot.append(warningBox(["search service unreachable"]));
    }
    const empty = document.createElement("p");
    empty.className = "empty";
    empty.textContent = "No matching documents.";
    this.resultsRoot.append(empty);
  }
}
