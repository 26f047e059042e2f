/**
 * Result list, facet sidebar, and pagination.
 *
 * Scores come straight from the API response; the exact value rides
 * along in a data attribute and only the displayed text is rounded.
 */

import type { ExplainResponse, Hit, SearchResponse } from "./api";
import { renderSnippet } from "./snippets";
import { FACET_FIELDS } from "./urlstate";
import type { FacetField, UiState } from "./urlstate";

export const PAGE_SIZE = 10;

export interface ResultHandlers {
  onPage(page: number): void;
  onToggleFacet(field: FacetField, value: string): void;
  /** Called when an explanation panel opens with no content yet. */
  onExplain(docId: string, panel: HTMLElement): void;
}

export function warningBox(warnings: string[]): HTMLElement {
  const box = document.createElement("div");
  box.className = "warnings";
  for (const warning of warnings) {
    const line = document.createElement("p");
    line.textContent = warning;
    box.append(line);
  }
  return box;
}

function renderHit(
  hit: Hit,
  expanded: Set<string>,
  handlers: ResultHandlers,
): HTMLElement {
  const item = document.createElement("li");
  item.className = "hit";
  item.dataset.doc = hit.id;

  const heading = document.createElement("h3");
  heading.textContent = hit.title;
  const score = document.createElement("span");
  score.className = "score";
  score.dataset.score = String(hit.score);
  score.textContent = hit.score.toFixed(4);
  heading.append(" ", score);

  const meta = document.createElement("p");
  meta.className = "meta";
  const year = hit.year > 0 ? String(hit.year) : "";
  meta.textContent = [hit.authors.join(", "), year, hit.language]
    .filter(Boolean)
    .join(" · ");

  const snippet = document.createElement("p");
  snippet.className = "snippet";
  snippet.append(renderSnippet(hit.snippet));

  const toggle = document.createElement("button");
  toggle.type = "button";
  toggle.className = "explain-toggle";
  toggle.textContent = "explain";

  const panel = document.createElement("div");
  panel.className = "explanation";
  panel.hidden = !expanded.has(hit.id);

  toggle.addEventListener("click", () => {
    panel.hidden = !panel.hidden;
    if (panel.hidden) {
      expanded.delete(hit.id);
    } else {
      expanded.add(hit.id);
      if (panel.childElementCount === 0) handlers.onExplain(hit.id, panel);
    }
  });
  if (!panel.hidden) handlers.onExplain(hit.id, panel);

  item.append(heading, meta, snippet, toggle, panel);
  return item;
}

function renderFacets(
  root: HTMLElement,
  response: SearchResponse,
  state: UiState,
  handlers: ResultHandlers,
): void {
  root.textContent = "";
  for (const field of FACET_FIELDS) {
    const entries = [...(response.facets[field] ?? [])];
    // A selected value filtered down to zero hits must stay visible,
    // otherwise it could never be unselected.
    const listed = entries.map((entry) => entry.value);
    for (const value of [...state.facets[field]].sort()) {
      if (!listed.includes(value)) entries.push({ value, count: 0 });
    }
    if (entries.length === 0) continue;
    const group = document.createElement("section");
    group.className = "facet-group";
    group.dataset.field = field;
    const title = document.createElement("h4");
    title.textContent = field;
    const list = document.createElement("ul");
    for (const entry of entries) {
      const row = document.createElement("li");
      const label = document.createElement("label");
      const box = document.createElement("input");
      box.type = "checkbox";
      box.value = entry.value;
      box.checked = state.facets[field].includes(entry.value);
      box.addEventListener("change", () => {
        handlers.onToggleFacet(field, entry.value);
      });
      label.append(box, ` ${entry.value} (${entry.count})`);
      row.append(label);
      list.append(row);
    }
    group.append(title, list);
    root.append(group);
  }
}

function renderPagination(
  response: SearchResponse,
  handlers: ResultHandlers,
): HTMLElement {
  const pageCount = Math.max(1, Math.ceil(response.total / PAGE_SIZE));
  const nav = document.createElement("nav");
  nav.className = "pager";
  const prev = document.createElement("button");
  prev.type = "button";
  prev.textContent = "previous";
  prev.disabled = response.page <= 1;
  prev.addEventListener("click", () => handlers.onPage(response.page - 1));
  const label = document.createElement("span");
  label.textContent = `page ${response.page} of ${pageCount}`;
  const next = document.createElement("button");
  next.type = "button";
  next.textContent = "next";
  next.disabled = response.page >= pageCount;
  next.addEventListener("click", () => handlers.onPage(response.page + 1));
  nav.append(prev, label, next);
  return nav;
}

export function renderResults(
  facetsRoot: HTMLElement,
  resultsRoot: HTMLElement,
  response: SearchResponse,
  state: UiState,
  expanded: Set<string>,
  handlers: ResultHandlers,
): void {
  renderFacets(facetsRoot, response, state, handlers);
  resultsRoot.textContent = "";
  if (response.warnings.length > 0) {
    resultsRoot.append(warningBox(response.warnings));
  }
  if (response.hits.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty";
    empty.textContent = "No matching documents.";
    resultsRoot.append(empty);
    return;
  }
  const list = document.createElement("ol");
  list.className = "hits";
  list.start = (response.page - 1) * PAGE_SIZE + 1;
  for (const hit of response.hits) {
    list.append(renderHit(hit, expanded, handlers));
  }
  resultsRoot.append(list, renderPagination(response, handlers));
}

const EXPLAIN_COLUMNS = [
  "clause",
  "term",
  "field",
  "tf",
  "idf",
  "weight",
  "beta",
  "contribution",
];

export function renderExplanation(
  panel: HTMLElement,
  explanation: ExplainResponse,
): void {
  panel.textContent = "";
  const table = document.createElement("table");
  const head = table.createTHead().insertRow();
  for (const name of EXPLAIN_COLUMNS) {
    const cell = document.createElement("th");
    cell.textContent = name;
    head.append(cell);
  }
  const body = table.createTBody();
  for (const node of explanation.nodes) {
    const row = body.insertRow();
    row.insertCell().textContent = node.clause;
    row.insertCell().textContent = node.term;
    row.insertCell().textContent = node.field;
    const numbers = [node.tf, node.idf, node.weight, node.beta, node.contribution];
    for (const value of numbers) {
      row.insertCell().textContent = value.toFixed(4);
    }
  }
  const foot = table.createTFoot().insertRow();
  const label = foot.insertCell();
  label.colSpan = EXPLAIN_COLUMNS.length - 1;
  label.textContent = "total";
  const total = foot.insertCell();
  total.className = "total";
  total.dataset.total = String(explanation.total);
  total.textContent = explanation.total.toFixed(4);
  panel.append(table);
}

export function renderExplanationError(
  panel: HTMLElement,
  message: string,
): void {
  panel.textContent = "";
  const note = document.createElement("p");
  note.className = "error";
  note.textContent = message;
  panel.append(note);
}
