/**
 * Shareable UI state kept in the page's query string.
 *
 * `stateParams` is the single serializer used both for the address bar
 * and for /api/search calls, so selected facets and the math mode are
 * reflected in the next request by construction.
 */

export type MathMode = "both" | "pmml" | "cmml";

export const FACET_FIELDS = ["language", "author", "year"] as const;
export type FacetField = (typeof FACET_FIELDS)[number];

export interface UiState {
  q: string;
  page: number;
  mathMode: MathMode;
  facets: Record<FacetField, string[]>;
}

export function emptyState(): UiState {
  return {
    q: "",
    page: 1,
    mathMode: "both",
    facets: { language: [], author: [], year: [] },
  };
}

export function readState(search: string): UiState {
  const params = new URLSearchParams(search);
  const state = emptyState();
  state.q = params.get("q") ?? "";
  const page = Number(params.get("page") ?? "1");
  if (Number.isInteger(page) && page >= 1) state.page = page;
  const mode = params.get("mathmode");
  if (mode === "both" || mode === "pmml" || mode === "cmml") {
    state.mathMode = mode;
  }
  for (const field of FACET_FIELDS) {
    state.facets[field] = params
      .getAll(`facet.${field}`)
      .filter((value) => value !== "");
  }
  return state;
}

export function stateParams(state: UiState): URLSearchParams {
  const params = new URLSearchParams();
  params.set("q", state.q);
  if (state.page > 1) params.set("page", String(state.page));
  if (state.mathMode !== "both") params.set("mathmode", state.mathMode);
  for (const field of FACET_FIELDS) {
    // Sorted values keep shared URLs byte-stable for the same selection.
    for (const value of [...state.facets[field]].sort()) {
      params.append(`facet.${field}`, value);
    }
  }
  return params;
}

/** Toggle one facet value; any narrowing change restarts at page 1. */
export function toggleFacet(
  state: UiState,
  field: FacetField,
  value: string,
): UiState {
  const current = state.facets[field];
  const next = current.includes(value)
    ? current.filter((v) => v !== value)
    : [...current, value];
  return { ...state, page: 1, facets: { ...state.facets, [field]: next } };
}
