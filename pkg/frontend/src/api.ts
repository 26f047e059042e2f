/**
 * Typed client for the search service JSON API.
 *
 * Every call funnels through `request`, which turns the server's
 * structured error envelope into an `ApiFailure` so callers can branch
 * on `code` (for example "no-usable-clauses") and surface `warnings`.
 */

export type SpanKind = "text-match" | "math-match";

export interface SnippetSpan {
  start: number;
  end: number;
  kind: SpanKind;
}

export interface Snippet {
  text: string;
  spans: SnippetSpan[];
}

export interface Hit {
  id: string;
  title: string;
  authors: string[];
  language: string;
  year: number;
  score: number;
  snippet: Snippet;
}

export interface FacetEntry {
  value: string;
  count: number;
}

export interface SearchResponse {
  total: number;
  page: number;
  hits: Hit[];
  facets: Record<string, FacetEntry[]>;
  warnings: string[];
}

export interface PreviewResponse {
  mathml: string;
  warnings: string[];
  content_mathml?: string;
}

export interface ExplainNode {
  clause: string;
  term: string;
  field: string;
  tf: number;
  idf: number;
  weight: number;
  beta: number;
  contribution: number;
}

export interface ExplainResponse {
  doc: string;
  total: number;
  beta: number;
  nodes: ExplainNode[];
  warnings: string[];
}

interface ErrorEnvelope {
  error?: {
    code?: string;
    message?: string;
    warnings?: string[];
  };
}

export class ApiFailure extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly warnings: string[] = [],
  ) {
    super(message);
    this.name = "ApiFailure";
  }
}

async function request<T>(input: string, init?: RequestInit): Promise<T> {
  const response = await fetch(input, init);
  const body = await response.json().catch(() => null);
  if (!response.ok) {
    const err = (body as ErrorEnvelope | null)?.error ?? {};
    throw new ApiFailure(
      response.status,
      err.code ?? "unknown",
      err.message ?? `request failed with status ${response.status}`,
      err.warnings ?? [],
    );
  }
  return body as T;
}

export function searchDocs(
  params: URLSearchParams,
  signal?: AbortSignal,
): Promise<SearchResponse> {
  return request(`/api/search?${params}`, { signal });
}

export function suggestTerms(
  prefix: string,
  k: number,
  signal?: AbortSignal,
): Promise<string[]> {
  const params = new URLSearchParams({ prefix, k: String(k) });
  return request<{ suggestions: string[] }>(`/api/suggest?${params}`, {
    signal,
  }).then((body) => body.suggestions);
}

export type PreviewInput = { latex: string } | { mathml: string };

export function previewMath(
  input: PreviewInput,
  signal?: AbortSignal,
): Promise<PreviewResponse> {
  return request("/api/preview", {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(input),
    signal,
  });
}

export function explainHit(
  params: URLSearchParams,
  docId: string,
  signal?: AbortSignal,
): Promise<ExplainResponse> {
  const qs = new URLSearchParams(params);
  qs.set("doc", docId);
  return request(`/api/explain?${qs}`, { signal });
}
