/** Snippet rendering: API span offsets map one to one onto mark elements. */

import type { Snippet } from "./api";

export function renderSnippet(snippet: Snippet): DocumentFragment {
  const fragment = document.createDocumentFragment();
  const spans = [...snippet.spans].sort((a, b) => a.start - b.start);
  let cursor = 0;
  for (const span of spans) {
    const start = Math.max(span.start, cursor);
    const end = Math.min(span.end, snippet.text.length);
    if (end <= start) continue;
    if (start > cursor) {
      fragment.append(snippet.text.slice(cursor, start));
    }
    const mark = document.createElement("mark");
    mark.className = span.kind;
    mark.textContent = snippet.text.slice(start, end);
    fragment.append(mark);
    cursor = end;
  }
  if (cursor < snippet.text.length) {
    fragment.append(snippet.text.slice(cursor));
  }
  return fragment;
}
