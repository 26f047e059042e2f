import { describe, expect, it } from "vitest";

import type { Snippet } from "../src/api";
import { renderSnippet } from "../src/snippets";

const FIXTURE: Snippet = {
  text: "relativistic energy obeys ⟦f#0⟧ at rest",
  spans: [
    { start: 13, end: 19, kind: "text-match" },
    { start: 26, end: 31, kind: "math-match" },
  ],
};

describe("renderSnippet", () => {
  it("marks exactly the API-reported offsets", () => {
    const fragment = renderSnippet(FIXTURE);
    const marks = [...fragment.querySelectorAll("mark")];
    expect(marks).toHaveLength(2);
    for (const [i, span] of FIXTURE.spans.entries()) {
      expect(marks[i]!.textContent).toBe(
        FIXTURE.text.slice(span.start, span.end),
      );
    }
  });

  it("types each mark by the span kind, one class per kind", () => {
    const fragment = renderSnippet(FIXTURE);
    const classes = [...fragment.querySelectorAll("mark")].map(
      (m) => m.className,
    );
    expect(classes).toEqual(["text-match", "math-match"]);
  });

  it("reassembles the full snippet text around the marks", () => {
    expect(renderSnippet(FIXTURE).textContent).toBe(FIXTURE.text);
  });

  it("renders span-free snippets as one text node", () => {
    const fragment = renderSnippet({ text: "plain words", spans: [] });
    expect(fragment.childNodes).toHaveLength(1);
    expect(fragment.textContent).toBe("plain words");
  });

  it("orders unsorted spans by offset before marking", () => {
    const fragment = renderSnippet({
      text: "abcdef",
      spans: [
        { start: 4, end: 6, kind: "math-match" },
        { start: 0, end: 2, kind: "text-match" },
      ],
    });
    const marks = [...fragment.querySelectorAll("mark")];
    expect(marks.map((m) => m.textContent)).toEqual(["ab", "ef"]);
    expect(fragment.textContent).toBe("abcdef");
  });

  it("clamps spans that exceed the text", () => {
    const fragment = renderSnippet({
      text: "short",
      spans: [{ start: 3, end: 40, kind: "text-match" }],
    });
    expect(fragment.querySelector("mark")!.textContent).toBe("rt");
    expect(fragment.textContent).toBe("short");
  });
});
