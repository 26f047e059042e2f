import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";
import type { Mock } from "vitest";

import { SuggestBox, SUGGEST_DEBOUNCE_MS } from "../src/suggest";
import { flushAsync, jsonResponse } from "./helpers";

const SUGGESTIONS = ["differential", "differential equations"];

let input: HTMLInputElement;
let list: HTMLElement;
let fetchMock: ReturnType<typeof vi.fn>;
let onPick: Mock<() => void>;

function makeBox(): SuggestBox {
  return new SuggestBox(input, list, onPick);
}

function type(box: SuggestBox, value: string, caret: number): void {
  input.value = value;
  input.setSelectionRange(caret, caret);
  box.update();
}

async function settle(): Promise<void> {
  await vi.advanceTimersByTimeAsync(SUGGEST_DEBOUNCE_MS);
  await flushAsync();
}

function key(name: string): KeyboardEvent {
  return new KeyboardEvent("keydown", { key: name });
}

beforeEach(() => {
  vi.useFakeTimers();
  document.body.innerHTML = '<input type="text"><ul hidden></ul>';
  input = document.querySelector("input")!;
  list = document.querySelector("ul")!;
  fetchMock = vi.fn(() =>
    Promise.resolve(jsonResponse({ suggestions: SUGGESTIONS })),
  );
  vi.stubGlobal("fetch", fetchMock);
  onPick = vi.fn<() => void>();
});

afterEach(() => {
  vi.unstubAllGlobals();
  vi.useRealTimers();
});

describe("SuggestBox opening", () => {
  it("queries for a two-character prefix and lists the results", async () => {
    const box = makeBox();
    type(box, "di", 2);
    await settle();
    expect(fetchMock).toHaveBeenCalledTimes(1);
    const url = fetchMock.mock.calls[0]![0] as string;
    expect(url).toBe("/api/suggest?prefix=di&k=8");
    expect(box.isOpen).toBe(true);
    const items = [...list.querySelectorAll("li")].map((li) => li.textContent);
    expect(items).toEqual(SUGGESTIONS);
  });

  it("stays closed for a single character", async () => {
    const box = makeBox();
    type(box, "z", 1);
    await settle();
    expect(fetchMock).not.toHaveBeenCalled();
    expect(box.isOpen).toBe(false);
  });

  it("stays closed when the caret sits in a math segment", async () => {
    const box = makeBox();
    type(box, "$abc$", 3);
    await settle();
    expect(fetchMock).not.toHaveBeenCalled();
    expect(box.isOpen).toBe(false);
  });

  it("closes when the service returns nothing", async () => {
    fetchMock.mockResolvedValue(jsonResponse({ suggestions: [] }));
    const box = makeBox();
    type(box, "zzz", 3);
    await settle();
    expect(box.isOpen).toBe(false);
  });

  it("swallows network failures", async () => {
    fetchMock.mockRejectedValue(new TypeError("offline"));
    const box = makeBox();
    type(box, "di", 2);
    await settle();
    expect(box.isOpen).toBe(false);
  });
});

describe("SuggestBox keyboard handling", () => {
  it("closes on Escape and consumes the key", async () => {
    const box = makeBox();
    type(box, "di", 2);
    await settle();
    expect(box.isOpen).toBe(true);
    expect(box.handleKey(key("Escape"))).toBe(true);
    expect(box.isOpen).toBe(false);
  });

  it("ignores keys while closed", () => {
    const box = makeBox();
    expect(box.handleKey(key("Escape"))).toBe(false);
    expect(box.handleKey(key("Enter"))).toBe(false);
  });

  it("replaces the token when Enter picks the highlighted entry", async () => {
    const box = makeBox();
    type(box, "di eq", 2);
    await settle();
    expect(box.handleKey(key("ArrowDown"))).toBe(true);
    expect(box.handleKey(key("Enter"))).toBe(true);
    expect(input.value).toBe("differential eq");
    expect(input.selectionStart).toBe("differential".length);
    expect(box.isOpen).toBe(false);
    expect(onPick).toHaveBeenCalledTimes(1);
  });

  it("leaves Enter to the form when nothing is highlighted", async () => {
    const box = makeBox();
    type(box, "di", 2);
    await settle();
    expect(box.handleKey(key("Enter"))).toBe(false);
    expect(input.value).toBe("di");
  });

  it("wraps the highlight with the arrow keys", async () => {
    const box = makeBox();
    type(box, "di", 2);
    await settle();
    box.handleKey(key("ArrowUp"));
    expect(list.children[1]!.classList.contains("active")).toBe(true);
    box.handleKey(key("ArrowDown"));
    expect(list.children[0]!.classList.contains("active")).toBe(true);
  });
});

describe("SuggestBox picking", () => {
  it("replaces the whole token on click, keeping the tail", async () => {
    const box = makeBox();
    type(box, "diffZ tail", 4);
    await settle();
    const second = list.children[1] as HTMLElement;
    second.dispatchEvent(new MouseEvent("mousedown", { bubbles: true }));
    expect(input.value).toBe("differential equations tail");
    expect(onPick).toHaveBeenCalledTimes(1);
  });

  it("aborts a stale lookup when the prefix changes", async () => {
    const signals: AbortSignal[] = [];
    fetchMock.mockImplementation((_url: string, init: RequestInit) => {
      signals.push(init.signal!);
      if (signals.length === 1) return new Promise(() => {});
      return Promise.resolve(jsonResponse({ suggestions: SUGGESTIONS }));
    });
    const box = makeBox();
    type(box, "di", 2);
    await settle();
    type(box, "dif", 3);
    await settle();
    expect(signals).toHaveLength(2);
    expect(signals[0]!.aborted).toBe(true);
    expect(box.isOpen).toBe(true);
  });
});
