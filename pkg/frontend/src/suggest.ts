/**
 * Autocomplete dropdown fed by the suggestion endpoint.
 *
 * Opens for text token prefixes of two or more characters, never inside
 * math segments.  Escape closes it, picking an entry replaces the whole
 * token under the caret, and network errors are swallowed.
 */

import { suggestTerms } from "./api";
import { tokenAt } from "./segments";
import type { TokenAtCaret } from "./segments";

export const SUGGEST_DEBOUNCE_MS = 150;
const MAX_SUGGESTIONS = 8;

export class SuggestBox {
  private timer: number | undefined;
  private inflight: AbortController | null = null;
  private token: TokenAtCaret | null = null;
  private active = -1;

  constructor(
    private readonly input: HTMLInputElement,
    private readonly list: HTMLElement,
    private readonly onPick: () => void = () => {},
  ) {
    list.hidden = true;
    // mousedown fires before the input loses focus, unlike click.
    list.addEventListener("mousedown", (event) => {
      const item = (event.target as HTMLElement).closest("li");
      if (item === null) return;
      event.preventDefault();
      this.pick(Number(item.dataset.index));
    });
  }

  get isOpen(): boolean {
    return !this.list.hidden;
  }

  update(): void {
    window.clearTimeout(this.timer);
    this.timer = window.setTimeout(() => {
      void this.refresh();
    }, SUGGEST_DEBOUNCE_MS);
  }

  close(): void {
    window.clearTimeout(this.timer);
    this.inflight?.abort();
    this.inflight = null;
    this.list.hidden = true;
    this.list.textContent = "";
    this.active = -1;
  }

  /** Keyboard hook for the input; true when the key was consumed. */
  handleKey(event: KeyboardEvent): boolean {
    if (!this.isOpen) return false;
    switch (event.key) {
      case "Escape":
        this.close();
        return true;
      case "ArrowDown":
        this.move(1);
        return true;
      case "ArrowUp":
        this.move(-1);
        return true;
      case "Enter":
        if (this.active >= 0) {
          this.pick(this.active);
          return true;
        }
        return false;
      default:
        return false;
    }
  }

  private async refresh(): Promise<void> {
    const caret = this.input.selectionStart ?? this.input.value.length;
    const token = tokenAt(this.input.value, caret);
    if (token === null) {
      this.close();
      return;
    }
    this.token = token;
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    try {
      const suggestions = await suggestTerms(
        token.prefix,
        MAX_SUGGESTIONS,
        controller.signal,
      );
      if (controller.signal.aborted) return;
      this.render(suggestions);
    } catch {
      // Suggestions are best effort; a failed fetch keeps the box shut.
      if (!controller.signal.aborted) this.close();
    } finally {
      if (this.inflight === controller) this.inflight = null;
    }
  }

  private render(suggestions: string[]): void {
    if (suggestions.length === 0) {
      this.close();
      return;
    }
    this.list.textContent = "";
    suggestions.forEach((text, index) => {
      const item = document.createElement("li");
      item.setAttribute("role", "option");
      item.textContent = text;
      item.dataset.index = String(index);
      this.list.append(item);
    });
    this.active = -1;
    this.list.hidden = false;
  }

  private pick(index: number): void {
    const token = this.token;
    const item = this.list.children[index] as HTMLElement | undefined;
    if (!token || !item) return;
    const replacement = item.textContent ?? "";
    const value = this.input.value;
    this.input.value =
      value.slice(0, token.start) + replacement + value.slice(token.end);
    const caret = token.start + replacement.length;
    this.input.setSelectionRange(caret, caret);
    this.close();
    this.input.focus();
    this.onPick();
  }

  private move(delta: number): void {
    const count = this.list.children.length;
    if (count === 0) return;
    if (this.active === -1) {
      this.active = delta > 0 ? 0 : count - 1;
    } else {
      this.active = (this.active + delta + count) % count;
    }
    for (let i = 0; i < count; i += 1) {
      this.list.children[i]!.classList.toggle("active", i === this.active);
    }
  }
}
