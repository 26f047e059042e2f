/**
 * Live formula preview for the math segment under the caret.
 *
 * Keystrokes are debounced and an in-flight request is aborted when a
 * newer one starts.  A failed round trip keeps the last rendering on
 * screen and flags it stale instead of blanking the pane.
 */

import { previewMath } from "./api";
import type { PreviewInput } from "./api";
import { segmentAt } from "./segments";

export const PREVIEW_DEBOUNCE_MS = 250;

/** True when the engine lays out MathML natively (jsdom does not). */
export function nativeMathML(doc: Document = document): boolean {
  const probe = doc.createElement("div");
  probe.style.position = "absolute";
  probe.style.visibility = "hidden";
  probe.innerHTML = '<math><mspace width="24px"></mspace></math>';
  doc.body.append(probe);
  const space = probe.querySelector("mspace");
  const width = space ? space.getBoundingClientRect().width : 0;
  probe.remove();
  return width > 10;
}

export class PreviewPane {
  private timer: number | undefined;
  private inflight: AbortController | null = null;
  private lastKey: string | null = null;

  constructor(
    private readonly pane: HTMLElement,
    private readonly banner: HTMLElement,
  ) {
    pane.hidden = true;
    banner.hidden = true;
  }

  /** Schedule a refresh for the segment under the caret. */
  update(raw: string, caret: number): void {
    window.clearTimeout(this.timer);
    this.timer = window.setTimeout(() => {
      void this.refresh(raw, caret);
    }, PREVIEW_DEBOUNCE_MS);
  }

  private clear(): void {
    this.lastKey = null;
    this.inflight?.abort();
    this.inflight = null;
    this.pane.hidden = true;
    this.pane.classList.remove("stale");
    this.banner.hidden = true;
  }

  private async refresh(raw: string, caret: number): Promise<void> {
    const segment = segmentAt(raw, caret);
    if (segment === null || segment.body.trim() === "") {
      this.clear();
      return;
    }
    const key = `${segment.encoding}:${segment.body}`;
    if (key === this.lastKey) return;
    const input: PreviewInput =
      segment.encoding === "latex"
        ? { latex: segment.body }
        : { mathml: segment.body };
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    try {
      const result = await previewMath(input, controller.signal);
      if (controller.signal.aborted) return;
      this.lastKey = key;
      this.pane.classList.remove("stale");
      if (result.mathml === "") {
        this.pane.hidden = true;
        this.pane.textContent = "";
      } else {
        this.pane.hidden = false;
        // The markup is serialized by the server from its own parsed
        // tree, so it stays within the whitelisted MathML subset.
        this.pane.innerHTML = result.mathml;
      }
      this.banner.hidden = result.warnings.length === 0;
      this.banner.textContent = result.warnings.join("; ");
    } catch {
      if (controller.signal.aborted) return;
      // Network trouble: keep whatever rendered last, mark it stale.
      this.pane.classList.add("stale");
    } finally {
      if (this.inflight === controller) this.inflight = null;
    }
  }
}
