/**
 * Client-side mirror of the server's query segmentation.
 *
 * `$...$` spans parse as TeX and `<math ...>...</math>` spans as MathML;
 * everything else is text.  The preview pane and the autocomplete key
 * off the segment or token under the caret, so the scan must agree with
 * the server about offsets: an unpaired `$` is plain text, `<mathx>` is
 * not a math tag, and `<math .../>` may self-close.
 */

const MATH_TAG = /<(\/?)math(?![0-9A-Za-z])[^>]*>/g;
const WORD_CHAR = /[\p{L}\p{N}]/u;

export interface MathSegment {
  /** Offset of the opening delimiter. */
  start: number;
  /** Offset one past the closing delimiter. */
  end: number;
  encoding: "latex" | "mathml";
  /** TeX without the dollars, MathML with its tags. */
  body: string;
}

function findMathEnd(raw: string, start: number): number | null {
  const tag = new RegExp(MATH_TAG.source, "g");
  tag.lastIndex = start;
  let depth = 0;
  let match: RegExpExecArray | null;
  while ((match = tag.exec(raw)) !== null) {
    if (match[1] === "/") {
      depth -= 1;
      if (depth === 0) return match.index + match[0].length;
    } else if (match[0].endsWith("/>")) {
      if (depth === 0) return match.index + match[0].length;
    } else {
      depth += 1;
    }
  }
  return null;
}

export function mathSegments(raw: string): MathSegment[] {
  const segments: MathSegment[] = [];
  let i = 0;
  while (i < raw.length) {
    if (raw[i] === "$") {
      const closing = raw.indexOf("$", i + 1);
      if (closing === -1) break;
      segments.push({
        start: i,
        end: closing + 1,
        encoding: "latex",
        body: raw.slice(i + 1, closing),
      });
      i = closing + 1;
      continue;
    }
    if (raw.startsWith("<math", i) && !WORD_CHAR.test(raw[i + 5] ?? "")) {
      const end = findMathEnd(raw, i);
      if (end !== null) {
        segments.push({
          start: i,
          end,
          encoding: "mathml",
          body: raw.slice(i, end),
        });
        i = end;
        continue;
      }
    }
    i += 1;
  }
  return segments;
}

/** The math segment whose delimiters enclose the caret, if any. */
export function segmentAt(raw: string, caret: number): MathSegment | null {
  for (const segment of mathSegments(raw)) {
    if (caret >= segment.start && caret <= segment.end) return segment;
  }
  return null;
}

export interface TokenAtCaret {
  start: number;
  /** End of the whole token; may extend past the caret. */
  end: number;
  /** Token text before the caret, the autocomplete lookup key. */
  prefix: string;
}

/**
 * The text token under the caret, or null when the caret sits inside a
 * math segment or the prefix is shorter than two characters.
 */
export function tokenAt(raw: string, caret: number): TokenAtCaret | null {
  if (segmentAt(raw, caret) !== null) return null;
  let start = caret;
  while (start > 0 && WORD_CHAR.test(raw[start - 1] ?? "")) start -= 1;
  let end = caret;
  while (end < raw.length && WORD_CHAR.test(raw[end] ?? "")) end += 1;
  const prefix = raw.slice(start, caret);
  if (prefix.length < 2) return null;
  return { start, end, prefix };
}
