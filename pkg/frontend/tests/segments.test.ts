import { describe, expect, it } from "vitest";

import { mathSegments, segmentAt, tokenAt } from "../src/segments";

describe("mathSegments", () => {
  it("finds a dollar-delimited TeX segment", () => {
    const raw = "Cauchy integral $\\oint f$";
    expect(mathSegments(raw)).toEqual([
      { start: 16, end: 25, encoding: "latex", body: "\\oint f" },
    ]);
  });

  it("pairs dollars left to right and leaves a trailing one as text", () => {
    const segments = mathSegments("a $x$ b $y$ c $z");
    expect(segments.map((s) => s.body)).toEqual(["x", "y"]);
  });

  it("treats a lone dollar amount as plain text", () => {
    expect(mathSegments("cost $5 total")).toEqual([]);
  });

  it("finds a MathML element with its tags", () => {
    const raw = "before <math><mi>x</mi></math> after";
    const [segment] = mathSegments(raw);
    expect(segment).toMatchObject({
      encoding: "mathml",
      body: "<math><mi>x</mi></math>",
    });
    expect(raw.slice(segment!.start, segment!.end)).toBe(segment!.body);
  });

  it("accepts a self-closing math tag", () => {
    expect(mathSegments("x <math/> y")).toHaveLength(1);
  });

  it("ignores lookalike tags and unterminated math", () => {
    expect(mathSegments("<mathx><mi>x</mi></mathx>")).toEqual([]);
    expect(mathSegments("<math><mi>x</mi>")).toEqual([]);
  });

  it("handles attributes and nested annotation markup", () => {
    const raw = '<math display="block"><mrow><mi>y</mi></mrow></math>';
    expect(mathSegments(raw)).toHaveLength(1);
    expect(mathSegments(raw)[0]!.end).toBe(raw.length);
  });
});

describe("segmentAt", () => {
  const raw = "energy $E=mc^2$ tail";

  it("hits inside the delimiters", () => {
    expect(segmentAt(raw, 9)?.body).toBe("E=mc^2");
  });

  it("includes both boundary positions", () => {
    expect(segmentAt(raw, 7)).not.toBeNull();
    expect(segmentAt(raw, 15)).not.toBeNull();
  });

  it("misses outside", () => {
    expect(segmentAt(raw, 3)).toBeNull();
    expect(segmentAt(raw, 18)).toBeNull();
  });

  it("picks the segment under the caret when there are several", () => {
    const two = "$a+b$ and $c-d$";
    expect(segmentAt(two, 2)?.body).toBe("a+b");
    expect(segmentAt(two, 12)?.body).toBe("c-d");
    expect(segmentAt(two, 7)).toBeNull();
  });
});

describe("tokenAt", () => {
  it("returns the prefix before the caret", () => {
    expect(tokenAt("diff", 4)).toEqual({ start: 0, end: 4, prefix: "diff" });
  });

  it("extends the replacement range to the token end", () => {
    expect(tokenAt("different equations", 4)).toEqual({
      start: 0,
      end: 9,
      prefix: "diff",
    });
  });

  it("requires at least two characters", () => {
    expect(tokenAt("z", 1)).toBeNull();
    expect(tokenAt("ab", 2)).not.toBeNull();
  });

  it("never fires inside a math segment", () => {
    const raw = "sum $abc$";
    expect(tokenAt(raw, 8)).toBeNull();
  });

  it("works right after a math segment", () => {
    const raw = "$x$ theta";
    expect(tokenAt(raw, 9)).toEqual({ start: 4, end: 9, prefix: "theta" });
  });

  it("accepts non-ASCII letters and digits", () => {
    expect(tokenAt("Čebyšev", 7)?.prefix).toBe("Čebyšev");
    expect(tokenAt("h2o", 3)?.prefix).toBe("h2o");
  });
});
