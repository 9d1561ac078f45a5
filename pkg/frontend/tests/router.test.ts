import { describe, expect, it } from "vitest";

import { parseHash, sessionHash } from "../src/router.js";

describe("hash routing", () => {
  it("round-trips a session id", () => {
    const hash = sessionHash("al-0001.none.r0");
    expect(hash).toBe("#/s/al-0001.none.r0");
    expect(parseHash(hash)).toEqual({ sessionId: "al-0001.none.r0" });
  });

  it("escapes ids that need it", () => {
    const hash = sessionHash("weird id/with?stuff");
    expect(parseHash(hash)).toEqual({ sessionId: "weird id/with?stuff" });
  });

  it("treats everything else as the lobby", () => {
    expect(parseHash("")).toEqual({ sessionId: null });
    expect(parseHash("#")).toEqual({ sessionId: null });
    expect(parseHash("#/about")).toEqual({ sessionId: null });
    expect(parseHash("#/s/")).toEqual({ sessionId: null });
    expect(parseHash("#/s/a/b")).toEqual({ sessionId: null });
  });

  it("survives malformed percent encodings", () => {
    expect(parseHash("#/s/%")).toEqual({ sessionId: null });
  });
});
