import { describe, expect, it } from "vitest";

import {
  RATING_DEFAULT,
  RATING_MAX,
  RATING_MIN,
  RatingForm,
  clampRating,
} from "../src/rating.js";

describe("clampRating", () => {
  it("keeps integers already inside the bounds", () => {
    expect(clampRating(0)).toBe(RATING_MIN);
    expect(clampRating(10)).toBe(RATING_MAX);
    expect(clampRating(7)).toBe(7);
  });

  it("clamps values outside [0, 10]", () => {
    expect(clampRating(-3)).toBe(0);
    expect(clampRating(14)).toBe(10);
  });

  it("rounds fractional slider values to integers", () => {
    expect(clampRating(7.6)).toBe(8);
    expect(clampRating(2.4)).toBe(2);
  });

  it("falls back to the midpoint for non-numbers", () => {
    expect(clampRating(Number.NaN)).toBe(RATING_DEFAULT);
    expect(clampRating(Number.POSITIVE_INFINITY)).toBe(RATING_DEFAULT);
  });
});

describe("RatingForm", () => {
  const DIMS = ["skillful", "satisfied", "enjoyment"];

  it("starts every dimension at the midpoint", () => {
    const form = new RatingForm(DIMS);
    for (const dim of DIMS) expect(form.value(dim)).toBe(RATING_DEFAULT);
  });

  it("stores clamped integer values", () => {
    const form = new RatingForm(DIMS);
    form.set("skillful", 12);
    form.set("satisfied", -2);
    form.set("enjoyment", 9);
    expect(form.toPayload()).toEqual({ skillful: 10, satisfied: 0, enjoyment: 9 });
  });

  it("rejects unknown dimensions instead of inventing payload fields", () => {
    const form = new RatingForm(DIMS);
    expect(() => form.set("cooperativeness", 5)).toThrow(/unknown rating dimension/);
    expect(() => form.value("cooperativeness")).toThrow(/unknown rating dimension/);
  });

  it("emits exactly the declared dimensions", () => {
    const form = new RatingForm(["cooperativeness", "informativeness", "enjoyment"]);
    expect(Object.keys(form.toPayload()).sort()).toEqual([
      "cooperativeness",
      "enjoyment",
      "informativeness",
    ]);
  });
});
