/** Post-game rating form: one integer slider per dimension, bounded [0, 10]. */

export const RATING_MIN = 0;
export const RATING_MAX = 10;
export const RATING_DEFAULT = 5;

/** Round to the nearest integer inside [0, 10]; non-numbers fall back to 5. */
export function clampRating(value: number): number {
  if (!Number.isFinite(value)) return RATING_DEFAULT;
  return Math.min(RATING_MAX, Math.max(RATING_MIN, Math.round(value)));
}

export class RatingForm {
  readonly dimensions: readonly string[];
  private readonly values: Map<string, number>;

  constructor(dimensions: readonly string[]) {
    this.dimensions = [...dimensions];
    this.values = new Map(this.dimensions.map((dim) => [dim, RATING_DEFAULT]));
  }

  value(dimension: string): number {
    const value = this.values.get(dimension);
    if (value === undefined) {
      throw new Error(`unknown rating dimension: ${dimension}`);
    }
    return value;
  }

  set(dimension: string, value: number): void {
    if (!this.values.has(dimension)) {
      throw new Error(`unknown rating dimension: ${dimension}`);
    }
    this.values.set(dimension, clampRating(value));
  }

  /** Exactly the declared dimensions; the service rejects extra fields. */
  toPayload(): Record<string, number> {
    const payload: Record<string, number> = {};
    for (const dim of this.dimensions) {
      payload[dim] = this.value(dim);
    }
    return payload;
  }
}
