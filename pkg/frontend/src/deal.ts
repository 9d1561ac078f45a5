/** Deal builder for the negotiation game.
 *
 * The human edits only their own count per item; the partner's share is the
 * derived remainder, so a proposal built here always splits each item exactly.
 * Out-of-range edits are refused at the widget level, which is what keeps
 * invalid per-item sums from ever reaching the wire.
 */

export const ITEMS = ["water", "firewood", "food"] as const;
export const ITEM_TOTAL = 3;

export type ItemName = (typeof ITEMS)[number];
export type DealPayload = Record<ItemName, [number, number]>;

function isValidCount(count: number): boolean {
  return Number.isInteger(count) && count >= 0 && count <= ITEM_TOTAL;
}

export class DealBuilder {
  private readonly mine: Record<ItemName, number>;

  constructor(initial?: Partial<Record<ItemName, number>>) {
    this.mine = { water: 0, firewood: 0, food: 0 };
    for (const item of ITEMS) {
      const count = initial?.[item];
      if (count === undefined) continue;
      if (!isValidCount(count)) {
        throw new RangeError(`${item} count must be an integer in [0, ${ITEM_TOTAL}]`);
      }
      this.mine[item] = count;
    }
  }

  yours(item: ItemName): number {
    return this.mine[item];
  }

  theirs(item: ItemName): number {
    return ITEM_TOTAL - this.mine[item];
  }

  /** Returns false and leaves the split unchanged when the count is out of range. */
  setYours(item: ItemName, count: number): boolean {
    if (!isValidCount(count)) return false;
    this.mine[item] = count;
    return true;
  }

  increment(item: ItemName): boolean {
    return this.setYours(item, this.mine[item] + 1);
  }

  decrement(item: ItemName): boolean {
    return this.setYours(item, this.mine[item] - 1);
  }

  rows(): Array<{ item: ItemName; yours: number; theirs: number }> {
    return ITEMS.map((item) => ({
      item,
      yours: this.yours(item),
      theirs: this.theirs(item),
    }));
  }

  yourTotal(): number {
    return ITEMS.reduce((sum, item) => sum + this.yours(item), 0);
  }

  theirTotal(): number {
    return ITEMS.reduce((sum, item) => sum + this.theirs(item), 0);
  }

  isComplete(): boolean {
    return payloadViolation(this.toPayloadUnchecked()) === null;
  }

  toPayload(): DealPayload {
    const payload = this.toPayloadUnchecked();
    const violation = payloadViolation(payload);
    if (violation !== null) {
      throw new RangeError(`${violation} does not split into exactly ${ITEM_TOTAL}`);
    }
    return payload;
  }

  private toPayloadUnchecked(): DealPayload {
    return {
      water: [this.yours("water"), this.theirs("water")],
      firewood: [this.yours("firewood"), this.theirs("firewood")],
      food: [this.yours("food"), this.theirs("food")],
    };
  }
}

/** Mirror of the server's per-item sum rule; returns the first offending item. */
export function payloadViolation(payload: unknown): ItemName | null {
  if (typeof payload !== "object" || payload === null) return ITEMS[0];
  const record = payload as Record<string, unknown>;
  for (const item of ITEMS) {
    const pair = record[item];
    if (!Array.isArray(pair) || pair.length !== 2) return item;
    const [yours, theirs] = pair as [unknown, unknown];
    if (typeof yours !== "number" || typeof theirs !== "number") return item;
    if (!Number.isInteger(yours) || !Number.isInteger(theirs)) return item;
    if (yours < 0 || theirs < 0 || yours + theirs !== ITEM_TOTAL) return item;
  }
  return null;
}
