/** Friend selection form for the alignment game.
 *
 * The final guess must be fully specified: every schema attribute filled in,
 * and "unknown" is never offered or accepted as a value. The suggestion lists
 * come from the player's own cards, since that's all they can see mid-game.
 */

export function normalizeValue(value: string): string {
  return value.trim().toLowerCase();
}

/** Unique suggestions for one schema column, excluding unknown placeholders. */
export function optionsForColumn(rows: string[][], column: number): string[] {
  const seen = new Set<string>();
  const options: string[] = [];
  for (const row of rows) {
    const value = row[column];
    if (value === undefined) continue;
    const key = normalizeValue(value);
    if (!key || key === "unknown" || seen.has(key)) continue;
    seen.add(key);
    options.push(value.trim());
  }
  return options;
}

export class SelectionForm {
  readonly schema: readonly string[];
  private readonly values: Map<string, string>;

  constructor(schema: readonly string[]) {
    this.schema = [...schema];
    this.values = new Map(this.schema.map((name) => [name, ""]));
  }

  value(attribute: string): string {
    const value = this.values.get(attribute);
    if (value === undefined) {
      throw new Error(`unknown schema attribute: ${attribute}`);
    }
    return value;
  }

  set(attribute: string, value: string): void {
    if (!this.values.has(attribute)) {
      throw new Error(`unknown schema attribute: ${attribute}`);
    }
    this.values.set(attribute, value);
  }

  /** Copy a whole knowledge row into the form (row order == schema order). */
  setRow(row: readonly string[]): void {
    this.schema.forEach((name, index) => {
      this.set(name, row[index] ?? "");
    });
  }

  isComplete(): boolean {
    return this.schema.every((name) => {
      const key = normalizeValue(this.value(name));
      return key.length > 0 && key !== "unknown";
    });
  }

  toValues(): string[] {
    return this.schema.map((name) => this.value(name).trim());
  }
}
