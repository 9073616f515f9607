/**
 * Parser and validator for the benchmark results CSV contract:
 *
 *   panel,sweep_value,method,mean_rmse,sem,runs,seed0
 *
 * `sweep_value` is empty for panel a; `sem` is empty when a point aggregates
 * a single run.  Any deviation from the schema raises a SchemaError with a
 * column-level diagnostic.
 */

export const EXPECTED_COLUMNS = [
  "panel",
  "sweep_value",
  "method",
  "mean_rmse",
  "sem",
  "runs",
  "seed0",
] as const;

export interface ResultRow {
  panel: string;
  sweepValue: number | null;
  method: string;
  meanRmse: number;
  sem: number | null;
  runs: number;
  seed0: number;
}

export class SchemaError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SchemaError";
  }
}

function splitCsvLine(line: string): string[] {
  // the contract never quotes fields; reject embedded quotes outright
  if (line.includes('"')) {
    throw new SchemaError("quoted fields are not part of the results CSV contract");
  }
  return line.split(",");
}

function parseRequiredNumber(raw: string, column: string, lineNo: number): number {
  if (raw.trim() === "") {
    throw new SchemaError(`line ${lineNo}: column '${column}' must not be empty`);
  }
  const value = Number(raw);
  if (!Number.isFinite(value)) {
    throw new SchemaError(`line ${lineNo}: column '${column}' is not a finite number: '${raw}'`);
  }
  return value;
}

function parseOptionalNumber(raw: string, column: string, lineNo: number): number | null {
  if (raw.trim() === "") {
    return null;
  }
  return parseRequiredNumber(raw, column, lineNo);
}

export function parseResultsCsv(text: string): ResultRow[] {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new SchemaError("empty CSV: no header line");
  }
  const header = splitCsvLine(lines[0]!);
  const expected = [...EXPECTED_COLUMNS];
  const missing = expected.filter((c) => !header.includes(c));
  const extra = header.filter((c) => !(expected as string[]).includes(c));
  const misordered = missing.length === 0 && extra.length === 0 && header.join(",") !== expected.join(",");
  if (missing.length > 0 || extra.length > 0 || misordered) {
    throw new SchemaError(
      `header mismatch: expected '${expected.join(",")}'` +
        (missing.length ? `; missing columns: ${missing.join(", ")}` : "") +
        (extra.length ? `; unexpected columns: ${extra.join(", ")}` : "") +
        (misordered ? "; columns out of order" : ""),
    );
  }
  const rows: ResultRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = splitCsvLine(lines[i]!);
    if (parts.length !== expected.length) {
      throw new SchemaError(`line ${i + 1}: expected ${expected.length} fields, got ${parts.length}`);
    }
    const [panel, sweep, method, mean, sem, runs, seed0] = parts as [
      string, string, string, string, string, string, string,
    ];
    if (panel.trim() === "" || method.trim() === "") {
      throw new SchemaError(`line ${i + 1}: 'panel' and 'method' must not be empty`);
    }
    rows.push({
      panel: panel.trim(),
      sweepValue: parseOptionalNumber(sweep, "sweep_value", i + 1),
      method: method.trim(),
      meanRmse: parseRequiredNumber(mean, "mean_rmse", i + 1),
      sem: parseOptionalNumber(sem, "sem", i + 1),
      runs: parseRequiredNumber(runs, "runs", i + 1),
      seed0: parseRequiredNumber(seed0, "seed0", i + 1),
    });
  }
  if (rows.length === 0) {
    throw new SchemaError("CSV has a header but no data rows");
  }
  return rows;
}
