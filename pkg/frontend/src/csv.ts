/**
 * Strict reader for the per-run diagnostics CSV.
 *
 * Schema (fixed, one header line):
 *   t,energy,dissipation,eta_l2,grad_eta_l2,omega3_l2,
 *   hel_res_group,hel_res_pde,swirl_eq_res,err_to_euler_local
 */

export const CSV_COLUMNS = [
  "t",
  "energy",
  "dissipation",
  "eta_l2",
  "grad_eta_l2",
  "omega3_l2",
  "hel_res_group",
  "hel_res_pde",
  "swirl_eq_res",
  "err_to_euler_local",
] as const;

export type CsvColumn = (typeof CSV_COLUMNS)[number];

export type RunTable = Record<CsvColumn, number[]>;

export class SchemaError extends Error {}

export function parseRunCsv(text: string, name = "csv"): RunTable {
  const lines = text.split("\n").filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new SchemaError(`${name}: empty file`);
  }
  const header = lines[0].split(",");
  for (const col of CSV_COLUMNS) {
    if (!header.includes(col)) {
      throw new SchemaError(`${name}: missing column '${col}'`);
    }
  }
  for (const col of header) {
    if (!(CSV_COLUMNS as readonly string[]).includes(col)) {
      throw new SchemaError(`${name}: unexpected column '${col}'`);
    }
  }
  const idx = CSV_COLUMNS.map((c) => header.indexOf(c));
  const table = Object.fromEntries(
    CSV_COLUMNS.map((c) => [c, [] as number[]]),
  ) as RunTable;
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length !== header.length) {
      throw new SchemaError(`${name}: row ${i} has ${parts.length} fields`);
    }
    CSV_COLUMNS.forEach((c, j) => {
      const raw = parts[idx[j]];
      const v = raw === "nan" ? NaN : Number(raw);
      if (raw !== "nan" && !Number.isFinite(v)) {
        throw new SchemaError(`${name}: row ${i} column '${c}' is not a number`);
      }
      table[c].push(v);
    });
  }
  return table;
}

/** Largest finite value of a column (sup over the recorded samples). */
export function supColumn(table: RunTable, col: CsvColumn): number {
  let best = -Infinity;
  for (const v of table[col]) {
    if (Number.isFinite(v) && v > best) best = v;
  }
  return best;
}
