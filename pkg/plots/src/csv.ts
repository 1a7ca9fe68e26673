/**
 * CSV loading for the experiment outputs.
 *
 * Every file starts with a `# config_hash=...` comment line, then a header
 * row. Schemas are validated against the documented column lists; a
 * mismatch reports the exact column diff and is a hard error (the callers
 * exit nonzero). Nothing here ever writes to the input.
 */

import { readFileSync } from "fs";
import Papa from "papaparse";

export class SchemaMismatchError extends Error {
  constructor(path: string, expected: string[], found: string[]) {
    const missing = expected.filter((c) => !found.includes(c));
    const unexpected = found.filter((c) => !expected.includes(c));
    super(
      `schema mismatch in ${path}: missing columns [${missing.join(", ")}], ` +
        `unexpected columns [${unexpected.join(", ")}]`,
    );
    this.name = "SchemaMismatchError";
  }
}

export type Row = Record<string, string>;

export function loadCsv(path: string, requiredColumns: string[]): Row[] {
  const text = readFileSync(path, "utf8");
  const body = text
    .split("\n")
    .filter((line) => !line.startsWith("#"))
    .join("\n");
  const parsed = Papa.parse<Row>(body, {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    throw new Error(`cannot parse ${path}: ${first.message} (row ${first.row})`);
  }
  const found = parsed.meta.fields ?? [];
  const ok =
    requiredColumns.every((c) => found.includes(c)) &&
    found.every((c) => requiredColumns.includes(c));
  if (!ok) {
    throw new SchemaMismatchError(path, requiredColumns, found);
  }
  return parsed.data;
}

export const EQUIDIST_COLUMNS = [
  "run_id",
  "lambda",
  "n_k_float",
  "in_sigma",
  "observable_id",
  "discrepancy",
  "envelope",
  "tail_mass",
  "ann_min_gap",
];

export const GOODSET_COLUMNS = [
  "num",
  "den",
  "value_float",
  "in_q1",
  "in_q2",
  "in_qprime",
  "certificate_pass",
  "certificate_margin",
  "witness_xi",
  "witness_zeta",
];

export const DISORDER_COLUMNS = [
  "kind",
  "param",
  "n_scatterers",
  "v_l2_norm",
  "v_l2_sq",
  "l2_bound",
  "l2_pass",
  "wd_worst_ratio",
  "wd_pass",
  "wd_witness_r",
  "equi_lhs",
  "equi_rhs",
  "equi_satisfied",
  "loc_bound",
];
