/**
 * Strict CSV handling for the solver artifacts.
 *
 * The artifacts are headered, comma-separated, CRLF-terminated files whose
 * numbers are printed with C's "%.17g". Parsing and re-serializing a file
 * through this module reproduces the original bytes exactly, which the tests
 * use to prove that no numeric value is altered on the way to a figure.
 */

import { readFileSync } from "node:fs";
import Papa from "papaparse";

export interface Table {
  /** Column order as it appears in the header. */
  names: string[];
  /** Column values, keyed by name, all of equal length. */
  columns: Map<string, number[]>;
}

export class CsvError extends Error {}

/** Parse a CSV artifact into numeric columns. */
export function parseCsv(text: string, source = "<csv>"): Table {
  const res = Papa.parse<string[]>(text.trim(), { delimiter: "," });
  if (res.errors.length > 0) {
    const first = res.errors[0];
    throw new CsvError(`${source}: ${first.message} (row ${first.row})`);
  }
  const rows = res.data;
  if (rows.length < 1) {
    throw new CsvError(`${source}: empty file`);
  }
  const names = rows[0];
  const seen = new Set<string>();
  for (const name of names) {
    if (name === "") throw new CsvError(`${source}: empty column name in header`);
    if (seen.has(name)) throw new CsvError(`${source}: duplicate column ${name}`);
    seen.add(name);
  }
  const columns = new Map<string, number[]>(names.map((n) => [n, []]));
  for (let r = 1; r < rows.length; r++) {
    const row = rows[r];
    if (row.length !== names.length) {
      throw new CsvError(
        `${source}: row ${r} has ${row.length} fields, header has ${names.length}`,
      );
    }
    for (let c = 0; c < names.length; c++) {
      const value = Number(row[c]);
      if (row[c] === "" || Number.isNaN(value)) {
        throw new CsvError(
          `${source}: non-numeric value ${JSON.stringify(row[c])} in column ${names[c]}, row ${r}`,
        );
      }
      columns.get(names[c])!.push(value);
    }
  }
  return { names, columns };
}

export function readCsvFile(path: string): Table {
  return parseCsv(readFileSync(path, "utf8"), path);
}

/**
 * Shortest-faithful decimal of a double, matching C's "%.17g": at most 17
 * significant digits, trailing zeros dropped, exponent notation outside
 * [1e-4, 1e17) with a sign and at least two exponent digits.
 */
export function formatG17(x: number): string {
  if (Number.isNaN(x)) return "nan";
  if (!Number.isFinite(x)) return x > 0 ? "inf" : "-inf";
  if (x === 0) return Object.is(x, -0) ? "-0" : "0";
  const exp = Number(x.toExponential(16).split("e")[1]);
  if (exp < -4 || exp >= 17) {
    const [mantissa, e] = x.toExponential(16).split("e");
    const trimmed = mantissa.replace(/\.?0+$/, "");
    const sign = e[0] === "-" ? "-" : "+";
    const digits = e.replace(/^[+-]/, "").padStart(2, "0");
    return `${trimmed}e${sign}${digits}`;
  }
  return x.toPrecision(17).replace(/\.?0+$/, "");
}

/** Serialize a table back to the artifact byte format (CRLF, "%.17g"). */
export function serializeCsv(table: Table): string {
  const lines = [table.names.join(",")];
  const cols = table.names.map((n) => table.columns.get(n)!);
  const length = cols[0]?.length ?? 0;
  for (let r = 0; r < length; r++) {
    lines.push(cols.map((c) => formatG17(c[r])).join(","));
  }
  return lines.join("\r\n") + "\r\n";
}

/** Columns requested but absent, in request order. */
export function missingColumns(table: Table, wanted: string[]): string[] {
  return wanted.filter((name) => !table.columns.has(name));
}
