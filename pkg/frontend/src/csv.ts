/**
 * Reader for the growth-ratio CSV emitted by `treeconc figure1`.
 *
 * Schema: header `k,n_vertices,b=<token>[,b=<token>...]`, then one row per
 * truncation depth with the depth, the vertex count, and one ratio column
 * per decay value. Validation errors always name the offending column or
 * cell so a bad file is diagnosable from the message alone.
 */

export interface RatioCurve {
  /** Raw column token, e.g. "0.5" or "isqrt3". */
  token: string;
  ratios: number[];
}

export interface SeriesTable {
  ks: number[];
  vertexCounts: number[];
  curves: RatioCurve[];
}

export class CsvSchemaError extends Error {}

const HEADER_PREFIX = ["k", "n_vertices"];

export function parseFigureCsv(text: string, source = "<csv>"): SeriesTable {
  const lines = text.split("\n").filter((line) => line.length > 0);
  if (lines.length < 2) {
    throw new CsvSchemaError(`${source}: need a header line and at least one data row`);
  }
  const header = lines[0].split(",");
  for (let i = 0; i < HEADER_PREFIX.length; i++) {
    if (header[i] !== HEADER_PREFIX[i]) {
      throw new CsvSchemaError(
        `${source}: column ${i + 1}: expected header '${HEADER_PREFIX[i]}', got '${header[i] ?? ""}'`,
      );
    }
  }
  const curveHeaders = header.slice(2);
  if (curveHeaders.length === 0) {
    throw new CsvSchemaError(`${source}: no curve columns (empty b list)`);
  }
  const tokens = curveHeaders.map((h, i) => {
    const match = /^b=(.+)$/.exec(h);
    if (!match) {
      throw new CsvSchemaError(
        `${source}: column ${i + 3}: expected a 'b=<token>' header, got '${h}'`,
      );
    }
    return match[1];
  });

  const ks: number[] = [];
  const vertexCounts: number[] = [];
  const ratios: number[][] = tokens.map(() => []);
  for (let row = 1; row < lines.length; row++) {
    const cells = lines[row].split(",");
    if (cells.length !== header.length) {
      throw new CsvSchemaError(
        `${source}: row ${row + 1}: ${cells.length} cells, expected ${header.length}`,
      );
    }
    const nums = cells.map((cell, i) => {
      const value = Number(cell);
      if (!Number.isFinite(value)) {
        throw new CsvSchemaError(
          `${source}: row ${row + 1}, column ${i + 1} ('${header[i]}'): not a number: '${cell}'`,
        );
      }
      return value;
    });
    ks.push(nums[0]);
    vertexCounts.push(nums[1]);
    for (let c = 0; c < tokens.length; c++) {
      ratios[c].push(nums[c + 2]);
    }
  }

  for (let i = 1; i < ks.length; i++) {
    if (ks[i] <= ks[i - 1]) {
      throw new CsvSchemaError(
        `${source}: row ${i + 2}: depth column must be strictly increasing`,
      );
    }
  }

  return {
    ks,
    vertexCounts,
    curves: tokens.map((token, i) => ({ token, ratios: ratios[i] })),
  };
}

/** Display label for a decay token; symbolic tokens become radicals. */
export function curveLabel(token: string): string {
  const symbolic: Record<string, string> = { isqrt2: "1/√2", isqrt3: "1/√3" };
  return `b = ${symbolic[token] ?? token}`;
}
