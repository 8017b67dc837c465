import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { CsvSchemaError, curveLabel, parseFigureCsv } from "../src/csv.js";

const FIXTURES = join(__dirname, "fixtures");

function fixture(name: string): string {
  return readFileSync(join(FIXTURES, name), "utf8");
}

describe("parseFigureCsv", () => {
  it("reads a real figure1 export", () => {
    const table = parseFigureCsv(fixture("threeone_k10.csv"));
    expect(table.ks).toEqual([...Array(11).keys()]);
    expect(table.vertexCounts[10]).toBe(2047);
    expect(table.curves.map((c) => c.token)).toEqual([
      "0.5",
      "isqrt3",
      "0.6",
      "isqrt2",
      "0.75",
    ]);
    expect(table.curves[0].ratios[0]).toBe(1);
  });

  it("keeps the flat unit line for a zero decay column", () => {
    const table = parseFigureCsv(fixture("dary2_bzero_k6.csv"));
    const zero = table.curves.find((c) => c.token === "0");
    expect(zero).toBeDefined();
    expect(zero!.ratios.every((r) => r === 1)).toBe(true);
  });

  it("rejects a missing depth header naming column 1", () => {
    expect(() => parseFigureCsv("depth,n_vertices,b=0.5\n0,1,1\n", "x.csv")).toThrow(
      /x\.csv: column 1: expected header 'k'/,
    );
  });

  it("rejects a malformed curve header naming the column", () => {
    expect(() => parseFigureCsv("k,n_vertices,ratio\n0,1,1\n")).toThrow(
      /column 3: expected a 'b=<token>' header, got 'ratio'/,
    );
  });

  it("rejects an empty curve list", () => {
    expect(() => parseFigureCsv("k,n_vertices\n0,1\n")).toThrow(/empty b list/);
  });

  it("rejects non-numeric cells with row and column", () => {
    expect(() => parseFigureCsv("k,n_vertices,b=0.5\n0,1,huh\n")).toThrow(
      /row 2, column 3 \('b=0.5'\): not a number: 'huh'/,
    );
  });

  it("rejects ragged rows", () => {
    expect(() => parseFigureCsv("k,n_vertices,b=0.5\n0,1\n")).toThrow(/2 cells, expected 3/);
  });

  it("rejects non-increasing depths", () => {
    expect(() =>
      parseFigureCsv("k,n_vertices,b=0.5\n0,1,1\n0,3,2\n"),
    ).toThrow(CsvSchemaError);
  });
});

describe("curveLabel", () => {
  it("renders symbolic tokens as radicals", () => {
    expect(curveLabel("isqrt3")).toBe("b = 1/√3");
    expect(curveLabel("isqrt2")).toBe("b = 1/√2");
  });

  it("passes decimals through", () => {
    expect(curveLabel("0.6")).toBe("b = 0.6");
  });
});
