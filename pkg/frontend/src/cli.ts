#!/usr/bin/env node
/**
 * figures --left <csv> --right <csv> --out <svg>
 *
 * Reads the two growth-ratio CSVs produced by `treeconc figure1` (left:
 * the 3-1 family, right: the binary family) and writes the two-panel
 * comparison figure. Nothing is recomputed here; the CSVs are the single
 * source of numerical truth. On any validation error no output file is
 * written.
 */

import { readFileSync, writeFileSync } from "node:fs";
import { pathToFileURL } from "node:url";

import { parseFigureCsv } from "./csv.js";
import { renderFigure } from "./figure.js";

export interface CliOptions {
  left: string;
  right: string;
  out: string;
  leftTitle: string;
  rightTitle: string;
}

export function parseArgs(argv: string[]): CliOptions {
  const opts: Partial<CliOptions> = { leftTitle: "3-1 tree", rightTitle: "binary tree" };
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (value === undefined) {
      throw new Error(`flag ${flag} needs a value`);
    }
    switch (flag) {
      case "--left":
        opts.left = value;
        break;
      case "--right":
        opts.right = value;
        break;
      case "--out":
        opts.out = value;
        break;
      case "--left-title":
        opts.leftTitle = value;
        break;
      case "--right-title":
        opts.rightTitle = value;
        break;
      default:
        throw new Error(`unknown flag ${flag}`);
    }
  }
  for (const required of ["left", "right", "out"] as const) {
    if (!opts[required]) {
      throw new Error(`--${required} is required`);
    }
  }
  return opts as CliOptions;
}

export function run(options: CliOptions): void {
  const left = parseFigureCsv(readFileSync(options.left, "utf8"), options.left);
  const right = parseFigureCsv(readFileSync(options.right, "utf8"), options.right);
  const svg = renderFigure(
    { table: left, title: options.leftTitle },
    { table: right, title: options.rightTitle },
  );
  writeFileSync(options.out, svg);
}

export function main(argv: string[]): number {
  try {
    run(parseArgs(argv));
    return 0;
  } catch (error) {
    process.stderr.write(`error: ${error instanceof Error ? error.message : error}\n`);
    return 2;
  }
}

if (process.argv[1] !== undefined && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
