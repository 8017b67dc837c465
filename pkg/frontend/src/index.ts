export { CsvSchemaError, curveLabel, parseFigureCsv } from "./csv.js";
export type { RatioCurve, SeriesTable } from "./csv.js";
export { curveColor, renderFigure } from "./figure.js";
export type { PanelSpec } from "./figure.js";
export { main, parseArgs, run } from "./cli.js";
export type { CliOptions } from "./cli.js";
