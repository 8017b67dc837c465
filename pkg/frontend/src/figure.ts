/**
 * Two-panel line figure: truncation depth against the growth-rate ratio,
 * one curve per decay value, one panel per tree family. Pure function of
 * the parsed tables, so re-rendering identical inputs reproduces the SVG
 * byte for byte.
 */

import { curveLabel, SeriesTable } from "./csv.js";
import { el, linearScale, niceTicks, px, textEl, tickText } from "./svg.js";

export interface PanelSpec {
  table: SeriesTable;
  title: string;
}

const PANEL_WIDTH = 420;
const PANEL_HEIGHT = 360;
const MARGIN = { top: 42, right: 16, bottom: 48, left: 64 };
const GAP = 28;

const PALETTE = [
  "#1f77b4",
  "#ff7f0e",
  "#2ca02c",
  "#d62728",
  "#9467bd",
  "#8c564b",
  "#e377c2",
];

export function curveColor(index: number): string {
  return PALETTE[index % PALETTE.length];
}

function renderPanel(spec: PanelSpec, xOffset: number): string {
  const { table, title } = spec;
  const plotLeft = xOffset + MARGIN.left;
  const plotRight = xOffset + PANEL_WIDTH - MARGIN.right;
  const plotTop = MARGIN.top;
  const plotBottom = PANEL_HEIGHT - MARGIN.bottom;

  const kMin = table.ks[0];
  const kMax = table.ks[table.ks.length - 1];
  let yMin = Infinity;
  let yMax = -Infinity;
  for (const curve of table.curves) {
    for (const value of curve.ratios) {
      if (value < yMin) yMin = value;
      if (value > yMax) yMax = value;
    }
  }
  if (yMax === yMin) {
    yMax = yMin + 1;
  }
  const x = linearScale([kMin, kMax], [plotLeft, plotRight]);
  const y = linearScale([Math.min(0, yMin), yMax], [plotBottom, plotTop]);

  const parts: string[] = [];
  parts.push(
    el("rect", {
      x: px(plotLeft),
      y: px(plotTop),
      width: px(plotRight - plotLeft),
      height: px(plotBottom - plotTop),
      fill: "none",
      stroke: "#333333",
      "stroke-width": "1",
    }),
  );

  for (const tick of niceTicks(x.domain[0], x.domain[1])) {
    const tx = x(tick);
    parts.push(
      el("line", {
        x1: px(tx), y1: px(plotBottom), x2: px(tx), y2: px(plotBottom + 5),
        stroke: "#333333", "stroke-width": "1",
      }),
      textEl(tx, plotBottom + 19, tickText(tick), {
        "text-anchor": "middle", "font-size": "11",
      }),
    );
  }
  for (const tick of niceTicks(y.domain[0], y.domain[1])) {
    const ty = y(tick);
    parts.push(
      el("line", {
        x1: px(plotLeft - 5), y1: px(ty), x2: px(plotLeft), y2: px(ty),
        stroke: "#333333", "stroke-width": "1",
      }),
      el("line", {
        x1: px(plotLeft), y1: px(ty), x2: px(plotRight), y2: px(ty),
        stroke: "#dddddd", "stroke-width": "0.5",
      }),
      textEl(plotLeft - 8, ty + 4, tickText(tick), {
        "text-anchor": "end", "font-size": "11",
      }),
    );
  }

  table.curves.forEach((curve, index) => {
    const points = table.ks
      .map((k, i) => `${px(x(k))},${px(y(curve.ratios[i]))}`)
      .join(" ");
    parts.push(
      el("polyline", {
        points,
        fill: "none",
        stroke: curveColor(index),
        "stroke-width": "1.6",
        "data-curve": curveLabel(curve.token),
      }),
    );
  });

  // legend, top-left inside the plot
  table.curves.forEach((curve, index) => {
    const ly = plotTop + 14 + index * 16;
    parts.push(
      el("line", {
        x1: px(plotLeft + 10), y1: px(ly - 4), x2: px(plotLeft + 34), y2: px(ly - 4),
        stroke: curveColor(index), "stroke-width": "1.6",
      }),
      textEl(plotLeft + 40, ly, curveLabel(curve.token), { "font-size": "11" }),
    );
  });

  parts.push(
    textEl((plotLeft + plotRight) / 2, 22, title, {
      "text-anchor": "middle", "font-size": "14", "font-weight": "bold",
    }),
    textEl((plotLeft + plotRight) / 2, PANEL_HEIGHT - 12, "truncation depth k", {
      "text-anchor": "middle", "font-size": "12",
    }),
    el(
      "g",
      { transform: `translate(${px(xOffset + 16)},${px((plotTop + plotBottom) / 2)}) rotate(-90)` },
      textEl(0, 0, "Δk² / |Vk|", { "text-anchor": "middle", "font-size": "12" }),
    ),
  );
  return el("g", { "data-panel": title }, parts.join(""));
}

export function renderFigure(left: PanelSpec, right: PanelSpec): string {
  const sameDomain =
    left.table.ks.length === right.table.ks.length &&
    left.table.ks.every((k, i) => k === right.table.ks[i]);
  if (!sameDomain) {
    throw new Error(
      `panels disagree on the depth domain: left has k ${left.table.ks[0]}..` +
        `${left.table.ks[left.table.ks.length - 1]} (${left.table.ks.length} rows), right has ` +
        `${right.table.ks[0]}..${right.table.ks[right.table.ks.length - 1]} (${right.table.ks.length} rows)`,
    );
  }
  const width = 2 * PANEL_WIDTH + GAP;
  const body =
    el("rect", { x: "0", y: "0", width: px(width), height: px(PANEL_HEIGHT), fill: "#ffffff" }) +
    renderPanel(left, 0) +
    renderPanel(right, PANEL_WIDTH + GAP);
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${PANEL_HEIGHT}" ` +
    `viewBox="0 0 ${width} ${PANEL_HEIGHT}" font-family="Helvetica, Arial, sans-serif">` +
    body +
    "</svg>\n"
  );
}
