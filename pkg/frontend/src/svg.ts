/**
 * Minimal deterministic SVG building blocks: a linear scale, tick
 * placement on 1-2-5 steps, and tagged-string element helpers. All
 * coordinates are emitted with fixed precision so identical inputs give
 * byte-identical documents.
 */

export interface LinearScale {
  (value: number): number;
  domain: [number, number];
  range: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): LinearScale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  const scale = ((value: number) => r0 + ((value - d0) / span) * (r1 - r0)) as LinearScale;
  scale.domain = domain;
  scale.range = range;
  return scale;
}

/** Round tick positions covering [min, max] on a 1-2-5 ladder. */
export function niceTicks(min: number, max: number, target = 6): number[] {
  if (!(max > min)) {
    return [min];
  }
  const rawStep = (max - min) / Math.max(1, target);
  const power = Math.floor(Math.log10(rawStep));
  const base = 10 ** power;
  let step = base;
  for (const mult of [1, 2, 5, 10]) {
    step = mult * base;
    if (step >= rawStep) break;
  }
  const first = Math.ceil(min / step) * step;
  const ticks: number[] = [];
  for (let v = first; v <= max + step * 1e-9; v += step) {
    ticks.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return ticks;
}

export const px = (value: number): string => value.toFixed(2);

export function tickText(value: number): string {
  if (value === 0) return "0";
  const abs = Math.abs(value);
  if (abs >= 10000 || abs < 0.001) {
    return value.toExponential(1).replace("e+", "e");
  }
  return Number(value.toPrecision(6)).toString();
}

export function el(tag: string, attrs: Record<string, string>, body = ""): string {
  const parts = Object.entries(attrs)
    .map(([key, value]) => ` ${key}="${value}"`)
    .join("");
  return body === "" ? `<${tag}${parts}/>` : `<${tag}${parts}>${body}</${tag}>`;
}

export function textEl(x: number, y: number, content: string, attrs: Record<string, string> = {}): string {
  return el("text", { x: px(x), y: px(y), ...attrs }, escapeXml(content));
}

export function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
