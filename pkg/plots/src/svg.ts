/**
 * Minimal deterministic SVG scenes: fixed style, no timestamps, no
 * randomness, so identical inputs render byte-identical files.
 */

export const STYLE = {
  width: 640,
  height: 440,
  margin: { left: 70, right: 20, top: 36, bottom: 52 },
  background: "#ffffff",
  axis: "#333333",
  grid: "#dddddd",
  font: "12px sans-serif",
  titleFont: "14px sans-serif",
  series: ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"],
} as const;

export interface Scale {
  (x: number): number;
  ticks: number[];
  log: boolean;
}

function fmt(x: number): string {
  if (!isFinite(x)) return "0";
  const s = x.toPrecision(6);
  return parseFloat(s).toString();
}

export function linearScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  if (hi <= lo) hi = lo + 1;
  const f = ((x: number) => outLo + ((x - lo) / (hi - lo)) * (outHi - outLo)) as Scale;
  const step = Math.pow(10, Math.floor(Math.log10((hi - lo) / 4)));
  const ticks: number[] = [];
  for (let t = Math.ceil(lo / step) * step; t <= hi + 1e-12; t += step) ticks.push(t);
  f.ticks = ticks.length > 12 ? ticks.filter((_, i) => i % 2 === 0) : ticks;
  f.log = false;
  return f;
}

export function logScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  const safeLo = Math.max(lo, 1e-300);
  const safeHi = Math.max(hi, safeLo * 10);
  const a = Math.log10(safeLo);
  const b = Math.log10(safeHi);
  const f = ((x: number) =>
    outLo + ((Math.log10(Math.max(x, 1e-300)) - a) / (b - a)) * (outHi - outLo)) as Scale;
  const ticks: number[] = [];
  for (let e = Math.ceil(a); e <= Math.floor(b); e++) ticks.push(Math.pow(10, e));
  if (ticks.length === 0) ticks.push(safeLo, safeHi);
  f.ticks = ticks;
  f.log = true;
  return f;
}

export class Svg {
  private parts: string[] = [];

  constructor(
    readonly width: number = STYLE.width,
    readonly height: number = STYLE.height,
  ) {
    this.parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" ` +
        `height="${height}" viewBox="0 0 ${width} ${height}">`,
      `<rect width="${width}" height="${height}" fill="${STYLE.background}"/>`,
    );
  }

  text(x: number, y: number, s: string, opts: { anchor?: string; font?: string } = {}): void {
    const anchor = opts.anchor ?? "start";
    const font = opts.font ?? STYLE.font;
    this.parts.push(
      `<text x="${fmt(x)}" y="${fmt(y)}" text-anchor="${anchor}" ` +
        `style="font:${font}" fill="${STYLE.axis}">${escapeXml(s)}</text>`,
    );
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string, width = 1): void {
    this.parts.push(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" ` +
        `stroke="${stroke}" stroke-width="${width}"/>`,
    );
  }

  circle(cx: number, cy: number, r: number, fill: string): void {
    this.parts.push(`<circle cx="${fmt(cx)}" cy="${fmt(cy)}" r="${r}" fill="${fill}"/>`);
  }

  polyline(points: Array<[number, number]>, stroke: string, width = 1.5): void {
    const pts = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    this.parts.push(
      `<polyline points="${pts}" fill="none" stroke="${stroke}" stroke-width="${width}"/>`,
    );
  }

  axes(xScale: Scale, yScale: Scale, xLabel: string, yLabel: string, title: string): void {
    const { left, right, top, bottom } = STYLE.margin;
    const x0 = left;
    const x1 = this.width - right;
    const y0 = this.height - bottom;
    const y1 = top;
    this.line(x0, y0, x1, y0, STYLE.axis);
    this.line(x0, y0, x0, y1, STYLE.axis);
    for (const t of xScale.ticks) {
      const px = xScale(t);
      if (px < x0 - 0.5 || px > x1 + 0.5) continue;
      this.line(px, y0, px, y1, STYLE.grid, 0.5);
      this.line(px, y0, px, y0 + 4, STYLE.axis);
      this.text(px, y0 + 18, tickLabel(t, xScale.log), { anchor: "middle" });
    }
    for (const t of yScale.ticks) {
      const py = yScale(t);
      if (py > y0 + 0.5 || py < y1 - 0.5) continue;
      this.line(x0, py, x1, py, STYLE.grid, 0.5);
      this.line(x0 - 4, py, x0, py, STYLE.axis);
      this.text(x0 - 8, py + 4, tickLabel(t, yScale.log), { anchor: "end" });
    }
    this.text((x0 + x1) / 2, this.height - 14, xLabel, { anchor: "middle" });
    this.parts.push(
      `<text x="16" y="${fmt((y0 + y1) / 2)}" text-anchor="middle" ` +
        `style="font:${STYLE.font}" fill="${STYLE.axis}" ` +
        `transform="rotate(-90 16 ${fmt((y0 + y1) / 2)})">${escapeXml(yLabel)}</text>`,
    );
    this.text((x0 + x1) / 2, 20, title, { anchor: "middle", font: STYLE.titleFont });
  }

  render(): string {
    return this.parts.join("\n") + "\n</svg>\n";
  }
}

function tickLabel(t: number, log: boolean): string {
  if (log) {
    const e = Math.round(Math.log10(t));
    return `1e${e}`;
  }
  return Math.abs(t) >= 1000 || (t !== 0 && Math.abs(t) < 0.01)
    ? t.toExponential(0)
    : parseFloat(t.toPrecision(4)).toString();
}

function escapeXml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function plotArea(): { x0: number; x1: number; y0: number; y1: number } {
  return {
    x0: STYLE.margin.left,
    x1: STYLE.width - STYLE.margin.right,
    y0: STYLE.height - STYLE.margin.bottom,
    y1: STYLE.margin.top,
  };
}
