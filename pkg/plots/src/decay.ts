/**
 * Discrepancy-decay figure: log-log scatter of (lambda, discrepancy) over
 * the good-bracket rows, a reference envelope line of slope -rate, and the
 * least-squares fitted line labeled with its measured slope.
 */

import { writeFileSync } from "fs";
import { EQUIDIST_COLUMNS, loadCsv } from "./csv";
import { STYLE, Svg, logScale, plotArea } from "./svg";

export const DEFAULT_RATE = 97 / 3296;

export interface DecayResult {
  points: number;
  fittedSlope: number;
}

export function plotDecay(inputPath: string, outputPath: string, rate = DEFAULT_RATE): DecayResult {
  const rows = loadCsv(inputPath, EQUIDIST_COLUMNS);
  const data = rows
    .filter((r) => r.in_sigma === "true")
    .map((r) => ({ lam: parseFloat(r.lambda), d: parseFloat(r.discrepancy) }))
    .filter((p) => isFinite(p.lam) && p.lam > 0 && isFinite(p.d));
  if (data.length < 2) {
    throw new Error(
      `need at least 2 good-bracket rows to plot decay, found ${data.length} in ${inputPath}`,
    );
  }
  const positive = data.filter((p) => p.d > 1e-300);
  if (positive.length < 2) {
    throw new Error(`all good-bracket discrepancies are zero in ${inputPath}`);
  }

  const lams = positive.map((p) => p.lam);
  const ds = positive.map((p) => p.d);
  const area = plotArea();
  const xs = logScale(Math.min(...lams), Math.max(...lams), area.x0, area.x1);
  const ys = logScale(Math.min(...ds), Math.max(...ds), area.y0, area.y1);

  // least squares in log-log coordinates
  const lx = lams.map(Math.log);
  const ly = ds.map(Math.log);
  const n = lx.length;
  const mx = lx.reduce((a, b) => a + b, 0) / n;
  const my = ly.reduce((a, b) => a + b, 0) / n;
  let sxx = 0;
  let sxy = 0;
  for (let i = 0; i < n; i++) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  const slope = sxx > 0 ? sxy / sxx : 0;
  const intercept = my - slope * mx;

  const svg = new Svg();
  svg.axes(xs, ys, "lambda", "discrepancy", "equidistribution defect vs eigenvalue");
  for (const p of positive) {
    svg.circle(xs(p.lam), ys(p.d), 2.5, STYLE.series[0]);
  }
  const lamLo = Math.min(...lams);
  const lamHi = Math.max(...lams);
  const fitAt = (lam: number) => Math.exp(intercept + slope * Math.log(lam));
  svg.polyline(
    [
      [xs(lamLo), ys(fitAt(lamLo))],
      [xs(lamHi), ys(fitAt(lamHi))],
    ],
    STYLE.series[1],
  );
  // reference envelope of slope -rate anchored at the top of the data
  const anchor = Math.max(...ds) * Math.pow(lamLo, rate);
  const envAt = (lam: number) => anchor * Math.pow(lam, -rate);
  svg.polyline(
    [
      [xs(lamLo), ys(envAt(lamLo))],
      [xs(lamHi), ys(envAt(lamHi))],
    ],
    STYLE.series[2],
  );
  svg.text(area.x0 + 8, area.y1 + 14, `fit slope ${slope.toFixed(3)}`, {});
  svg.text(area.x0 + 8, area.y1 + 30, `envelope slope ${(-rate).toFixed(4)}`, {});
  writeFileSync(outputPath, svg.render());
  return { points: positive.length, fittedSlope: slope };
}
