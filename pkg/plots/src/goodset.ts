/**
 * Good-set density figure: cumulative complement density of the scan-based
 * good set and cumulative density of the intersected good set, against the
 * value cutoff.
 */

import { writeFileSync } from "fs";
import { GOODSET_COLUMNS, loadCsv } from "./csv";
import { STYLE, Svg, linearScale, logScale, plotArea } from "./svg";

export interface GoodsetResult {
  values: number;
  finalComplementDensity: number;
}

export function plotGoodset(inputPath: string, outputPath: string): GoodsetResult {
  const rows = loadCsv(inputPath, GOODSET_COLUMNS);
  const data = rows
    .map((r) => ({
      value: parseFloat(r.value_float),
      inQ1: r.in_q1 === "true",
      inQprime: r.in_qprime === "true",
    }))
    .filter((p) => isFinite(p.value));
  if (data.length === 0) {
    throw new Error(`no rows in ${inputPath}`);
  }
  data.sort((a, b) => a.value - b.value);

  const compCurve: Array<[number, number]> = [];
  const qpCurve: Array<[number, number]> = [];
  let comp = 0;
  let qp = 0;
  for (let i = 0; i < data.length; i++) {
    if (!data[i].inQ1) comp++;
    if (data[i].inQprime) qp++;
    const x = Math.max(data[i].value, 1);
    compCurve.push([x, comp / (i + 1)]);
    qpCurve.push([x, qp / (i + 1)]);
  }

  const area = plotArea();
  const xs = logScale(1, Math.max(...data.map((p) => p.value), 10), area.x0, area.x1);
  const ys = linearScale(0, 1, area.y0, area.y1);
  const svg = new Svg();
  svg.axes(xs, ys, "value cutoff", "cumulative density", "good-set densities");
  svg.polyline(compCurve.map(([x, y]) => [xs(x), ys(y)]), STYLE.series[1]);
  svg.polyline(qpCurve.map(([x, y]) => [xs(x), ys(y)]), STYLE.series[0]);
  svg.text(area.x0 + 8, area.y1 + 14, "good-set density", {});
  svg.circle(area.x0 + 2, area.y1 + 10, 3, STYLE.series[0]);
  svg.text(area.x0 + 8, area.y1 + 30, "scan complement density", {});
  svg.circle(area.x0 + 2, area.y1 + 26, 3, STYLE.series[1]);
  writeFileSync(outputPath, svg.render());
  return {
    values: data.length,
    finalComplementDensity: compCurve[compCurve.length - 1][1],
  };
}
