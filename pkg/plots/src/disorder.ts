/**
 * Disorder-sweep figure: squared scatterer-sum norm across the sweep (the
 * uniformity check) on top, worst ball-count ratios with their pass flags
 * below.
 */

import { writeFileSync } from "fs";
import { DISORDER_COLUMNS, loadCsv } from "./csv";
import { STYLE, Svg, linearScale, logScale } from "./svg";

export interface DisorderResult {
  rows: number;
  normSpread: number;
}

export function plotDisorder(inputPath: string, outputPath: string): DisorderResult {
  const rows = loadCsv(inputPath, DISORDER_COLUMNS);
  const data = rows
    .map((r) => ({
      param: parseFloat(r.param),
      v2: parseFloat(r.v_l2_sq),
      wd: parseFloat(r.wd_worst_ratio),
      wdPass: r.wd_pass === "true",
    }))
    .filter((p) => isFinite(p.param) && isFinite(p.v2));
  if (data.length === 0) {
    throw new Error(`no rows in ${inputPath}`);
  }
  data.sort((a, b) => a.param - b.param);

  const width = STYLE.width;
  const height = 560;
  const svg = new Svg(width, height);
  const left = STYLE.margin.left;
  const right = width - STYLE.margin.right;

  // top panel: norm uniformity
  const xTop = logScale(data[0].param, data[data.length - 1].param, left, right);
  const v2s = data.map((p) => p.v2);
  const yTop = linearScale(0, Math.max(...v2s) * 1.2, 250, 40);
  svg.line(left, 250, right, 250, STYLE.axis);
  svg.line(left, 250, left, 40, STYLE.axis);
  for (const t of yTop.ticks) {
    svg.line(left - 4, yTop(t), left, yTop(t), STYLE.axis);
    svg.text(left - 8, yTop(t) + 4, parseFloat(t.toPrecision(3)).toString(), {
      anchor: "end",
    });
  }
  svg.polyline(data.map((p) => [xTop(p.param), yTop(p.v2)]), STYLE.series[0]);
  for (const p of data) {
    svg.circle(xTop(p.param), yTop(p.v2), 3, STYLE.series[0]);
    svg.text(xTop(p.param), 265, parseFloat(p.param.toPrecision(4)).toString(), {
      anchor: "middle",
    });
  }
  svg.text((left + right) / 2, 24, "scatterer-sum squared norm across the sweep", {
    anchor: "middle",
    font: STYLE.titleFont,
  });

  // bottom panel: weak-disorder worst ratios
  const wds = data.map((p) => (isFinite(p.wd) ? p.wd : 0));
  const yBot = linearScale(0, Math.max(...wds, 1) * 1.2, 520, 320);
  svg.line(left, 520, right, 520, STYLE.axis);
  svg.line(left, 520, left, 320, STYLE.axis);
  for (const t of yBot.ticks) {
    svg.line(left - 4, yBot(t), left, yBot(t), STYLE.axis);
    svg.text(left - 8, yBot(t) + 4, parseFloat(t.toPrecision(3)).toString(), {
      anchor: "end",
    });
  }
  const barHalf = 8;
  for (const p of data) {
    const cx = xTop(p.param);
    const color = p.wdPass ? STYLE.series[2] : STYLE.series[1];
    svg.polyline(
      [
        [cx - barHalf, yBot(p.wd)],
        [cx + barHalf, yBot(p.wd)],
      ],
      color,
      6,
    );
    svg.text(cx, 538, parseFloat(p.param.toPrecision(4)).toString(), { anchor: "middle" });
  }
  svg.text((left + right) / 2, 305, "worst ball-count ratio (green = passes)", {
    anchor: "middle",
    font: STYLE.titleFont,
  });

  writeFileSync(outputPath, svg.render());
  const spread = Math.max(...v2s) / Math.min(...v2s);
  return { rows: data.length, normSpread: spread };
}
