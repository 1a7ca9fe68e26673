/** CLI: node dist/plot_decay.js equidist.csv out.svg [rate] */

import { DEFAULT_RATE, plotDecay } from "./decay";

function main(): number {
  const [input, output, rateArg] = process.argv.slice(2);
  if (!input || !output) {
    console.error("usage: plot_decay <equidist.csv> <out.svg> [rate]");
    return 2;
  }
  const rate = rateArg !== undefined ? parseFloat(rateArg) : DEFAULT_RATE;
  if (!isFinite(rate)) {
    console.error(`rate must be a number, got ${rateArg}`);
    return 2;
  }
  try {
    const res = plotDecay(input, output, rate);
    console.log(`wrote ${output}: ${res.points} points, fitted slope ${res.fittedSlope.toFixed(3)}`);
    return 0;
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
}

process.exitCode = main();
