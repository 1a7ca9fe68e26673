/** CLI: node dist/plot_disorder.js disorder.csv out.svg */

import { plotDisorder } from "./disorder";

function main(): number {
  const [input, output] = process.argv.slice(2);
  if (!input || !output) {
    console.error("usage: plot_disorder <disorder.csv> <out.svg>");
    return 2;
  }
  try {
    const res = plotDisorder(input, output);
    console.log(`wrote ${output}: ${res.rows} sweep rows, norm spread x` +
      res.normSpread.toFixed(3));
    return 0;
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
}

process.exitCode = main();
