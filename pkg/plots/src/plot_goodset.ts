/** CLI: node dist/plot_goodset.js goodset.csv out.svg */

import { plotGoodset } from "./goodset";

function main(): number {
  const [input, output] = process.argv.slice(2);
  if (!input || !output) {
    console.error("usage: plot_goodset <goodset.csv> <out.svg>");
    return 2;
  }
  try {
    const res = plotGoodset(input, output);
    console.log(`wrote ${output}: ${res.values} values, final complement density ` +
      res.finalComplementDensity.toFixed(4));
    return 0;
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
}

process.exitCode = main();
