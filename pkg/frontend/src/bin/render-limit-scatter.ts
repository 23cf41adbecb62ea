/** Usage: render-limit-scatter <ensemble.csv> <out.svg> */

import { writeFileSync } from 'fs';
import { readEnsemble } from '../csv.js';
import { renderLimitScatter } from '../reports.js';

const [input, output] = process.argv.slice(2);
if (!input || !output) {
  console.error('usage: render-limit-scatter <ensemble.csv> <out.svg>');
  process.exit(2);
}
writeFileSync(output, renderLimitScatter(readEnsemble(input)));
console.log(output);
