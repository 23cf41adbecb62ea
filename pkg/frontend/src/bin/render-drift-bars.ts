/** Usage: render-drift-bars <drift_bars.csv> <out.svg> */

import { writeFileSync } from 'fs';
import { readDriftBars } from '../csv.js';
import { renderDriftBars } from '../reports.js';

const [input, output] = process.argv.slice(2);
if (!input || !output) {
  console.error('usage: render-drift-bars <drift_bars.csv> <out.svg>');
  process.exit(2);
}
writeFileSync(output, renderDriftBars(readDriftBars(input)));
console.log(output);
