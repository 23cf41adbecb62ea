/** Usage: render-tau-hist <tau_histogram.csv> <out.svg> [--no-overlay] */

import { writeFileSync } from 'fs';
import { readTauHistogram } from '../csv.js';
import { renderTauHistogram } from '../reports.js';

const args = process.argv.slice(2);
const overlay = !args.includes('--no-overlay');
const [input, output] = args.filter((a) => !a.startsWith('--'));
if (!input || !output) {
  console.error('usage: render-tau-hist <tau_histogram.csv> <out.svg> [--no-overlay]');
  process.exit(2);
}
writeFileSync(output, renderTauHistogram(readTauHistogram(input), overlay));
console.log(output);
