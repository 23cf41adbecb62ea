/** Usage: render-keepmap <keepmap.csv> <out.png> [core_points.csv] */

import { readFileSync, writeFileSync } from 'fs';
import { parseCsv, readKeepmap } from '../csv.js';
import { renderKeepmap } from '../keepmap.js';

const [input, output, corePath] = process.argv.slice(2);
if (!input || !output) {
  console.error('usage: render-keepmap <keepmap.csv> <out.png> [core_points.csv]');
  process.exit(2);
}

let core: number[][] | undefined;
if (corePath) {
  const { rows } = parseCsv(readFileSync(corePath, 'utf8'));
  core = rows.map((r) => r.slice(1).map(Number));
}

const image = renderKeepmap(readKeepmap(input), core);
if (image.warning) {
  console.warn(image.warning);
}
writeFileSync(output, image.png);
console.log(`${output}: ${image.width}x${image.height}, classes ${image.classes.join(' ')}`);
