/** Usage: render-atom-ladder <atom_ladder.csv> <out.svg> */

import { writeFileSync } from 'fs';
import { readAtomLadder } from '../csv.js';
import { renderAtomLadder } from '../reports.js';

const [input, output] = process.argv.slice(2);
if (!input || !output) {
  console.error('usage: render-atom-ladder <atom_ladder.csv> <out.svg>');
  process.exit(2);
}
writeFileSync(output, renderAtomLadder(readAtomLadder(input)));
console.log(output);
