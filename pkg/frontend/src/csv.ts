/**
 * Readers for the jantelab CSV schemas.
 *
 * Each reader validates the header against the documented schema and
 * parses rows into typed records; a mismatched header is an error, not
 * a guess.
 */

import { readFileSync } from 'fs';

export interface KeepmapCell {
  ix: number;
  iy: number;
  x: number;
  y: number;
  cls: number;
}

export interface EnsembleRow {
  run: number;
  seed: string;
  tau: number;
  nFinal: number;
  xi: number[];
  fFinal: number;
  reason: string;
  ties: number;
}

export interface TauBin {
  tau: number;
  count: number;
}

export interface AtomRung {
  eps: number;
  maxCluster: number;
  pairFraction: number;
  probeHitFraction: number;
}

export interface DriftBar {
  functional: string;
  mean: number;
  se: number;
  bound: number;
}

export function parseCsv(text: string): { header: string[]; rows: string[][] } {
  const lines = text.trim().split(/\r?\n/);
  if (lines.length === 0 || lines[0] === '') {
    throw new Error('empty CSV');
  }
  const header = lines[0].split(',');
  const rows = lines.slice(1).map((line) => line.split(','));
  for (const row of rows) {
    if (row.length !== header.length) {
      throw new Error(`ragged CSV row: expected ${header.length} cells, got ${row.length}`);
    }
  }
  return { header, rows };
}

function expectHeader(actual: string[], expected: string[], what: string): void {
  if (actual.length !== expected.length || actual.some((h, i) => h !== expected[i])) {
    throw new Error(`${what}: expected header ${expected.join(',')}, got ${actual.join(',')}`);
  }
}

export function readKeepmap(path: string): KeepmapCell[] {
  const { header, rows } = parseCsv(readFileSync(path, 'utf8'));
  expectHeader(header, ['ix', 'iy', 'x', 'y', 'class'], 'keepmap CSV');
  return rows.map((r) => ({
    ix: Number(r[0]),
    iy: Number(r[1]),
    x: Number(r[2]),
    y: Number(r[3]),
    cls: Number(r[4]),
  }));
}

export function readEnsemble(path: string): EnsembleRow[] {
  const { header, rows } = parseCsv(readFileSync(path, 'utf8'));
  if (header.length < 8 || header[0] !== 'run' || header[2] !== 'tau'
      || !header[4].startsWith('xi_') || header[header.length - 2] !== 'reason') {
    throw new Error(`ensemble CSV: unexpected header ${header.join(',')}`);
  }
  const d = header.length - 7;
  return rows.map((r) => ({
    run: Number(r[0]),
    seed: r[1],
    tau: Number(r[2]),
    nFinal: Number(r[3]),
    xi: r.slice(4, 4 + d).map(Number),
    fFinal: Number(r[4 + d]),
    reason: r[5 + d],
    ties: Number(r[6 + d]),
  }));
}

export function readTauHistogram(path: string): TauBin[] {
  const { header, rows } = parseCsv(readFileSync(path, 'utf8'));
  expectHeader(header, ['tau', 'count'], 'tau histogram CSV');
  return rows.map((r) => ({ tau: Number(r[0]), count: Number(r[1]) }));
}

export function readAtomLadder(path: string): AtomRung[] {
  const { header, rows } = parseCsv(readFileSync(path, 'utf8'));
  expectHeader(header, ['eps', 'max_cluster', 'pair_fraction', 'probe_hit_fraction'],
    'atom ladder CSV');
  return rows.map((r) => ({
    eps: Number(r[0]),
    maxCluster: Number(r[1]),
    pairFraction: Number(r[2]),
    probeHitFraction: Number(r[3]),
  }));
}

export function readDriftBars(path: string): DriftBar[] {
  const { header, rows } = parseCsv(readFileSync(path, 'utf8'));
  expectHeader(header, ['functional', 'mean', 'se', 'bound'], 'drift bars CSV');
  return rows.map((r) => ({
    functional: r[0],
    mean: Number(r[1]),
    se: Number(r[2]),
    bound: Number(r[3]),
  }));
}
