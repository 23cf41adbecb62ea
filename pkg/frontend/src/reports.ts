/**
 * Report figures from ensemble outputs: exodus-time histogram with its
 * Geometric(1/2) overlay, limit-point scatter, atom-scan ladder and
 * drift bars against their bounds. All SVG, all deterministic.
 */

import { AtomRung, DriftBar, EnsembleRow, TauBin } from './csv.js';
import { DEFAULT_FRAME, Frame, axes, fmt, linearScale, svgDocument } from './svg.js';

/** P(tau = k) for the two-point chain: tau - 1 is Geometric(1/2). */
export function geometricTauPmf(tau: number): number {
  return tau >= 2 ? Math.pow(0.5, tau - 1) : 0;
}

export interface HistogramCheck {
  tau: number;
  observed: number;
  expected: number;
  se: number;
  withinThreeSe: boolean;
}

/** Compare observed frequencies with the overlay at small tau values. */
export function checkTauHistogram(bins: TauBin[], taus: number[] = [2, 3, 4]): HistogramCheck[] {
  const total = bins.reduce((acc, b) => acc + b.count, 0);
  return taus.map((tau) => {
    const bin = bins.find((b) => b.tau === tau);
    const observed = (bin?.count ?? 0) / total;
    const expected = geometricTauPmf(tau);
    const se = Math.sqrt((expected * (1 - expected)) / total);
    return { tau, observed, expected, se, withinThreeSe: Math.abs(observed - expected) <= 3 * se };
  });
}

export function renderTauHistogram(bins: TauBin[], withOverlay = true,
  frame: Frame = DEFAULT_FRAME): string {
  const sorted = [...bins].sort((a, b) => a.tau - b.tau);
  const total = sorted.reduce((acc, b) => acc + b.count, 0);
  const maxTau = sorted[sorted.length - 1].tau;
  const maxFreq = Math.max(...sorted.map((b) => b.count / total));
  const x = linearScale([1, maxTau + 1], [frame.margin, frame.width - frame.margin]);
  const y = linearScale([0, maxFreq * 1.1], [frame.height - frame.margin, frame.margin]);
  const body = axes(frame, 'exodus time', 'frequency');
  const barWidth = (x(2) - x(1)) * 0.8;
  for (const bin of sorted) {
    const freq = bin.count / total;
    body.push(
      `<rect x="${fmt(x(bin.tau) - barWidth / 2)}" y="${fmt(y(freq))}" width="${fmt(barWidth)}" ` +
      `height="${fmt(y(0) - y(freq))}" fill="#56b4e9" stroke="#1f618d"/>`,
    );
  }
  if (withOverlay) {
    const pts = [];
    for (let tau = 2; tau <= maxTau; tau++) {
      pts.push(`${fmt(x(tau))},${fmt(y(geometricTauPmf(tau)))}`);
    }
    body.push(`<polyline points="${pts.join(' ')}" fill="none" stroke="#d55e00" stroke-width="2"/>`);
    for (let tau = 2; tau <= maxTau; tau++) {
      body.push(`<circle cx="${fmt(x(tau))}" cy="${fmt(y(geometricTauPmf(tau)))}" r="3" fill="#d55e00"/>`);
    }
  }
  return svgDocument(frame, body, 'Exodus times with Geometric(1/2) overlay');
}

export function renderLimitScatter(rows: EnsembleRow[], frame: Frame = DEFAULT_FRAME): string {
  const d = rows[0]?.xi.length ?? 0;
  if (d === 0) {
    throw new Error('ensemble rows carry no limit coordinates');
  }
  const xs = rows.map((r) => r.xi[0]);
  const ys = d > 1 ? rows.map((r) => r.xi[1]) : rows.map((r) => r.run);
  const x = linearScale([Math.min(...xs), Math.max(...xs)],
    [frame.margin, frame.width - frame.margin]);
  const y = linearScale([Math.min(...ys), Math.max(...ys)],
    [frame.height - frame.margin, frame.margin]);
  const body = axes(frame, 'limit coordinate 1', d > 1 ? 'limit coordinate 2' : 'run');
  for (let i = 0; i < rows.length; i++) {
    body.push(`<circle cx="${fmt(x(xs[i]))}" cy="${fmt(y(ys[i]))}" r="1.5" fill="#0072b2" fill-opacity="0.45"/>`);
  }
  return svgDocument(frame, body, `Limit estimates (${rows.length} runs)`);
}

export function renderAtomLadder(rungs: AtomRung[], frame: Frame = DEFAULT_FRAME): string {
  const usable = rungs.filter((r) => r.pairFraction > 0 || r.probeHitFraction > 0);
  const logEps = usable.map((r) => Math.log10(r.eps));
  const series: [string, string, (r: AtomRung) => number][] = [
    ['pair fraction', '#0072b2', (r) => r.pairFraction],
    ['probe hits', '#d55e00', (r) => r.probeHitFraction],
  ];
  const values = usable.flatMap((r) => series.map(([, , f]) => f(r))).filter((v) => v > 0);
  const x = linearScale([Math.min(...logEps), Math.max(...logEps)],
    [frame.margin, frame.width - frame.margin]);
  const y = linearScale([Math.log10(Math.min(...values)) - 0.2, 0],
    [frame.height - frame.margin, frame.margin]);
  const body = axes(frame, 'log10 eps', 'log10 fraction');
  for (const [label, color, f] of series) {
    const pts = usable.filter((r) => f(r) > 0)
      .map((r) => `${fmt(x(Math.log10(r.eps)))},${fmt(y(Math.log10(f(r))))}`);
    body.push(`<polyline points="${pts.join(' ')}" fill="none" stroke="${color}" stroke-width="2"/>`);
    body.push(`<text x="${frame.width - frame.margin}" y="${fmt(y(Math.log10(f(usable[usable.length - 1]) || 1e-6)) - 6)}" text-anchor="end" font-family="sans-serif" font-size="11" fill="${color}">${label}</text>`);
  }
  return svgDocument(frame, body, 'Atom-scan ladder');
}

export function renderDriftBars(bars: DriftBar[], frame: Frame = DEFAULT_FRAME): string {
  const lo = Math.min(...bars.map((b) => Math.min(b.mean, b.bound)), 0);
  const hi = Math.max(...bars.map((b) => Math.max(b.mean, b.bound)), 0);
  const y = linearScale([lo * 1.15, hi * 1.15], [frame.height - frame.margin, frame.margin]);
  const slot = (frame.width - 2 * frame.margin) / bars.length;
  const body = axes(frame, 'functional', 'value');
  bars.forEach((bar, i) => {
    const cx = frame.margin + slot * (i + 0.5);
    body.push(
      `<rect x="${fmt(cx - slot * 0.25)}" y="${fmt(Math.min(y(0), y(bar.mean)))}" ` +
      `width="${fmt(slot * 0.5)}" height="${fmt(Math.abs(y(bar.mean) - y(0)))}" fill="#56b4e9"/>`,
    );
    // the bound line this bar must stay on the right side of
    body.push(
      `<line x1="${fmt(cx - slot * 0.35)}" y1="${fmt(y(bar.bound))}" ` +
      `x2="${fmt(cx + slot * 0.35)}" y2="${fmt(y(bar.bound))}" stroke="#d55e00" stroke-width="2" stroke-dasharray="5 3"/>`,
    );
    body.push(
      `<line x1="${fmt(cx)}" y1="${fmt(y(bar.mean - 3 * bar.se))}" x2="${fmt(cx)}" y2="${fmt(y(bar.mean + 3 * bar.se))}" stroke="#1f618d"/>`,
    );
    body.push(
      `<text x="${fmt(cx)}" y="${frame.height - frame.margin + 16}" text-anchor="middle" font-family="sans-serif" font-size="11">${bar.functional}</text>`,
    );
  });
  return svgDocument(frame, body, 'Drift statistics against their bounds');
}
