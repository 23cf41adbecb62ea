/** Tiny deterministic SVG builders shared by the report figures. */

export interface Frame {
  width: number;
  height: number;
  margin: number;
}

export const DEFAULT_FRAME: Frame = { width: 640, height: 420, margin: 56 };

export function svgDocument(frame: Frame, body: string[], title: string): string {
  const parts = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${frame.width}" height="${frame.height}" viewBox="0 0 ${frame.width} ${frame.height}">`,
    `<rect width="${frame.width}" height="${frame.height}" fill="white"/>`,
    `<text x="${frame.width / 2}" y="${frame.margin / 2}" text-anchor="middle" font-family="sans-serif" font-size="15">${title}</text>`,
    ...body,
    '</svg>',
  ];
  return parts.join('\n') + '\n';
}

export function linearScale(domain: [number, number], range: [number, number]) {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  return (v: number) => r0 + ((v - d0) / span) * (r1 - r0);
}

export function fmt(v: number): string {
  return Number.isInteger(v) ? String(v) : v.toPrecision(4);
}

export function axes(frame: Frame, xLabel: string, yLabel: string): string[] {
  const { width, height, margin } = frame;
  return [
    `<line x1="${margin}" y1="${height - margin}" x2="${width - margin}" y2="${height - margin}" stroke="black"/>`,
    `<line x1="${margin}" y1="${margin}" x2="${margin}" y2="${height - margin}" stroke="black"/>`,
    `<text x="${width / 2}" y="${height - 12}" text-anchor="middle" font-family="sans-serif" font-size="12">${xLabel}</text>`,
    `<text x="16" y="${height / 2}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 16 ${height / 2})">${yLabel}</text>`,
  ];
}
