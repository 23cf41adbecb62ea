/**
 * Raster rendering of keep-set class maps.
 *
 * Every grid cell carries a class: -1 for locations that would bounce
 * off (not in the keep set), otherwise the index of the point the
 * arrival would displace. One color per class, light background, core
 * points overplotted as dark markers when provided.
 */

import { KeepmapCell } from './csv.js';
import { encodePng } from './png.js';

export const BACKGROUND: [number, number, number] = [245, 245, 245];

/** Color-blind friendly classes; cycles if there are more than eight. */
export const PALETTE: [number, number, number][] = [
  [230, 159, 0],
  [86, 180, 233],
  [0, 158, 115],
  [240, 228, 66],
  [0, 114, 178],
  [213, 94, 0],
  [204, 121, 167],
  [153, 153, 153],
];

export const MARKER: [number, number, number] = [20, 20, 20];

export interface KeepmapImage {
  width: number;
  height: number;
  png: Buffer;
  classes: number[];
  warning?: string;
}

interface Grid {
  nx: number;
  ny: number;
  cls: Int32Array;
  xMin: number;
  xMax: number;
  yMin: number;
  yMax: number;
}

export function buildGrid(cells: KeepmapCell[]): Grid {
  if (cells.length === 0) {
    throw new Error('keepmap CSV has no cells');
  }
  let nx = 0;
  let ny = 0;
  for (const c of cells) {
    nx = Math.max(nx, c.ix + 1);
    ny = Math.max(ny, c.iy + 1);
  }
  const cls = new Int32Array(nx * ny).fill(-1);
  let xMin = Infinity;
  let xMax = -Infinity;
  let yMin = Infinity;
  let yMax = -Infinity;
  for (const c of cells) {
    cls[c.iy * nx + c.ix] = c.cls;
    xMin = Math.min(xMin, c.x);
    xMax = Math.max(xMax, c.x);
    yMin = Math.min(yMin, c.y);
    yMax = Math.max(yMax, c.y);
  }
  return { nx, ny, cls, xMin, xMax, yMin, yMax };
}

/** Cells per class, excluding the background. */
export function classCounts(cells: KeepmapCell[]): Map<number, number> {
  const counts = new Map<number, number>();
  for (const c of cells) {
    if (c.cls >= 0) {
      counts.set(c.cls, (counts.get(c.cls) ?? 0) + 1);
    }
  }
  return counts;
}

/**
 * Sizes of the 4-connected components of one class, descending.
 * A lobed region shows up as a single dominant component.
 */
export function componentSizes(cells: KeepmapCell[], cls: number): number[] {
  const grid = buildGrid(cells);
  const { nx, ny } = grid;
  const seen = new Uint8Array(nx * ny);
  const sizes: number[] = [];
  for (let start = 0; start < nx * ny; start++) {
    if (seen[start] || grid.cls[start] !== cls) continue;
    let size = 0;
    const stack = [start];
    seen[start] = 1;
    while (stack.length > 0) {
      const at = stack.pop()!;
      size++;
      const ix = at % nx;
      const iy = (at - ix) / nx;
      for (const [dx, dy] of [[1, 0], [-1, 0], [0, 1], [0, -1]] as const) {
        const jx = ix + dx;
        const jy = iy + dy;
        if (jx < 0 || jy < 0 || jx >= nx || jy >= ny) continue;
        const j = jy * nx + jx;
        if (!seen[j] && grid.cls[j] === cls) {
          seen[j] = 1;
          stack.push(j);
        }
      }
    }
    sizes.push(size);
  }
  return sizes.sort((a, b) => b - a);
}

export function renderKeepmap(cells: KeepmapCell[], corePoints?: number[][]): KeepmapImage {
  const grid = buildGrid(cells);
  const { nx, ny } = grid;
  const rgb = new Uint8Array(nx * ny * 3);
  const classes = new Set<number>();
  for (let iy = 0; iy < ny; iy++) {
    for (let ix = 0; ix < nx; ix++) {
      const cls = grid.cls[iy * nx + ix];
      classes.add(cls);
      const color = cls < 0 ? BACKGROUND : PALETTE[cls % PALETTE.length];
      // PNG rows go top to bottom; grid iy grows upward
      const row = ny - 1 - iy;
      const at = (row * nx + ix) * 3;
      rgb[at] = color[0];
      rgb[at + 1] = color[1];
      rgb[at + 2] = color[2];
    }
  }
  if (corePoints && nx > 2 && ny > 2) {
    for (const p of corePoints) {
      const ix = Math.round(((p[0] - grid.xMin) / (grid.xMax - grid.xMin)) * (nx - 1));
      const iy = Math.round(((p[1] - grid.yMin) / (grid.yMax - grid.yMin)) * (ny - 1));
      for (let dy = -1; dy <= 1; dy++) {
        for (let dx = -1; dx <= 1; dx++) {
          const jx = ix + dx;
          const jy = iy + dy;
          if (jx < 0 || jy < 0 || jx >= nx || jy >= ny) continue;
          const at = ((ny - 1 - jy) * nx + jx) * 3;
          rgb[at] = MARKER[0];
          rgb[at + 1] = MARKER[1];
          rgb[at + 2] = MARKER[2];
        }
      }
    }
  }
  const image: KeepmapImage = {
    width: nx,
    height: ny,
    png: encodePng(nx, ny, rgb),
    classes: [...classes].sort((a, b) => a - b),
  };
  if (![...classes].some((c) => c >= 0)) {
    image.warning = 'grid is entirely outside the keep set; rendering background only';
  }
  return image;
}
