/** Pure rendering helpers: payload -> pixels / polylines.
 *
 * Deterministic by construction: the same payload always yields the same
 * bytes.  Patches use a fixed symmetric blue-white-red diverging colormap so
 * cards stay comparable across the session; scalar field maps (posterior
 * mean/variance, baseline) use the same ramp over their own min-max range.
 */

import type { Payload } from "./types.js";

export interface Raster {
  width: number;
  height: number;
  /** RGBA, row-major, 4 bytes per pixel. */
  data: Uint8ClampedArray<ArrayBuffer>;
}

/** Diverging blue -> white -> red ramp; t in [0, 1]. */
export function divergingColor(t: number): [number, number, number] {
  const x = Math.min(1, Math.max(0, t));
  if (x < 0.5) {
    const s = x / 0.5;
    return [
      Math.round(25 + (255 - 25) * s),
      Math.round(60 + (255 - 60) * s),
      Math.round(190 + (255 - 190) * s),
    ];
  }
  const s = (x - 0.5) / 0.5;
  return [
    Math.round(255 - (255 - 190) * s),
    Math.round(255 - (255 - 40) * s),
    Math.round(255 - (255 - 35) * s),
  ];
}

export interface HeatmapOptions {
  /** Center the ramp on zero with range ±max|v| (two-phase image patches). */
  symmetric?: boolean;
}

export function heatmapRaster(
  values: number[],
  height: number,
  width: number,
  options: HeatmapOptions = {},
): Raster {
  if (values.length !== height * width) {
    throw new Error(
      `heatmap expects ${height * width} values, got ${values.length}`,
    );
  }
  let lo: number;
  let hi: number;
  if (options.symmetric) {
    const amp = values.reduce((m, v) => Math.max(m, Math.abs(v)), 0) || 1;
    lo = -amp;
    hi = amp;
  } else {
    lo = Math.min(...values);
    hi = Math.max(...values);
    if (hi <= lo) hi = lo + 1;
  }
  const data = new Uint8ClampedArray(height * width * 4);
  for (let i = 0; i < values.length; i++) {
    const [r, g, b] = divergingColor((values[i] - lo) / (hi - lo));
    data[i * 4] = r;
    data[i * 4 + 1] = g;
    data[i * 4 + 2] = b;
    data[i * 4 + 3] = 255;
  }
  return { width, height, data };
}

export function payloadRaster(payload: Payload): Raster | null {
  if (payload.kind !== "image_patch") return null;
  const [h, w] = payload.shape;
  return heatmapRaster(payload.values, h, w, { symmetric: true });
}

/** Normalized SVG polyline points for one series within a view box. */
export function polylinePoints(
  series: number[],
  width: number,
  height: number,
  pad = 2,
): string {
  if (series.length === 0) return "";
  let lo = Math.min(...series);
  let hi = Math.max(...series);
  if (hi <= lo) {
    hi = lo + 1;
    lo = lo - 1;
  }
  const n = series.length;
  return series
    .map((v, i) => {
      const x = pad + (n === 1 ? 0.5 : i / (n - 1)) * (width - 2 * pad);
      const y = height - pad - ((v - lo) / (hi - lo)) * (height - 2 * pad);
      return `${x.toFixed(2)},${y.toFixed(2)}`;
    })
    .join(" ");
}

/** Per-channel polylines for a spectrum payload. */
export function spectrumPolylines(
  channels: number[][],
  width: number,
  height: number,
): string[] {
  return channels.map((channel) => polylinePoints(channel, width, height));
}
