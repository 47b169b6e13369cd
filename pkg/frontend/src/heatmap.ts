/** Pure rasterizer: envelope payload -> RGBA pixel buffer.
 *
 * One raster node maps to one pixel (the canvas is scaled by CSS).
 * Values are normalized linearly to the payload maximum and run through
 * a dark-to-warm three-stop gradient; masked nodes are fully
 * transparent.  Optional overlays draw the nine-cell grid (xy plane),
 * the depth band edges (xz plane) and a crosshair on the focal argmax.
 * Row 0 of the buffer is the top of the image, which is the largest
 * value of the second plane coordinate.
 */

import type { DepthBandEdges, EnvelopePayload } from "./types.js";

export interface Raster {
  width: number;
  height: number;
  data: Uint8ClampedArray;
}

export interface OverlayOptions {
  regionGrid: boolean;
  depthBands: boolean;
  focalMarker: boolean;
  bandEdges: DepthBandEdges;
}

export const DEFAULT_OVERLAYS: OverlayOptions = {
  regionGrid: true,
  depthBands: true,
  focalMarker: true,
  bandEdges: { upper: 0.71, mid: 0.0, lower: -0.8 },
};

/** Three-stop gradient: near-black blue -> magenta -> warm yellow. */
export function colormap(t: number): [number, number, number] {
  const clamped = Math.min(1, Math.max(0, t));
  if (clamped < 0.5) {
    const u = clamped * 2;
    return [Math.round(20 + 160 * u), Math.round(12 + 28 * u), Math.round(60 + 120 * u)];
  }
  const u = (clamped - 0.5) * 2;
  return [Math.round(180 + 75 * u), Math.round(40 + 190 * u), Math.round(180 - 130 * u)];
}

function payloadMax(payload: EnvelopePayload): number {
  let max = 0;
  for (const row of payload.values) {
    for (const v of row) {
      if (v !== null && v > max) max = v;
    }
  }
  return max;
}

export function renderHeatmap(
  payload: EnvelopePayload,
  overlays: OverlayOptions = DEFAULT_OVERLAYS,
): Raster {
  const n = payload.resolution;
  const data = new Uint8ClampedArray(n * n * 4);
  const max = payloadMax(payload);

  for (let row = 0; row < n; row += 1) {
    // payload rows are v-ascending; image rows top-down
    const src = payload.values[n - 1 - row];
    for (let col = 0; col < n; col += 1) {
      const v = src[col];
      const at = (row * n + col) * 4;
      if (v === null) {
        data[at + 3] = 0;
        continue;
      }
      const [r, g, b] = colormap(max > 0 ? v / max : 0);
      data[at] = r;
      data[at + 1] = g;
      data[at + 2] = b;
      data[at + 3] = 255;
    }
  }

  if (overlays.regionGrid && payload.plane === "xy") {
    drawVerticalLine(data, n, coordToCol(payload, -payload.radius / 3));
    drawVerticalLine(data, n, coordToCol(payload, payload.radius / 3));
    drawHorizontalLine(data, n, coordToRow(payload, -payload.radius / 3));
    drawHorizontalLine(data, n, coordToRow(payload, payload.radius / 3));
  }
  if (overlays.depthBands && payload.plane === "xz") {
    const { upper, mid, lower } = overlays.bandEdges;
    for (const edge of [upper, mid, lower]) {
      drawHorizontalLine(data, n, coordToRow(payload, edge * payload.radius));
    }
  }
  if (overlays.focalMarker) {
    const [fx, , fz] = payload.focal.argmax;
    const fv = payload.plane === "xy" ? payload.focal.argmax[1] : fz;
    drawMarker(data, n, coordToCol(payload, fx), coordToRow(payload, fv));
  }
  return { width: n, height: n, data };
}

function coordToCol(payload: EnvelopePayload, x: number): number {
  const n = payload.resolution;
  const [lo, hi] = [payload.axis_x[0], payload.axis_x[n - 1]];
  return Math.round(((x - lo) / (hi - lo)) * (n - 1));
}

function coordToRow(payload: EnvelopePayload, v: number): number {
  const n = payload.resolution;
  const [lo, hi] = [payload.axis_v[0], payload.axis_v[n - 1]];
  return n - 1 - Math.round(((v - lo) / (hi - lo)) * (n - 1));
}

function blend(data: Uint8ClampedArray, at: number): void {
  // only recolor pixels inside the disc; keep the mask transparent
  if (data[at + 3] === 0) return;
  data[at] = Math.min(255, data[at] + 70);
  data[at + 1] = Math.min(255, data[at + 1] + 70);
  data[at + 2] = Math.min(255, data[at + 2] + 70);
}

function drawVerticalLine(data: Uint8ClampedArray, n: number, col: number): void {
  if (col < 0 || col >= n) return;
  for (let row = 0; row < n; row += 1) blend(data, (row * n + col) * 4);
}

function drawHorizontalLine(data: Uint8ClampedArray, n: number, row: number): void {
  if (row < 0 || row >= n) return;
  for (let col = 0; col < n; col += 1) blend(data, (row * n + col) * 4);
}

function drawMarker(data: Uint8ClampedArray, n: number, col: number, row: number): void {
  const arm = Math.max(2, Math.round(n / 32));
  for (let d = -arm; d <= arm; d += 1) {
    setMarkerPixel(data, n, col + d, row);
    setMarkerPixel(data, n, col, row + d);
  }
}

function setMarkerPixel(data: Uint8ClampedArray, n: number, col: number, row: number): void {
  if (col < 0 || col >= n || row < 0 || row >= n) return;
  const at = (row * n + col) * 4;
  data[at] = 255;
  data[at + 1] = 255;
  data[at + 2] = 255;
  data[at + 3] = 255;
}
