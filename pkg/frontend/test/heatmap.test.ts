import { describe, expect, it } from "vitest";

import { DEFAULT_OVERLAYS, colormap, renderHeatmap } from "../src/heatmap.js";
import type { EnvelopePayload, Plane } from "../src/types.js";

/** Synthetic payload on an n-by-n grid over [-1, 1]^2 with a disc mask
 * and a given value function. */
function payload(
  n: number,
  plane: Plane,
  value: (x: number, v: number) => number,
): EnvelopePayload {
  const axis = Array.from({ length: n }, (_, k) => -1 + (2 * k) / (n - 1));
  const values: (number | null)[][] = [];
  let best = -Infinity;
  let arg: [number, number] = [0, 0];
  for (const v of axis) {
    const row: (number | null)[] = [];
    for (const x of axis) {
      if (x * x + v * v >= 1) {
        row.push(null);
      } else {
        const val = value(x, v);
        row.push(val);
        if (val > best) {
          best = val;
          arg = [x, v];
        }
      }
    }
    values.push(row);
  }
  return {
    schema_version: 1,
    plane,
    resolution: n,
    radius: 1,
    axis_x: axis,
    axis_v: axis,
    values,
    focal: {
      plane,
      argmax: plane === "xy" ? [arg[0], arg[1], 0] : [arg[0], 0, arg[1]],
      peak: best,
      tau: 0.75,
      extent: 0.1,
      region: "R22",
      depth: "D2",
      ambiguous: false,
    },
  };
}

describe("renderHeatmap", () => {
  it("renders a mirror-symmetric raster for a symmetric payload", () => {
    const n = 65;
    const raster = renderHeatmap(
      payload(n, "xy", (x, v) => Math.exp(-4 * (x * x + v * v))),
      DEFAULT_OVERLAYS,
    );
    expect(raster.width).toBe(n);
    for (let row = 0; row < n; row += 1) {
      for (let col = 0; col < n; col += 1) {
        const a = (row * n + col) * 4;
        const b = (row * n + (n - 1 - col)) * 4;
        for (let c = 0; c < 4; c += 1) {
          expect(raster.data[a + c]).toBe(raster.data[b + c]);
        }
      }
    }
  });

  it("makes masked nodes fully transparent", () => {
    const n = 33;
    const raster = renderHeatmap(payload(n, "xy", () => 1), DEFAULT_OVERLAYS);
    expect(raster.data[3]).toBe(0); // top-left corner is outside the disc
    const mid = ((Math.floor(n / 2) * n) + Math.floor(n / 2)) * 4;
    expect(raster.data[mid + 3]).toBe(255);
  });

  it("normalizes to the payload maximum", () => {
    const n = 33;
    const raster = renderHeatmap(
      payload(n, "xy", (x, v) => 5 * Math.exp(-8 * ((x - 0.2) ** 2 + v * v))),
      { ...DEFAULT_OVERLAYS, regionGrid: false, focalMarker: false },
    );
    const top = colormap(1);
    let found = false;
    for (let k = 0; k < n * n; k += 1) {
      if (
        raster.data[4 * k] === top[0] &&
        raster.data[4 * k + 1] === top[1] &&
        raster.data[4 * k + 2] === top[2]
      ) {
        found = true;
        break;
      }
    }
    expect(found).toBe(true);
  });

  it("marks the focal argmax with a crosshair", () => {
    const n = 33;
    const p = payload(n, "xy", (x, v) => Math.exp(-4 * ((x - 0.5) ** 2 + v * v)));
    const bare = renderHeatmap(p, { ...DEFAULT_OVERLAYS, focalMarker: false });
    const marked = renderHeatmap(p, { ...DEFAULT_OVERLAYS, focalMarker: true });
    let markerPixels = 0;
    for (let k = 0; k < n * n; k += 1) {
      if (
        marked.data[4 * k] === 255 &&
        marked.data[4 * k + 1] === 255 &&
        marked.data[4 * k + 2] === 255 &&
        bare.data[4 * k] !== 255
      ) {
        markerPixels += 1;
      }
    }
    expect(markerPixels).toBeGreaterThan(3);
  });

  it("draws depth band lines only on the xz plane", () => {
    const n = 65;
    const flat = (x: number, v: number) => 1 + 0 * x + 0 * v;
    const xy = renderHeatmap(payload(n, "xy", flat), {
      ...DEFAULT_OVERLAYS, regionGrid: false, focalMarker: false,
    });
    const xz = renderHeatmap(payload(n, "xz", flat), {
      ...DEFAULT_OVERLAYS, regionGrid: false, focalMarker: false,
    });
    const different = Array.from(xz.data).some((value, k) => value !== xy.data[k]);
    expect(different).toBe(true);
  });

  it("colormap is monotone in luma", () => {
    let last = -1;
    for (let t = 0; t <= 1.0001; t += 0.05) {
      const [r, g, b] = colormap(t);
      const luma = 0.2126 * r + 0.7152 * g + 0.0722 * b;
      expect(luma).toBeGreaterThan(last);
      last = luma;
    }
  });
});
