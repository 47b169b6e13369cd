/** Mapping canvas clicks to plan targets, with client-side validation
 * mirroring the server's rules (inside the disc, not in band D4). */

import type { DepthBandEdges, Plane } from "./types.js";

export interface ClickTarget {
  point: [number, number, number];
}

export interface RejectedClick {
  reason: string;
}

export type ClickOutcome = ClickTarget | RejectedClick;

export function isRejected(outcome: ClickOutcome): outcome is RejectedClick {
  return (outcome as RejectedClick).reason !== undefined;
}

/**
 * Convert a pixel position on an n-by-n heatmap into a target point.
 * Pixel (0, 0) is the top-left corner, so the image row axis runs
 * opposite to the plane's second coordinate.
 */
export function clickToTarget(
  col: number,
  row: number,
  n: number,
  radius: number,
  plane: Plane,
  bands: DepthBandEdges,
): ClickOutcome {
  if (col < 0 || row < 0 || col >= n || row >= n) {
    return { reason: "outside the canvas" };
  }
  const x = (col / (n - 1)) * 2 * radius - radius;
  const v = ((n - 1 - row) / (n - 1)) * 2 * radius - radius;
  const point: [number, number, number] =
    plane === "xy" ? [x, v, 0] : [x, 0, v];
  const r = Math.hypot(point[0], point[1], point[2]);
  if (r >= radius) {
    return { reason: "target must be inside the head" };
  }
  if (point[2] / radius < bands.lower) {
    return { reason: "band D4 is off-limit for stimulation" };
  }
  return { point };
}
