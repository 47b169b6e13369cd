/** Explorer view state: slider values, plane, overlays, last payload.
 *
 * The store is framework-free: mutations go through methods that clamp
 * against the server-provided bounds (fetched once from /api/v1/scenarios,
 * the single source of truth for slider ranges) and notify subscribers.
 */

import type {
  EnvelopePayload,
  MontageParams,
  ParameterBounds,
  Plane,
  PlanResultPayload,
} from "./types.js";

export interface SliderValues {
  phi: number;
  alpha: number;
  psi: number;
  ratio: number; // I_L / I_R, log-scaled slider
}

export const FALLBACK_BOUNDS: ParameterBounds = {
  phi: { min: 0, max: 135 },
  alpha: { min: 1, max: 179 },
  psi: { min: -180, max: 180 },
  ratio: { min: 0.25, max: 4 },
  resolution: { min: 16, max: 257 },
  depth_bands: { upper: 0.71, mid: 0.0, lower: -0.8 },
};

export interface ViewSnapshot {
  sliders: SliderValues;
  plane: Plane;
  overlays: { regionGrid: boolean; depthBands: boolean; focalMarker: boolean };
  payload: EnvelopePayload | null;
  pending: boolean;
  banner: string | null;
  planResult: PlanResultPayload | null;
}

export class ViewState {
  bounds: ParameterBounds = FALLBACK_BOUNDS;
  sliders: SliderValues = { phi: 70, alpha: 20, psi: 0, ratio: 1 };
  plane: Plane = "xy";
  overlays = { regionGrid: true, depthBands: true, focalMarker: true };
  payload: EnvelopePayload | null = null;
  pending = false;
  banner: string | null = null;
  planResult: PlanResultPayload | null = null;
  private listeners: Array<(state: ViewState) => void> = [];

  subscribe(listener: (state: ViewState) => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener(this);
  }

  setBounds(bounds: ParameterBounds): void {
    this.bounds = bounds;
    this.setSliders(this.sliders); // re-clamp against the fresh bounds
  }

  clamp(values: SliderValues): SliderValues {
    const b = this.bounds;
    const clip = (v: number, lo: number, hi: number) => Math.min(hi, Math.max(lo, v));
    return {
      phi: clip(values.phi, b.phi.min, b.phi.max),
      alpha: clip(values.alpha, b.alpha.min, b.alpha.max),
      psi: clip(values.psi, b.psi.min, b.psi.max),
      ratio: clip(values.ratio, b.ratio.min, b.ratio.max),
    };
  }

  setSliders(values: SliderValues): void {
    this.sliders = this.clamp(values);
    this.notify();
  }

  setPlane(plane: Plane): void {
    this.plane = plane;
    this.notify();
  }

  montage(): MontageParams {
    return {
      phi: this.sliders.phi,
      alpha: this.sliders.alpha,
      psi: this.sliders.psi,
      i_left: this.sliders.ratio,
      i_right: 1,
    };
  }

  setPending(pending: boolean): void {
    this.pending = pending;
    this.notify();
  }

  showPayload(payload: EnvelopePayload): void {
    this.payload = payload;
    this.pending = false;
    this.banner = null;
    this.notify();
  }

  showError(message: string): void {
    this.pending = false;
    this.banner = message;
    this.notify();
  }

  showPlanResult(result: PlanResultPayload): void {
    this.planResult = result;
    this.notify();
  }

  /** Apply a returned plan to the sliders (the confirm step of the
   * plan-for-me loop); returns false when the result has no symmetric
   * parameter form to apply. */
  applyPlanResult(result: PlanResultPayload): boolean {
    const params = result.montage.parameters;
    if (!params) return false;
    this.setSliders({
      phi: params.phi,
      alpha: params.alpha,
      psi: params.psi,
      ratio: params.i_left / params.i_right,
    });
    this.planResult = null;
    this.notify();
    return true;
  }
}
