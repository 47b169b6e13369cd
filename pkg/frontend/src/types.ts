/** Wire types for the /api/v1 endpoints the explorer talks to. */

export interface MontageParams {
  phi: number;
  alpha: number;
  psi: number;
  i_left: number;
  i_right: number;
  f1?: number;
  f2?: number;
}

export type Plane = "xy" | "xz";

export interface EnvelopeRequest {
  montage: MontageParams;
  plane: Plane;
  resolution: number;
}

export interface FocalInfo {
  plane: Plane;
  argmax: [number, number, number];
  peak: number;
  tau: number;
  extent: number;
  region: string;
  depth: string;
  ambiguous: boolean;
}

export interface EnvelopePayload {
  schema_version: number;
  plane: Plane;
  resolution: number;
  radius: number;
  axis_x: number[];
  axis_v: number[];
  values: (number | null)[][];
  focal: FocalInfo;
}

export interface DepthBandEdges {
  upper: number;
  mid: number;
  lower: number;
}

export interface ParameterBounds {
  phi: { min: number; max: number };
  alpha: { min: number; max: number };
  psi: { min: number; max: number };
  ratio: { min: number; max: number };
  resolution: { min: number; max: number };
  depth_bands: DepthBandEdges;
}

export interface ScenarioPreset {
  name: string;
  swept_parameter: string;
  fixed: Record<string, number>;
  sweep_values: number[];
}

export interface ScenariosPayload {
  schema_version: number;
  presets: ScenarioPreset[];
  bounds: ParameterBounds;
  model: { radius: number; conductivity: number };
}

export interface PlanResultPayload {
  schema_version: number;
  montage: {
    pairs: unknown;
    parameters?: MontageParams;
  };
  target: [number, number, number];
  envelope_at_target: number;
  focality_ratio: number;
  converged: boolean;
  objective: number;
  safety: { passed: boolean; checks: unknown[] };
}

export interface ApiError {
  status: number;
  error?: string;
  message?: string;
}
