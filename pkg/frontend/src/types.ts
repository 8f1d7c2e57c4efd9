/** Wire types for the generation service (GET /info, POST /generate, ...). */

export interface ModelInfo {
  features: string[];
  latent_dim: number;
  cond_dim: number;
  scale: number;
  grid: [number, number];
  sample_rate: number;
  checkpoint: string;
  iteration: number;
}

export interface GenerateRequest {
  features: number[];
  seed?: number;
  latent?: number[];
  count?: number;
}

export type InterpolationMode = "spherical" | "radial";

export interface InterpolateRequest {
  features: number[];
  mode: InterpolationMode;
  steps: number;
  seed_start?: number;
  seed_end?: number;
  z_start?: number[];
  z_end?: number[];
}

export interface InterpolateResponse {
  clips: Blob[];
  mode: InterpolationMode;
  steps: number;
  seedStart: number;
  seedEnd: number;
  sampleRate: number;
}

export interface AnalyzeResponse {
  raw: Record<string, number>;
  normalized: Record<string, number>;
}

export interface GeneratedClip {
  blob: Blob;
  seed: number;
}

/** One auditioned sound; history stores these append-only. */
export interface Snapshot {
  features: number[];
  seed: number;
}
