/** Panel state and request building.
 *
 * Sliders are stored normalized in [0, 1] (the wire format); the DOM layer
 * converts to and from the raw 0-100 display units. All clamping happens
 * here so the UI can never send a request the server would reject for
 * range reasons.
 */

import type { GenerateRequest, InterpolationMode, Snapshot } from "./types.js";

export interface InterpolationSettings {
  mode: InterpolationMode;
  steps: number;
}

export interface PanelState {
  featureNames: string[];
  /** Normalized slider values, same order as featureNames. */
  features: number[];
  lockedSeed: number | null;
  lastSeed: number | null;
  interpolation: InterpolationSettings;
  /** Append-only within a session. */
  history: Snapshot[];
  /** Indices into history; interpolation needs both pinned. */
  pinA: number | null;
  pinB: number | null;
}

export function initialState(featureNames: string[]): PanelState {
  return {
    featureNames,
    features: featureNames.map(() => 0.5),
    lockedSeed: null,
    lastSeed: null,
    interpolation: { mode: "spherical", steps: 8 },
    history: [],
    pinA: null,
    pinB: null,
  };
}

export function clamp01(x: number): number {
  if (Number.isNaN(x)) return 0;
  return Math.min(1, Math.max(0, x));
}

/** Display units (0-100) -> wire units (0-1), clamped. */
export function rawToNormalized(raw: number): number {
  return clamp01(raw / 100);
}

/** Wire units (0-1) -> display units (0-100). */
export function normalizedToRaw(normalized: number): number {
  return clamp01(normalized) * 100;
}

export function buildGenerateRequest(state: PanelState): GenerateRequest {
  const req: GenerateRequest = { features: state.features.map(clamp01) };
  if (state.lockedSeed !== null) req.seed = state.lockedSeed;
  return req;
}

/** Record an auditioned (features, seed) pair. Never mutates older entries. */
export function appendHistory(state: PanelState, snapshot: Snapshot): void {
  state.history.push({ features: [...snapshot.features], seed: snapshot.seed });
}

export function canInterpolate(state: PanelState): boolean {
  return state.pinA !== null && state.pinB !== null && state.pinA !== state.pinB;
}

/** Serializes generate calls: at most one in flight, stale results dropped. */
export class LatestWins {
  private controller: AbortController | null = null;
  private ticket = 0;

  /**
   * Run `task` with an abort signal. If a newer issue() supersedes this one,
   * the previous signal is aborted and the superseded call resolves null.
   */
  async issue<T>(task: (signal: AbortSignal) => Promise<T>): Promise<T | null> {
    this.controller?.abort();
    const controller = new AbortController();
    this.controller = controller;
    const ticket = ++this.ticket;
    try {
      const result = await task(controller.signal);
      return ticket === this.ticket ? result : null;
    } catch (err) {
      if (controller.signal.aborted) return null;
      throw err;
    }
  }
}
