/** Shared test fixtures: WAV byte construction and a scripted service. */

import type { ModelInfo } from "../src/types.js";

export const FEATURES = [
  "brightness",
  "depth",
  "hardness",
  "roughness",
  "boominess",
  "warmth",
  "sharpness",
];

export function makeInfo(overrides: Partial<ModelInfo> = {}): ModelInfo {
  return {
    features: FEATURES,
    latent_dim: 128,
    cond_dim: 7,
    scale: 3,
    grid: [128, 16],
    sample_rate: 16000,
    checkpoint: "final",
    iteration: 4000,
    ...overrides,
  };
}

/** Minimal PCM16 RIFF/WAVE buffer; samples are raw interleaved int16. */
export function wavBytes(samples: number[], sampleRate = 16000, channels = 1): ArrayBuffer {
  const dataLen = samples.length * 2;
  const buf = new ArrayBuffer(44 + dataLen);
  const view = new DataView(buf);
  const writeTag = (off: number, s: string) => {
    for (let i = 0; i < s.length; i++) view.setUint8(off + i, s.charCodeAt(i));
  };
  writeTag(0, "RIFF");
  view.setUint32(4, 36 + dataLen, true);
  writeTag(8, "WAVE");
  writeTag(12, "fmt ");
  view.setUint32(16, 16, true);
  view.setUint16(20, 1, true);
  view.setUint16(22, channels, true);
  view.setUint32(24, sampleRate, true);
  view.setUint32(28, sampleRate * channels * 2, true);
  view.setUint16(32, channels * 2, true);
  view.setUint16(34, 16, true);
  writeTag(36, "data");
  view.setUint32(40, dataLen, true);
  samples.forEach((s, i) => view.setInt16(44 + i * 2, s, true));
  return buf;
}

export function toBase64(buf: ArrayBuffer): string {
  const bytes = new Uint8Array(buf);
  let raw = "";
  for (const b of bytes) raw += String.fromCharCode(b);
  return btoa(raw);
}

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export interface RecordedCall {
  url: string;
  init?: RequestInit;
}

export interface FakeService {
  fetchFn: (url: string, init?: RequestInit) => Promise<Response>;
  calls: RecordedCall[];
  generateBodies: () => Array<Record<string, unknown>>;
  interpolateBodies: () => Array<Record<string, unknown>>;
}

export interface FakeServiceOptions {
  info?: ModelInfo;
  analyze?: (init?: RequestInit) => Response;
  /** Seed the server draws when the request carries none. */
  firstAutoSeed?: number;
}

/**
 * Scripted stand-in for the HTTP service. Generated audio bytes are a pure
 * function of the seed, so seeded replays byte-match exactly like the real
 * server's deterministic rendering.
 */
export function fakeService(options: FakeServiceOptions = {}): FakeService {
  const info = options.info ?? makeInfo();
  const calls: RecordedCall[] = [];
  let autoSeed = options.firstAutoSeed ?? 100;

  const fetchFn = async (url: string, init?: RequestInit): Promise<Response> => {
    calls.push({ url, init });
    if (init?.signal?.aborted) throw new DOMException("The operation was aborted.", "AbortError");
    if (url.endsWith("/info")) return jsonResponse(info);
    if (url.endsWith("/generate")) {
      const req = JSON.parse(init?.body as string);
      const seed: number = req.seed ?? autoSeed++;
      return new Response(wavBytes([seed, -seed, seed]), {
        status: 200,
        headers: { "Content-Type": "audio/wav", "X-Seed": String(seed) },
      });
    }
    if (url.endsWith("/interpolate")) {
      const req = JSON.parse(init?.body as string);
      const clips = Array.from({ length: req.steps }, (_, i) => toBase64(wavBytes([i + 1])));
      return jsonResponse({
        clips,
        mode: req.mode,
        steps: req.steps,
        seed_start: req.seed_start ?? 0,
        seed_end: req.seed_end ?? 0,
        sample_rate: info.sample_rate,
      });
    }
    if (url.endsWith("/analyze")) {
      if (options.analyze) return options.analyze(init);
      const normalized = Object.fromEntries(info.features.map((name, i) => [name, i / 10]));
      const raw = Object.fromEntries(info.features.map((name, i) => [name, i * 10]));
      return jsonResponse({ raw, normalized });
    }
    return jsonResponse({ detail: { code: "not_found", field: "", message: `no route ${url}` } }, 404);
  };

  const bodiesFor = (suffix: string) => () =>
    calls
      .filter((c) => c.url.endsWith(suffix))
      .map((c) => JSON.parse(c.init?.body as string) as Record<string, unknown>);

  return {
    fetchFn,
    calls,
    generateBodies: bodiesFor("/generate"),
    interpolateBodies: bodiesFor("/interpolate"),
  };
}

/** Let queued microtasks and zero-delay timers drain. */
export async function flush(times = 4): Promise<void> {
  for (let i = 0; i < times; i++) {
    await new Promise((resolve) => setTimeout(resolve, 0));
  }
}
