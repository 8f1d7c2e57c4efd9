/** Typed client for the generation service.
 *
 * Every non-2xx response carries {"detail": {code, field, message}}; that
 * detail is rethrown as ApiError so the UI can highlight the offending
 * control. The fetch function is injectable for tests.
 */

import type {
  AnalyzeResponse,
  GeneratedClip,
  GenerateRequest,
  InterpolateRequest,
  InterpolateResponse,
  ModelInfo,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly code: string,
    readonly field: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function raiseForStatus(resp: Response): Promise<void> {
  if (resp.ok) return;
  let code = "http_error";
  let field = "";
  let message = `request failed with status ${resp.status}`;
  try {
    const body = await resp.json();
    const detail = body?.detail;
    if (detail && typeof detail === "object") {
      code = detail.code ?? code;
      field = detail.field ?? field;
      message = detail.message ?? message;
    }
  } catch {
    // non-JSON error body: keep the generic message
  }
  throw new ApiError(code, field, message);
}

function base64ToBlob(encoded: string, type: string): Blob {
  const raw = atob(encoded);
  const bytes = new Uint8Array(raw.length);
  for (let i = 0; i < raw.length; i++) bytes[i] = raw.charCodeAt(i);
  return new Blob([bytes], { type });
}

export class DrumSynthClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async info(): Promise<ModelInfo> {
    const resp = await this.fetchFn(`${this.baseUrl}/info`);
    await raiseForStatus(resp);
    return (await resp.json()) as ModelInfo;
  }

  /** Single-clip generation; the drawn seed comes back in X-Seed. */
  async generate(req: GenerateRequest, signal?: AbortSignal): Promise<GeneratedClip> {
    const resp = await this.fetchFn(`${this.baseUrl}/generate`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(req),
      signal,
    });
    await raiseForStatus(resp);
    const seed = Number(resp.headers.get("X-Seed"));
    return { blob: await resp.blob(), seed };
  }

  async interpolate(req: InterpolateRequest): Promise<InterpolateResponse> {
    const resp = await this.fetchFn(`${this.baseUrl}/interpolate`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(req),
    });
    await raiseForStatus(resp);
    const body = await resp.json();
    return {
      clips: (body.clips as string[]).map((c) => base64ToBlob(c, "audio/wav")),
      mode: body.mode,
      steps: body.steps,
      seedStart: body.seed_start,
      seedEnd: body.seed_end,
      sampleRate: body.sample_rate,
    };
  }

  async analyze(file: Blob, filename = "upload.wav"): Promise<AnalyzeResponse> {
    const form = new FormData();
    form.append("file", file, filename);
    const resp = await this.fetchFn(`${this.baseUrl}/analyze`, {
      method: "POST",
      body: form,
    });
    await raiseForStatus(resp);
    return (await resp.json()) as AnalyzeResponse;
  }
}
