import { describe, expect, it } from "vitest";

import { ApiError, DrumSynthClient } from "../src/api.js";
import { blobBytes } from "../src/waveform.js";
import { fakeService, jsonResponse, makeInfo, toBase64, wavBytes } from "./helpers.js";

describe("DrumSynthClient.info", () => {
  it("fetches model metadata from /info", async () => {
    const service = fakeService();
    const client = new DrumSynthClient("http://svc", service.fetchFn);
    const info = await client.info();
    expect(service.calls[0].url).toBe("http://svc/info");
    expect(info.features).toEqual(makeInfo().features);
    expect(info.sample_rate).toBe(16000);
  });
});

describe("DrumSynthClient.generate", () => {
  it("posts the request as JSON and returns blob plus X-Seed", async () => {
    const service = fakeService();
    const client = new DrumSynthClient("", service.fetchFn);
    const req = { features: [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7], seed: 42 };
    const clip = await client.generate(req);

    const call = service.calls[0];
    expect(call.url).toBe("/generate");
    expect(call.init?.method).toBe("POST");
    expect(JSON.parse(call.init?.body as string)).toEqual(req);
    expect(clip.seed).toBe(42);
    const body = new Uint8Array(await clip.blob.arrayBuffer());
    expect(body).toEqual(new Uint8Array(wavBytes([42, -42, 42])));
  });

  it("forwards the abort signal", async () => {
    const service = fakeService();
    const client = new DrumSynthClient("", service.fetchFn);
    const controller = new AbortController();
    await client.generate({ features: [0, 0, 0, 0, 0, 0, 0] }, controller.signal);
    expect(service.calls[0].init?.signal).toBe(controller.signal);
  });

  it("maps structured 400 details onto ApiError", async () => {
    const detail = { code: "invalid_input", field: "features", message: "expected 7 values" };
    const fetchFn = async () => jsonResponse({ detail }, 400);
    const client = new DrumSynthClient("", fetchFn);
    const err = await client.generate({ features: [] }).catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.code).toBe("invalid_input");
    expect(err.field).toBe("features");
    expect(err.message).toBe("expected 7 values");
  });

  it("falls back to a generic error for non-JSON failures", async () => {
    const fetchFn = async () => new Response("boom", { status: 502 });
    const client = new DrumSynthClient("", fetchFn);
    const err = await client.generate({ features: [] }).catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.code).toBe("http_error");
    expect(err.message).toContain("502");
  });
});

describe("DrumSynthClient.interpolate", () => {
  it("decodes base64 clips into blobs and camelCases the envelope", async () => {
    const service = fakeService();
    const client = new DrumSynthClient("", service.fetchFn);
    const resp = await client.interpolate({
      features: [0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5],
      mode: "spherical",
      steps: 3,
      seed_start: 7,
      seed_end: 8,
    });

    expect(resp.clips).toHaveLength(3);
    expect(resp.mode).toBe("spherical");
    expect(resp.steps).toBe(3);
    expect(resp.seedStart).toBe(7);
    expect(resp.seedEnd).toBe(8);
    expect(resp.sampleRate).toBe(16000);
    const first = new Uint8Array(await blobBytes(resp.clips[0]));
    expect(first).toEqual(new Uint8Array(wavBytes([1])));
    expect(toBase64(await blobBytes(resp.clips[2]))).toBe(toBase64(wavBytes([3])));
  });
});

describe("DrumSynthClient.analyze", () => {
  it("uploads the file as multipart form data", async () => {
    const service = fakeService();
    const client = new DrumSynthClient("", service.fetchFn);
    const resp = await client.analyze(new Blob([wavBytes([1, 2, 3])]), "kick.wav");

    const call = service.calls[0];
    expect(call.url).toBe("/analyze");
    expect(call.init?.body).toBeInstanceOf(FormData);
    const form = call.init?.body as FormData;
    const entry = form.get("file");
    expect(entry).not.toBeNull();
    expect((entry as File).name).toBe("kick.wav");
    expect(resp.normalized.brightness).toBe(0);
    expect(resp.normalized.depth).toBe(0.1);
  });

  it("surfaces silent-input errors with their code", async () => {
    const detail = { code: "silent_input", field: "file", message: "input is silent" };
    const service = fakeService({ analyze: () => jsonResponse({ detail }, 400) });
    const client = new DrumSynthClient("", service.fetchFn);
    const err = await client.analyze(new Blob([new Uint8Array(4)])).catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.code).toBe("silent_input");
  });
});
