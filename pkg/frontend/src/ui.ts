/** DOM wiring for the control surface.
 *
 * Layout: seven feature sliders (raw 0-100 display, normalized on the
 * wire), seed lock/randomize, render + playback with waveform, append-only
 * history with replay and A/B pinning, interpolation playback with step
 * labels, and reference-WAV analysis that sets the sliders.
 */

import { ApiError, DrumSynthClient } from "./api.js";
import { stepLabels } from "./labels.js";
import {
  appendHistory,
  buildGenerateRequest,
  canInterpolate,
  clamp01,
  initialState,
  LatestWins,
  normalizedToRaw,
  rawToNormalized,
  type PanelState,
} from "./state.js";
import type { InterpolationMode, Snapshot } from "./types.js";
import { blobBytes, drawWaveform, wavPeaks } from "./waveform.js";

export interface PanelController {
  state: PanelState;
  sliders: HTMLInputElement[];
  lockCheckbox: HTMLInputElement;
  seedDisplay: HTMLElement;
  stepLabel: HTMLElement;
  errorLine: HTMLElement;
  audio: HTMLAudioElement;
  historyList: HTMLElement;
  interpolateButton: HTMLButtonElement;
  modeSelect: HTMLSelectElement;
  stepsInput: HTMLInputElement;
  fileInput: HTMLInputElement;
  renderCurrent(): Promise<void>;
  replaySnapshot(index: number): Promise<void>;
  pin(which: "A" | "B", index: number): void;
  playInterpolation(): Promise<void>;
  analyzeFile(file: Blob, name?: string): Promise<void>;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export async function buildPanel(root: HTMLElement, client: DrumSynthClient): Promise<PanelController> {
  const info = await client.info();
  const state = initialState(info.features);
  const gate = new LatestWins();

  root.textContent = "";
  const errorLine = el("div", "error-line");
  root.appendChild(errorLine);

  // sliders: names and order come from /info, display is raw 0-100
  const sliderSection = el("section", "sliders");
  const sliders: HTMLInputElement[] = [];
  const sliderRows = new Map<string, HTMLElement>();
  info.features.forEach((name, i) => {
    const row = el("div", "slider-row");
    row.dataset.feature = name;
    const label = el("label", "slider-label", name);
    const input = el("input");
    input.type = "range";
    input.min = "0";
    input.max = "100";
    input.step = "1";
    input.value = String(normalizedToRaw(state.features[i]));
    const readout = el("span", "slider-value", input.value);
    input.addEventListener("input", () => {
      state.features[i] = rawToNormalized(Number(input.value));
      readout.textContent = String(Math.round(normalizedToRaw(state.features[i])));
      void controller.renderCurrent();
    });
    row.append(label, input, readout);
    sliderSection.appendChild(row);
    sliders.push(input);
    sliderRows.set(name, row);
  });
  root.appendChild(sliderSection);

  // seed controls
  const seedSection = el("section", "seed");
  const lockCheckbox = el("input");
  lockCheckbox.type = "checkbox";
  const lockLabel = el("label", "lock-label", "lock seed");
  lockLabel.prepend(lockCheckbox);
  const seedDisplay = el("span", "seed-display", "-");
  const randomizeButton = el("button", "randomize", "randomize");
  lockCheckbox.addEventListener("change", () => {
    state.lockedSeed = lockCheckbox.checked ? state.lastSeed : null;
  });
  randomizeButton.addEventListener("click", () => {
    state.lockedSeed = null;
    lockCheckbox.checked = false;
    void controller.renderCurrent();
  });
  const renderButton = el("button", "render", "render");
  renderButton.addEventListener("click", () => void controller.renderCurrent());
  seedSection.append(lockLabel, seedDisplay, randomizeButton, renderButton);
  root.appendChild(seedSection);

  // playback
  const audio = el("audio");
  audio.controls = true;
  const canvas = el("canvas");
  canvas.width = 480;
  canvas.height = 96;
  const stepLabel = el("div", "step-label");
  root.append(audio, canvas, stepLabel);

  // history
  const historySection = el("section", "history");
  historySection.appendChild(el("h2", undefined, "history"));
  const historyList = el("ol", "history-list");
  historySection.appendChild(historyList);
  root.appendChild(historySection);

  // interpolation
  const interpSection = el("section", "interpolation");
  const modeSelect = el("select");
  for (const mode of ["spherical", "radial"]) {
    const option = el("option", undefined, mode);
    option.value = mode;
    modeSelect.appendChild(option);
  }
  const stepsInput = el("input");
  stepsInput.type = "number";
  stepsInput.min = "2";
  stepsInput.max = "32";
  stepsInput.value = String(state.interpolation.steps);
  const interpolateButton = el("button", "interpolate", "play interpolation");
  interpolateButton.disabled = true;
  modeSelect.addEventListener("change", () => {
    state.interpolation.mode = modeSelect.value as InterpolationMode;
  });
  stepsInput.addEventListener("change", () => {
    state.interpolation.steps = Math.max(2, Math.floor(Number(stepsInput.value) || 2));
    stepsInput.value = String(state.interpolation.steps);
  });
  interpolateButton.addEventListener("click", () => void controller.playInterpolation());
  interpSection.append(modeSelect, stepsInput, interpolateButton);
  root.appendChild(interpSection);

  // reference analysis
  const analyzeSection = el("section", "analyze");
  const fileInput = el("input");
  fileInput.type = "file";
  fileInput.accept = "audio/wav";
  fileInput.addEventListener("change", () => {
    const file = fileInput.files?.[0];
    if (file) void controller.analyzeFile(file, file.name);
  });
  analyzeSection.append(el("label", undefined, "match a reference"), fileInput);
  root.appendChild(analyzeSection);

  function showError(err: unknown): void {
    clearHighlights();
    if (err instanceof ApiError) {
      const prefix = err.code === "silent_input" ? "SilentInput: " : "";
      errorLine.textContent = prefix + err.message;
      if (err.field === "features") sliderSection.classList.add("field-error");
      else sliderRows.get(err.field)?.classList.add("field-error");
    } else {
      errorLine.textContent = err instanceof Error ? err.message : String(err);
    }
  }

  function clearHighlights(): void {
    sliderSection.classList.remove("field-error");
    for (const row of sliderRows.values()) row.classList.remove("field-error");
  }

  function clearError(): void {
    errorLine.textContent = "";
    clearHighlights();
  }

  function setSliders(features: number[]): void {
    state.features = features.map(clamp01);
    state.features.forEach((value, i) => {
      sliders[i].value = String(normalizedToRaw(value));
      const readout = sliders[i].nextElementSibling;
      if (readout) readout.textContent = String(Math.round(normalizedToRaw(value)));
    });
  }

  function playBlob(blob: Blob, label = ""): void {
    audio.src = URL.createObjectURL(blob);
    stepLabel.textContent = label;
    void audio.play();
    void blobBytes(blob).then((buf) => {
      try {
        drawWaveform(canvas, wavPeaks(buf, canvas.width));
      } catch {
        // analysis-only blobs may not be WAV; skip the waveform
      }
    });
  }

  function renderHistory(): void {
    historyList.textContent = "";
    state.history.forEach((snapshot, i) => {
      const item = el("li", "history-item");
      const desc = snapshot.features.map((v) => Math.round(normalizedToRaw(v))).join("/");
      item.appendChild(el("span", "history-desc", `seed ${snapshot.seed} [${desc}]`));
      const replay = el("button", "replay", "replay");
      replay.addEventListener("click", () => void controller.replaySnapshot(i));
      const pinA = el("button", "pin-a", "pin A");
      pinA.addEventListener("click", () => controller.pin("A", i));
      const pinB = el("button", "pin-b", "pin B");
      pinB.addEventListener("click", () => controller.pin("B", i));
      if (state.pinA === i) item.classList.add("pinned-a");
      if (state.pinB === i) item.classList.add("pinned-b");
      item.append(replay, pinA, pinB);
      historyList.appendChild(item);
    });
    interpolateButton.disabled = !canInterpolate(state);
  }

  async function renderWith(features: number[], seed: number | null): Promise<void> {
    const req = { features: features.map(clamp01), ...(seed !== null ? { seed } : {}) };
    try {
      const clip = await gate.issue((signal) => client.generate(req, signal));
      if (!clip) return; // superseded by a newer request
      clearError();
      state.lastSeed = clip.seed;
      seedDisplay.textContent = String(clip.seed);
      if (lockCheckbox.checked && state.lockedSeed === null) state.lockedSeed = clip.seed;
      appendHistory(state, { features: req.features, seed: clip.seed });
      renderHistory();
      playBlob(clip.blob);
    } catch (err) {
      showError(err);
    }
  }

  const controller: PanelController = {
    state,
    sliders,
    lockCheckbox,
    seedDisplay,
    stepLabel,
    errorLine,
    audio,
    historyList,
    interpolateButton,
    modeSelect,
    stepsInput,
    fileInput,

    async renderCurrent(): Promise<void> {
      const req = buildGenerateRequest(state);
      await renderWith(req.features, req.seed ?? null);
    },

    async replaySnapshot(index: number): Promise<void> {
      const snapshot = state.history[index];
      if (!snapshot) return;
      setSliders(snapshot.features);
      // seeded determinism: same (features, seed) reproduces identical audio
      await renderWith(snapshot.features, snapshot.seed);
    },

    pin(which: "A" | "B", index: number): void {
      if (which === "A") state.pinA = index;
      else state.pinB = index;
      renderHistory();
    },

    async playInterpolation(): Promise<void> {
      if (!canInterpolate(state)) return;
      const a = state.history[state.pinA as number] as Snapshot;
      const b = state.history[state.pinB as number] as Snapshot;
      const { mode, steps } = state.interpolation;
      try {
        // conditioning comes from pin A so step 0 reproduces its audio
        // exactly; with matching features on both pins the last step
        // reproduces pin B as well
        const resp = await client.interpolate({
          features: a.features.map(clamp01),
          mode,
          steps,
          seed_start: a.seed,
          seed_end: b.seed,
        });
        clearError();
        const labels = stepLabels(resp.mode, resp.clips.length);
        let i = 0;
        const playNext = (): void => {
          if (i >= resp.clips.length) {
            audio.onended = null;
            return;
          }
          playBlob(resp.clips[i], labels[i]);
          i += 1;
        };
        audio.onended = playNext;
        playNext();
      } catch (err) {
        showError(err);
      }
    },

    async analyzeFile(file: Blob, name = "upload.wav"): Promise<void> {
      try {
        const resp = await client.analyze(file, name);
        clearError();
        // /info order == FEATURE order in both maps by contract
        setSliders(info.features.map((feature) => resp.normalized[feature]));
      } catch (err) {
        // sliders stay untouched on any failure
        showError(err);
      }
    },
  };

  renderHistory();
  return controller;
}
