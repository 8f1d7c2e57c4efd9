/** Waveform rendering from raw WAV bytes.
 *
 * The peak extraction is pure (testable without a canvas); drawing degrades
 * to a no-op where 2D contexts are unavailable (e.g. jsdom).
 */

export interface PeakColumn {
  min: number;
  max: number;
}

/** Blob bytes with a FileReader fallback for DOMs lacking Blob.arrayBuffer. */
export function blobBytes(blob: Blob): Promise<ArrayBuffer> {
  if (typeof blob.arrayBuffer === "function") return blob.arrayBuffer();
  return new Promise((resolve, reject) => {
    const reader = new FileReader();
    reader.onload = () => resolve(reader.result as ArrayBuffer);
    reader.onerror = () => reject(reader.error);
    reader.readAsArrayBuffer(blob);
  });
}

/**
 * Parse a 16-bit PCM RIFF/WAVE buffer and reduce the first channel to
 * per-column min/max peaks in [-1, 1]. Throws on anything that is not
 * PCM16 WAV.
 */
export function wavPeaks(buffer: ArrayBuffer, columns: number): PeakColumn[] {
  const view = new DataView(buffer);
  const tag = (off: number) =>
    String.fromCharCode(view.getUint8(off), view.getUint8(off + 1), view.getUint8(off + 2), view.getUint8(off + 3));
  if (buffer.byteLength < 44 || tag(0) !== "RIFF" || tag(8) !== "WAVE") {
    throw new Error("not a RIFF/WAVE file");
  }
  let offset = 12;
  let channels = 0;
  let bitsPerSample = 0;
  let dataStart = -1;
  let dataLength = 0;
  while (offset + 8 <= buffer.byteLength) {
    const chunkId = tag(offset);
    const chunkSize = view.getUint32(offset + 4, true);
    if (chunkId === "fmt ") {
      const format = view.getUint16(offset + 8, true);
      if (format !== 1) throw new Error(`unsupported WAV format code ${format}`);
      channels = view.getUint16(offset + 10, true);
      bitsPerSample = view.getUint16(offset + 22, true);
    } else if (chunkId === "data") {
      dataStart = offset + 8;
      dataLength = chunkSize;
    }
    offset += 8 + chunkSize + (chunkSize % 2);
  }
  if (channels === 0 || dataStart < 0) throw new Error("missing fmt or data chunk");
  if (bitsPerSample !== 16) throw new Error(`expected 16-bit samples, got ${bitsPerSample}`);

  const frameBytes = 2 * channels;
  const frames = Math.floor(Math.min(dataLength, buffer.byteLength - dataStart) / frameBytes);
  const peaks: PeakColumn[] = [];
  for (let col = 0; col < columns; col++) {
    const start = Math.floor((col * frames) / columns);
    const end = Math.max(start + 1, Math.floor(((col + 1) * frames) / columns));
    let lo = 0;
    let hi = 0;
    for (let i = start; i < end && i < frames; i++) {
      const sample = view.getInt16(dataStart + i * frameBytes, true) / 32768;
      if (sample < lo) lo = sample;
      if (sample > hi) hi = sample;
    }
    peaks.push({ min: lo, max: hi });
  }
  return peaks;
}

/** Draw min/max peak columns onto a canvas; silently skips without a 2D context. */
export function drawWaveform(canvas: HTMLCanvasElement, peaks: PeakColumn[]): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#3a7bd5";
  const mid = height / 2;
  const colWidth = width / peaks.length;
  for (let i = 0; i < peaks.length; i++) {
    const top = mid - peaks[i].max * mid;
    const bottom = mid - peaks[i].min * mid;
    ctx.fillRect(i * colWidth, top, Math.max(1, colWidth - 1), Math.max(1, bottom - top));
  }
}
