/** Step labels for interpolation playback.
 *
 * Spherical steps are labelled by the interpolation parameter t; radial
 * steps by the norm factor they apply to the starting latent, sweeping
 * 0.25x up to 2x (matching the server's factor schedule).
 */

import type { InterpolationMode } from "./types.js";

export function stepLabels(mode: InterpolationMode, steps: number): string[] {
  const labels: string[] = [];
  for (let i = 0; i < steps; i++) {
    const t = steps === 1 ? 0 : i / (steps - 1);
    if (mode === "radial") {
      const factor = 0.25 + t * (2.0 - 0.25);
      labels.push(`${factor.toFixed(2)}×`);
    } else {
      labels.push(`t=${t.toFixed(2)}`);
    }
  }
  return labels;
}
