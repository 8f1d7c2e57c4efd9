/** Entry point: mount the panel against the service.
 *
 * The service origin defaults to the page's own; override with ?api=URL
 * when the UI is served from a dev server on another port.
 */

import { DrumSynthClient } from "./api.js";
import { buildPanel } from "./ui.js";

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("api") ?? "";
const root = document.getElementById("app");
if (root) {
  buildPanel(root, new DrumSynthClient(baseUrl)).catch((err) => {
    root.textContent = `failed to reach the service: ${err}`;
  });
}
