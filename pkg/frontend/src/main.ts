// Page entry point: wires the websocket bridge, the capture loop, the
// calibration controls, and the renderer together. Config comes from
// URL query parameters: ?endpoint=ws://host:port&fps=20&resolution=640x480

import { UiSession, MarkerColor } from "./session.js";
import { Capture, rgbaToRgb } from "./capture.js";
import { Renderer } from "./render.js";
import { sampleRegion } from "./calibrate.js";
import { parseFixture, browserInflate } from "./fixture.js";

const DEFAULTS = {
  endpoint: "ws://127.0.0.1:9300",
  fps: 20,
  width: 640,
  height: 480,
};

function parseConfig() {
  const q = new URLSearchParams(location.search);
  const cfg = { ...DEFAULTS };
  if (q.has("endpoint")) cfg.endpoint = q.get("endpoint")!;
  if (q.has("fps")) {
    const fps = Number(q.get("fps"));
    if (Number.isFinite(fps) && fps > 0) cfg.fps = fps;
  }
  if (q.has("resolution")) {
    const m = /^(\d+)x(\d+)$/.exec(q.get("resolution")!);
    if (m) {
      cfg.width = Number(m[1]);
      cfg.height = Number(m[2]);
    }
  }
  return cfg;
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

const DEFAULT_MARKERS: Record<MarkerColor, { hue: number; sat: number }> = {
  red: { hue: 0, sat: 10000 },
  green: { hue: 12000, sat: 10000 },
};

function main() {
  const cfg = parseConfig();
  const ws = new WebSocket(cfg.endpoint);
  ws.binaryType = "arraybuffer";

  const session = new UiSession({ send: (data) => ws.send(data) });
  session.setResolution(cfg.width, cfg.height);

  ws.onopen = () => session.onOpen();
  ws.onmessage = (msg) => session.onData(new Uint8Array(msg.data as ArrayBuffer));
  ws.onclose = () => session.onClose();
  ws.onerror = () => {
    session.state = "error";
    session.errorMessage = `cannot reach ${cfg.endpoint} — is the bridge running?`;
  };

  const errorBox = el<HTMLElement>("error");
  const showError = (message: string) => {
    errorBox.textContent = message;
    errorBox.hidden = false;
  };

  const capture = new Capture(session, {
    fps: cfg.fps,
    width: cfg.width,
    height: cfg.height,
    onError: showError,
  });
  el<HTMLElement>("preview").appendChild(capture.video);
  capture.video.className = "preview-video";

  const renderer = new Renderer(session, {
    desktop: el<HTMLCanvasElement>("desktop"),
    log: el<HTMLElement>("log"),
    badges: { red: el<HTMLElement>("badge-red"), green: el<HTMLElement>("badge-green") },
    status: el<HTMLElement>("conn-status"),
  });
  renderer.start();

  el<HTMLButtonElement>("start-camera").onclick = () => void capture.start();

  // Click the preview to aim the calibration box, then pick a color.
  let boxAt = { x: cfg.width / 2, y: cfg.height / 2 };
  capture.video.addEventListener("click", (e) => {
    const r = capture.video.getBoundingClientRect();
    boxAt = {
      x: ((e.clientX - r.left) / r.width) * cfg.width,
      y: ((e.clientY - r.top) / r.height) * cfg.height,
    };
  });

  const BOX = 24;
  const calibrateFromBox = (color: MarkerColor) => {
    const { rgba, w, h } = capture.sampleBox(boxAt.x, boxAt.y, BOX);
    const res = sampleRegion(new Uint8Array(rgba.buffer, rgba.byteOffset, rgba.byteLength), w, h);
    if (!res.ok) {
      showError(res.reason ?? "calibration sample rejected");
      return;
    }
    errorBox.hidden = true;
    session.requestCalibration(color, res.hue, res.sat);
  };
  el<HTMLButtonElement>("cal-red").onclick = () => calibrateFromBox("red");
  el<HTMLButtonElement>("cal-green").onclick = () => calibrateFromBox("green");
  el<HTMLButtonElement>("cal-defaults").onclick = () => {
    for (const color of ["red", "green"] as const) {
      const m = DEFAULT_MARKERS[color];
      session.requestCalibration(color, m.hue, m.sat);
    }
  };

  // Camera-free demo: replay a rendered scene file through the wire,
  // paced on server acks.
  el<HTMLInputElement>("fixture-file").onchange = async (e) => {
    const input = e.target as HTMLInputElement;
    const file = input.files?.[0];
    if (!file) return;
    try {
      const fixture = parseFixture(new Uint8Array(await file.arrayBuffer()), browserInflate());
      capture.stop();
      session.setResolution(fixture.width, fixture.height);
      for (let i = 0; i < fixture.frameCount; i++) {
        const id = session.sendFrame(await fixture.frame(i), fixture.timestampUs(i));
        if (id === null) {
          showError("not ready to send — connect and calibrate first");
          return;
        }
        await session.waitForAck(id);
      }
    } catch (err) {
      showError(`fixture replay failed: ${err instanceof Error ? err.message : err}`);
    }
  };
}

// Exported for reuse by the page; invoked on load.
export { main, rgbaToRgb };
window.addEventListener("DOMContentLoaded", main);
