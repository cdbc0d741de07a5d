// Webcam capture loop: pulls frames off a <video> element through a
// canvas at a fixed rate, converts RGBA to the packed RGB the wire
// wants, and hands them to the session. Timestamps come from the
// capture clock (performance.now), not the server.

import { UiSession } from "./session.js";

export interface CaptureOptions {
  fps: number;
  width: number;
  height: number;
  onError: (message: string) => void;
}

export class Capture {
  readonly video: HTMLVideoElement;
  private session: UiSession;
  private opts: CaptureOptions;
  private canvas: HTMLCanvasElement;
  private ctx: CanvasRenderingContext2D;
  private timer: ReturnType<typeof setInterval> | null = null;
  private stream: MediaStream | null = null;

  constructor(session: UiSession, opts: CaptureOptions) {
    this.session = session;
    this.opts = opts;
    this.video = document.createElement("video");
    this.video.muted = true;
    this.video.playsInline = true;
    this.canvas = document.createElement("canvas");
    const ctx = this.canvas.getContext("2d", { willReadFrequently: true });
    if (!ctx) throw new Error("no 2d canvas context");
    this.ctx = ctx;
    this.setResolution(opts.width, opts.height);
  }

  async start(): Promise<void> {
    try {
      this.stream = await navigator.mediaDevices.getUserMedia({
        video: { width: this.opts.width, height: this.opts.height },
        audio: false,
      });
    } catch (err) {
      // Permission denied (or no camera) is a dead end the user has to
      // fix; retrying silently would just re-prompt or spin.
      this.opts.onError(`camera unavailable: ${err instanceof Error ? err.message : err}`);
      return;
    }
    this.video.srcObject = this.stream;
    await this.video.play();
    this.timer = setInterval(() => this.tick(), 1000 / this.opts.fps);
  }

  setResolution(width: number, height: number): void {
    this.canvas.width = width;
    this.canvas.height = height;
    this.session.setResolution(width, height);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
    if (this.stream) {
      for (const track of this.stream.getTracks()) track.stop();
      this.stream = null;
    }
  }

  private tick(): void {
    if (this.session.state === "disconnected" || this.session.state === "error") {
      this.stop();
      return;
    }
    if (!this.session.canSendFrames()) return;
    if (this.video.readyState < 2) return; // no frame decoded yet

    const w = this.canvas.width;
    const h = this.canvas.height;
    this.ctx.drawImage(this.video, 0, 0, w, h);
    const rgba = this.ctx.getImageData(0, 0, w, h).data;
    const rgb = rgbaToRgb(rgba, w, h);
    this.session.sendFrame(rgb, performance.now() * 1000);
  }

  // Grab the current canvas pixels for a calibration box centered at
  // (cx, cy); returns RGBA.
  sampleBox(cx: number, cy: number, size: number): { rgba: Uint8ClampedArray; w: number; h: number } {
    const w = this.canvas.width;
    const h = this.canvas.height;
    const x0 = Math.max(0, Math.min(w - size, Math.round(cx - size / 2)));
    const y0 = Math.max(0, Math.min(h - size, Math.round(cy - size / 2)));
    const img = this.ctx.getImageData(x0, y0, size, size);
    return { rgba: img.data, w: size, h: size };
  }
}

export function rgbaToRgb(rgba: Uint8ClampedArray | Uint8Array, width: number, height: number): Uint8Array {
  const n = width * height;
  const rgb = new Uint8Array(n * 3);
  for (let i = 0; i < n; i++) {
    rgb[i * 3] = rgba[i * 4];
    rgb[i * 3 + 1] = rgba[i * 4 + 1];
    rgb[i * 3 + 2] = rgba[i * 4 + 2];
  }
  return rgb;
}
