// DOM glue: a virtual-desktop canvas with the cursor dot, status badges
// per marker, and a scrolling event log. Pure presentation — pixels are
// never interpreted here.

import { UiSession, MarkerColor } from "./session.js";

// Cursor events arrive in server screen coordinates; the canvas is a
// scaled-down view of that desktop.
export const SCREEN_W = 1920;
export const SCREEN_H = 1080;

export interface RenderTargets {
  desktop: HTMLCanvasElement;
  log: HTMLElement;
  badges: Record<MarkerColor, HTMLElement>;
  status: HTMLElement;
}

export class Renderer {
  private session: UiSession;
  private t: RenderTargets;
  private lastSeq = -1;
  private trail: { x: number; y: number }[] = [];

  constructor(session: UiSession, targets: RenderTargets) {
    this.session = session;
    this.t = targets;
  }

  start(): void {
    const loop = () => {
      this.draw();
      requestAnimationFrame(loop);
    };
    requestAnimationFrame(loop);
  }

  draw(): void {
    const s = this.session;
    this.t.status.textContent = s.state + (s.errorMessage ? ` — ${s.errorMessage}` : "");
    this.t.status.dataset.state = s.state;

    for (const color of ["red", "green"] as const) {
      const badge = this.t.badges[color];
      const cal = s.calibrated[color];
      badge.textContent = cal ? `${color}: ${s.markerStatus[color]}` : `${color}: uncalibrated`;
      badge.dataset.level = cal ? s.markerStatus[color] : "unknown";
    }

    this.appendNewLogLines();
    this.drawDesktop();
  }

  private appendNewLogLines(): void {
    for (const entry of this.session.feed) {
      if (entry.seq <= this.lastSeq) continue;
      this.lastSeq = entry.seq;
      const ev = entry.event;
      if (ev.type === "cursor") {
        // Too chatty for the log; the desktop canvas shows these.
        continue;
      }
      const div = document.createElement("div");
      div.className = `log-line log-${ev.type}`;
      if (ev.type === "gesture") {
        div.textContent = `[${fmtT(ev.t)}] gesture: ${ev.name}`;
      } else if (ev.type === "error") {
        div.textContent = `error: ${ev.message}`;
      } else if (ev.type === "status" && (ev.state === "ready" || ev.state === "calibrated")) {
        div.textContent = `status: ${ev.state}${ev.color ? ` (${ev.color})` : ""}`;
      } else {
        continue; // per-frame status and acks stay off the log
      }
      this.t.log.appendChild(div);
      while (this.t.log.childElementCount > 200) {
        this.t.log.removeChild(this.t.log.firstElementChild!);
      }
      this.t.log.scrollTop = this.t.log.scrollHeight;
    }
  }

  private drawDesktop(): void {
    const canvas = this.t.desktop;
    const ctx = canvas.getContext("2d");
    if (!ctx) return;
    const sx = canvas.width / SCREEN_W;
    const sy = canvas.height / SCREEN_H;

    ctx.fillStyle = "#1b1e24";
    ctx.fillRect(0, 0, canvas.width, canvas.height);

    const cur = this.session.cursor;
    if (cur) {
      const last = this.trail[this.trail.length - 1];
      if (!last || last.x !== cur.x || last.y !== cur.y) {
        this.trail.push({ x: cur.x, y: cur.y });
        if (this.trail.length > 400) this.trail.shift();
      }
    }

    ctx.strokeStyle = "rgba(120, 180, 255, 0.5)";
    ctx.beginPath();
    this.trail.forEach((p, i) => {
      const x = p.x * sx;
      const y = p.y * sy;
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();

    if (cur) {
      ctx.fillStyle = "#ffd34d";
      ctx.beginPath();
      ctx.arc(cur.x * sx, cur.y * sy, 6, 0, 2 * Math.PI);
      ctx.fill();
    }
  }
}

function fmtT(t: unknown): string {
  return typeof t === "number" ? t.toFixed(2) + "s" : "?";
}
