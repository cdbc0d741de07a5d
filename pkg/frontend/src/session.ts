// Client-side session state. All recognition happens server-side; this
// class only tracks what the wire has told us and enforces the one
// invariant that matters: frames go out only while the session is ready
// and at least one marker is calibrated.

import { LineSplitter, parseEventLine, encodeFrame, encodeCalibrate, WireEvent } from "./protocol.js";

export interface Transport {
  send(data: Uint8Array<ArrayBuffer>): void;
}

export type SessionState = "disconnected" | "connecting" | "ready" | "error";
export type MarkerColor = "red" | "green";
export type MarkerStatus = "active" | "coasting" | "lost" | "unknown";

export interface FeedEntry {
  seq: number;
  event: WireEvent;
}

export interface CursorPos {
  x: number;
  y: number;
}

const FEED_CAP = 500;

export class UiSession {
  state: SessionState = "disconnected";
  errorMessage: string | null = null;
  maxDim: number | null = null;

  width = 640;
  height = 480;

  calibrated: Record<MarkerColor, { hue: number; sat: number } | null> = {
    red: null,
    green: null,
  };
  markerStatus: Record<MarkerColor, MarkerStatus> = { red: "unknown", green: "unknown" };

  cursor: CursorPos | null = null;
  feed: FeedEntry[] = [];
  malformedLines = 0;

  ackedFrameId: number | null = null;

  private transport: Transport;
  private splitter = new LineSplitter();
  private nextFrameId = 0;
  private feedSeq = 0;
  private ackWaiters = new Map<number, () => void>();

  constructor(transport: Transport) {
    this.transport = transport;
  }

  onOpen(): void {
    this.state = "connecting";
    this.errorMessage = null;
  }

  onClose(): void {
    this.state = "disconnected";
    for (const wake of this.ackWaiters.values()) wake();
    this.ackWaiters.clear();
  }

  onData(chunk: Uint8Array): void {
    for (const line of this.splitter.push(chunk)) {
      const ev = parseEventLine(line);
      if (ev === null) {
        // Protocol noise: log and skip, never die on a bad line.
        this.malformedLines++;
        console.warn("skipping malformed event line:", line);
        continue;
      }
      this.handleEvent(ev);
    }
  }

  canSendFrames(): boolean {
    return this.state === "ready" && (this.calibrated.red !== null || this.calibrated.green !== null);
  }

  setResolution(width: number, height: number): void {
    // Mid-session resolution changes are fine; frame ids keep counting.
    this.width = width;
    this.height = height;
  }

  // Returns the frame id used, or null if the invariant blocked the send.
  sendFrame(rgb: Uint8Array, timestampUs: number): number | null {
    if (!this.canSendFrames()) return null;
    const id = this.nextFrameId++;
    this.transport.send(encodeFrame(id, this.width, this.height, timestampUs, rgb));
    return id;
  }

  requestCalibration(color: MarkerColor, hue: number, sat: number): void {
    this.transport.send(encodeCalibrate(color, hue, sat));
  }

  // Resolves when the server acks the given frame id (or the session
  // drops); lets a replay loop pace itself on the server.
  waitForAck(frameId: number): Promise<void> {
    if (this.ackedFrameId !== null && this.ackedFrameId >= frameId) return Promise.resolve();
    if (this.state === "disconnected" || this.state === "error") return Promise.resolve();
    return new Promise((resolve) => this.ackWaiters.set(frameId, resolve));
  }

  private handleEvent(ev: WireEvent): void {
    this.feed.push({ seq: this.feedSeq++, event: ev });
    if (this.feed.length > FEED_CAP) this.feed.splice(0, this.feed.length - FEED_CAP);

    switch (ev.type) {
      case "status":
        this.handleStatus(ev);
        break;
      case "cursor":
        if (typeof ev.x === "number" && typeof ev.y === "number") {
          this.cursor = { x: ev.x, y: ev.y };
        }
        break;
      case "ack":
        if (typeof ev.frame_id === "number") {
          this.ackedFrameId = ev.frame_id;
          for (const [id, wake] of this.ackWaiters) {
            if (id <= ev.frame_id) {
              wake();
              this.ackWaiters.delete(id);
            }
          }
        }
        break;
      case "error":
        if (!("frame_id" in ev)) {
          // Fatal for the session; the server is about to close on us.
          this.state = "error";
          this.errorMessage = String(ev.message ?? "unknown error");
        } else {
          console.warn("server rejected a frame:", ev.message);
        }
        break;
      default:
        // Gesture events and anything future just live in the feed.
        break;
    }
  }

  private handleStatus(ev: WireEvent): void {
    if (ev.state === "ready") {
      this.state = "ready";
      if (typeof ev.max_dim === "number") this.maxDim = ev.max_dim;
      return;
    }
    if (ev.state === "calibrated") {
      const color = ev.color;
      if ((color === "red" || color === "green") && typeof ev.hue === "number" && typeof ev.sat === "number") {
        this.calibrated[color] = { hue: ev.hue, sat: ev.sat };
      }
      return;
    }
    // Per-frame tracker status: {"type":"status","red":...,"green":...}
    for (const color of ["red", "green"] as const) {
      const s = ev[color];
      if (s === "active" || s === "coasting" || s === "lost") {
        this.markerStatus[color] = s;
      }
    }
  }
}
