// Wire protocol: binary frame messages out, JSON lines in. Byte layout
// mirrors the server exactly; nothing here interprets pixels.

export const PIXEL_FORMAT_RGB8 = 0;
export const PROTO_VERSION = 1;
export const HEADER_BYTES = 21;

const MAGIC = [0x4d, 0x4d, 0x46, 0x31]; // "MMF1"

export function encodeFrame(
  frameId: number,
  width: number,
  height: number,
  timestampUs: number,
  rgb: Uint8Array,
): Uint8Array<ArrayBuffer> {
  if (!Number.isInteger(frameId) || frameId < 0 || frameId > 0xffffffff) {
    throw new Error(`frame id out of range: ${frameId}`);
  }
  if (width <= 0 || width > 0xffff || height <= 0 || height > 0xffff) {
    throw new Error(`bad frame dims ${width}x${height}`);
  }
  if (rgb.length !== width * height * 3) {
    throw new Error(`payload is ${rgb.length} bytes, expected ${width * height * 3}`);
  }
  const out = new Uint8Array(HEADER_BYTES + rgb.length);
  const view = new DataView(out.buffer);
  out.set(MAGIC, 0);
  view.setUint32(4, frameId, true);
  view.setUint16(8, width, true);
  view.setUint16(10, height, true);
  view.setUint8(12, PIXEL_FORMAT_RGB8);
  view.setBigUint64(13, BigInt(Math.round(timestampUs)), true);
  out.set(rgb, HEADER_BYTES);
  return out;
}

export function encodeCalibrate(
  color: "red" | "green",
  hue: number,
  sat: number,
): Uint8Array<ArrayBuffer> {
  const line = JSON.stringify({ cmd: "calibrate", color, hue, sat }) + "\n";
  return new TextEncoder().encode(line) as Uint8Array<ArrayBuffer>;
}

export interface WireEvent {
  type: string;
  [key: string]: unknown;
}

// One JSON object per line; anything else is a protocol violation the
// caller logs and skips.
export function parseEventLine(line: string): WireEvent | null {
  let obj: unknown;
  try {
    obj = JSON.parse(line);
  } catch {
    return null;
  }
  if (obj === null || typeof obj !== "object" || Array.isArray(obj)) return null;
  const ev = obj as Record<string, unknown>;
  if (typeof ev.type !== "string") return null;
  return ev as WireEvent;
}

// Reassembles newline-delimited text from arbitrarily chunked socket
// reads; partial trailing lines stay buffered until the next chunk.
export class LineSplitter {
  private buf = "";
  private decoder = new TextDecoder();

  push(chunk: Uint8Array): string[] {
    this.buf += this.decoder.decode(chunk, { stream: true });
    const parts = this.buf.split("\n");
    this.buf = parts.pop() ?? "";
    return parts.filter((p) => p.length > 0);
  }
}
