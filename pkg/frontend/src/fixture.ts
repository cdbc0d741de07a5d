// Reader for the engine's rendered-scene containers, enough to replay a
// canned sequence through the wire without a camera. Layout: 8-byte
// magic "MMFIX01\n", little-endian u32 header length, a JSON header,
// then one length-prefixed zlib blob of raw RGB per frame.
//
// Decompression is pluggable so the same parser runs under node (zlib)
// and in the browser (DecompressionStream).

export type Inflate = (blob: Uint8Array) => Promise<Uint8Array>;

const MAGIC = "MMFIX01\n";

export interface FixtureHeader {
  width: number;
  height: number;
  fps: number;
  frame_count: number;
  timestamps_us: number[];
  compression: string;
  [key: string]: unknown;
}

export class Fixture {
  readonly header: FixtureHeader;
  private blobs: Uint8Array[];
  private inflate: Inflate;

  constructor(header: FixtureHeader, blobs: Uint8Array[], inflate: Inflate) {
    this.header = header;
    this.blobs = blobs;
    this.inflate = inflate;
  }

  get frameCount(): number {
    return this.blobs.length;
  }

  get width(): number {
    return this.header.width;
  }

  get height(): number {
    return this.header.height;
  }

  timestampUs(i: number): number {
    return this.header.timestamps_us[i];
  }

  async frame(i: number): Promise<Uint8Array> {
    const raw = await this.inflate(this.blobs[i]);
    const want = this.width * this.height * 3;
    if (raw.length !== want) {
      throw new Error(`frame ${i} is ${raw.length} bytes, expected ${want}`);
    }
    return raw;
  }
}

export function parseFixture(data: Uint8Array, inflate: Inflate): Fixture {
  const view = new DataView(data.buffer, data.byteOffset, data.byteLength);
  let off = 0;

  const need = (n: number) => {
    if (off + n > data.length) {
      throw new Error(`truncated fixture: wanted ${n} bytes at offset ${off}`);
    }
  };

  need(MAGIC.length);
  const magic = new TextDecoder().decode(data.subarray(0, MAGIC.length));
  if (magic !== MAGIC) throw new Error(`not a fixture file (magic ${JSON.stringify(magic)})`);
  off = MAGIC.length;

  need(4);
  const hlen = view.getUint32(off, true);
  off += 4;
  need(hlen);
  const header = JSON.parse(new TextDecoder().decode(data.subarray(off, off + hlen))) as FixtureHeader;
  off += hlen;
  if (header.compression !== "zlib") {
    throw new Error(`unsupported compression ${JSON.stringify(header.compression)}`);
  }

  const blobs: Uint8Array[] = [];
  for (let i = 0; i < header.frame_count; i++) {
    need(4);
    const n = view.getUint32(off, true);
    off += 4;
    need(n);
    blobs.push(data.subarray(off, off + n));
    off += n;
  }
  if (off !== data.length) throw new Error("trailing bytes after last frame");
  return new Fixture(header, blobs, inflate);
}

// Browser-side inflate: the blobs are zlib-wrapped, which the streams
// API calls "deflate".
export function browserInflate(): Inflate {
  return async (blob: Uint8Array) => {
    const ds = new DecompressionStream("deflate");
    const stream = new Blob([blob as BlobPart]).stream().pipeThrough(ds);
    const buf = await new Response(stream).arrayBuffer();
    return new Uint8Array(buf);
  };
}
