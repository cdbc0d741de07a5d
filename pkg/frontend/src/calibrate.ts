// Region sampling for marker calibration. The hue/saturation conversion
// is quantized identically to the server engine so a value calibrated
// here means the same thing on the other end of the wire.

export const HUE_MAX = 36000; // hundredths of a degree
export const SAT_MAX = 10000;

export interface Hs {
  hue: number;
  sat: number;
}

// Integer hue/sat of one RGB pixel, matching the engine's fixed-point
// rounding: achromatic pixels map to (0, 0).
export function rgbToHs(r: number, g: number, b: number): Hs {
  const total = r + g + b;
  if (total === 0) return { hue: 0, sat: 0 };
  const minc = Math.min(r, g, b);
  const sat = Math.floor((1 - (3 * minc) / total) * SAT_MAX + 0.5);
  if (sat === 0) return { hue: 0, sat: 0 };
  const num = 0.5 * (r - g + (r - b));
  const den = Math.sqrt((r - g) * (r - g) + (r - b) * (g - b));
  if (den === 0) return { hue: 0, sat };
  let cosv = num / den;
  if (cosv > 1) cosv = 1;
  if (cosv < -1) cosv = -1;
  const theta = (Math.acos(cosv) * 180) / Math.PI;
  const degrees = b <= g ? theta : 360 - theta;
  const hue = Math.floor(degrees * 100 + 0.5) % HUE_MAX;
  return { hue, sat };
}

// numpy-style median: sort, middle element, or the mean of the two
// middle elements for even counts.
function median(values: number[]): number {
  const sorted = [...values].sort((a, b) => a - b);
  const mid = sorted.length >> 1;
  if (sorted.length % 2 === 1) return sorted[mid];
  return (sorted[mid - 1] + sorted[mid]) / 2;
}

export interface SampleResult {
  ok: boolean;
  hue: number;
  sat: number;
  reason?: string;
}

// Saturation below this means the sampled patch is effectively gray and
// a hue computed from it would be noise.
export const MIN_SAMPLE_SAT = 2000;

// Median (not mean) hue/sat over an RGBA region: a few specular or
// shadowed pixels must not drag the reference value.
export function sampleRegion(
  rgba: Uint8Array | Uint8ClampedArray,
  width: number,
  height: number,
): SampleResult {
  if (rgba.length !== width * height * 4) {
    throw new Error(`region is ${rgba.length} bytes, expected ${width * height * 4}`);
  }
  const hues: number[] = [];
  const sats: number[] = [];
  for (let i = 0; i < width * height; i++) {
    const hs = rgbToHs(rgba[i * 4], rgba[i * 4 + 1], rgba[i * 4 + 2]);
    hues.push(hs.hue);
    sats.push(hs.sat);
  }
  const satMed = Math.floor(median(sats) + 0.5);
  if (satMed < MIN_SAMPLE_SAT) {
    return {
      ok: false,
      hue: 0,
      sat: satMed,
      reason:
        "sampled region is nearly gray — aim the box at the solid part of the marker, away from glare",
    };
  }
  // Hue is circular. If the samples straddle the wrap point (e.g. reds
  // at 35900 and 100), shift the upper arc down before taking the
  // median, then wrap the result back.
  let hs = hues;
  const lo = Math.min(...hues);
  const hi = Math.max(...hues);
  if (hi - lo > HUE_MAX / 2) {
    hs = hues.map((h) => (h >= HUE_MAX / 2 ? h - HUE_MAX : h));
  }
  let hueMed = Math.floor(median(hs) + 0.5);
  hueMed = ((hueMed % HUE_MAX) + HUE_MAX) % HUE_MAX;
  return { ok: true, hue: hueMed, sat: satMed };
}
