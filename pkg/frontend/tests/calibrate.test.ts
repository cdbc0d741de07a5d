import { describe, it, expect } from "vitest";
import { rgbToHs, sampleRegion, MIN_SAMPLE_SAT, HUE_MAX } from "../src/calibrate.js";

// Golden values produced by driving the engine's own converter over
// these RGB triples; both ends must quantize identically or a
// calibration done in the browser drifts on the server.
const ENGINE_GOLDEN: Array<[[number, number, number], [number, number]]> = [
  [[255, 0, 0], [0, 10000]],
  [[0, 255, 0], [12000, 10000]],
  [[0, 0, 255], [24000, 10000]],
  [[200, 100, 50], [1911, 5714]],
  [[50, 100, 200], [22089, 5714]],
  [[128, 128, 128], [0, 0]],
  [[160, 140, 40], [5105, 6471]],
  [[255, 255, 0], [6000, 10000]],
  [[10, 250, 60], [13139, 9063]],
];

function regionOf(pixels: Array<[number, number, number]>): {
  rgba: Uint8Array;
  w: number;
  h: number;
} {
  const rgba = new Uint8Array(pixels.length * 4);
  pixels.forEach(([r, g, b], i) => {
    rgba[i * 4] = r;
    rgba[i * 4 + 1] = g;
    rgba[i * 4 + 2] = b;
    rgba[i * 4 + 3] = 255;
  });
  return { rgba, w: pixels.length, h: 1 };
}

describe("rgbToHs", () => {
  it("matches the engine converter on golden values", () => {
    for (const [[r, g, b], [hue, sat]] of ENGINE_GOLDEN) {
      expect(rgbToHs(r, g, b), `rgb(${r},${g},${b})`).toEqual({ hue, sat });
    }
  });

  it("maps black and white to achromatic (0, 0)", () => {
    expect(rgbToHs(0, 0, 0)).toEqual({ hue: 0, sat: 0 });
    expect(rgbToHs(255, 255, 255)).toEqual({ hue: 0, sat: 0 });
  });
});

describe("sampleRegion", () => {
  it("returns the solid color of a uniform patch", () => {
    const { rgba, w, h } = regionOf(Array(9).fill([200, 100, 50]));
    expect(sampleRegion(rgba, w, h)).toEqual({ ok: true, hue: 1911, sat: 5714 });
  });

  it("uses the median, so a specular highlight cannot drag the value", () => {
    // 8 marker pixels plus one blown-out white pixel: a mean would pull
    // saturation down; the median must not move.
    const pixels: Array<[number, number, number]> = Array(8).fill([200, 100, 50]);
    pixels.push([255, 255, 255]);
    const { rgba, w, h } = regionOf(pixels);
    expect(sampleRegion(rgba, w, h)).toEqual({ ok: true, hue: 1911, sat: 5714 });
  });

  it("averages the two middle samples for even counts", () => {
    // Hues 1911 and 1911 from duplicated pixels keeps it simple; use
    // two distinct saturations instead: full red and a washed red.
    const { rgba, w, h } = regionOf([
      [255, 0, 0],
      [255, 50, 50],
    ]);
    const res = sampleRegion(rgba, w, h);
    expect(res.ok).toBe(true);
    expect(res.hue).toBe(0);
    // sats are 10000 and floor((1-150/355)*10000+.5)=5775 -> median 7888 (7887.5 floored +0.5)
    const washed = rgbToHs(255, 50, 50).sat;
    expect(res.sat).toBe(Math.floor((10000 + washed) / 2 + 0.5));
  });

  it("handles hue samples straddling the red wrap point", () => {
    // Slightly orange red and slightly magenta red: raw hues sit near 0
    // and near 36000. A naive median would land near 18000 (cyan).
    const a = rgbToHs(255, 10, 0); // just above 0
    const b = rgbToHs(255, 0, 10); // just below HUE_MAX
    expect(a.hue).toBeLessThan(500);
    expect(b.hue).toBeGreaterThan(HUE_MAX - 500);
    const { rgba, w, h } = regionOf([
      [255, 10, 0],
      [255, 0, 10],
      [255, 10, 0],
    ]);
    const res = sampleRegion(rgba, w, h);
    expect(res.ok).toBe(true);
    const distFromZero = Math.min(res.hue, HUE_MAX - res.hue);
    expect(distFromZero).toBeLessThan(500);
  });

  it("rejects a nearly gray region with guidance", () => {
    const { rgba, w, h } = regionOf(Array(9).fill([128, 128, 128]));
    const res = sampleRegion(rgba, w, h);
    expect(res.ok).toBe(false);
    expect(res.sat).toBeLessThan(MIN_SAMPLE_SAT);
    expect(res.reason).toMatch(/gray|glare/);
  });

  it("throws on a size mismatch", () => {
    expect(() => sampleRegion(new Uint8Array(10), 2, 2)).toThrow(/expected 16/);
  });
});
