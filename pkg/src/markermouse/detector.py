"""Marker localization: scan for a seed, grow the region, gate by size.

Scanning evaluates response values only at every stride-th pixel.
Raster scanning covers the whole frame in row-major order (startup, or
after the marker is lost); circular scanning spirals outward in square
rings from the previous position, confined to the search window.
A seed below the response threshold is grown by 4-connected flood fill
into the marker region, whose pixel count must fall strictly inside
(area_min, area_max) to count as a marker.
"""

from collections import deque
from collections.abc import Iterator
from dataclasses import dataclass

import numpy as np

from .color import HsFrame
from .matcher import MarkerTemplate, OpCounter, response_direct, response_row


@dataclass
class DetectorConfig:
    stride: int = 4                      # the "every Nth pixel" step
    response_threshold: int = 500_000_000
    area_min: int = 50                   # pixels^2, exclusive lower gate
    area_max: int = 2000                 # pixels^2, exclusive upper gate
    search_window_half: int = 48         # square half-extent for circular scan
    region_color_tol: int = 8_000_000    # per-pixel weighted H/S sq. distance

    def __post_init__(self):
        if self.stride < 1:
            raise ValueError(f"stride must be >= 1, got {self.stride}")
        if not (0 < self.area_min < self.area_max):
            raise ValueError(f"need 0 < area_min < area_max, got ({self.area_min}, {self.area_max})")
        if self.search_window_half < self.stride:
            raise ValueError("search_window_half must be >= stride")
        if self.response_threshold <= 0 or self.region_color_tol < 0:
            raise ValueError("thresholds must be positive")

    def to_dict(self) -> dict:
        return {
            "stride": self.stride,
            "response_threshold": self.response_threshold,
            "area_min": self.area_min,
            "area_max": self.area_max,
            "search_window_half": self.search_window_half,
            "region_color_tol": self.region_color_tol,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DetectorConfig":
        return cls(**d)


@dataclass
class Detection:
    """One per-frame marker observation, already size-gated."""

    center: tuple[int, int]   # center of mass, rounded to nearest pixel
    area: int
    response: int             # response value at the seed
    frame_index: int = 0

    def to_dict(self) -> dict:
        return {
            "x": self.center[0],
            "y": self.center[1],
            "area": self.area,
            "response": self.response,
            "frame_index": self.frame_index,
        }


def _raster_seeds(
    frame: HsFrame, tpl: MarkerTemplate, cfg: DetectorConfig, counter: OpCounter | None
) -> Iterator[tuple[int, int, int]]:
    """Yield (x, y, response) below threshold in row-major stride order."""
    hb = tpl.half_h
    for y in range(hb, frame.height - hb, cfg.stride):
        for x, rv in response_row(frame, tpl, y, cfg.stride, counter):
            if rv < cfg.response_threshold:
                yield x, y, rv


def _circular_seeds(
    frame: HsFrame,
    tpl: MarkerTemplate,
    cfg: DetectorConfig,
    prev_center: tuple[int, int],
    counter: OpCounter | None,
) -> Iterator[tuple[int, int, int]]:
    """Yield qualifying positions ring by ring around prev_center.

    Ring r holds the stride-spaced positions at Chebyshev distance
    r*stride; each ring is walked top edge, bottom edge, then the two
    side columns, left to right / top to bottom, so the order is fixed.
    Positions outside the frame's valid window area are skipped.
    """
    cx, cy = prev_center
    if not (0 <= cx < frame.width and 0 <= cy < frame.height):
        raise IndexError(f"prev_center ({cx}, {cy}) outside frame")
    ha, hb = tpl.half_w, tpl.half_h
    d = cfg.stride

    def probe(x: int, y: int) -> tuple[int, int, int] | None:
        if not (ha <= x < frame.width - ha and hb <= y < frame.height - hb):
            return None
        rv = response_direct(frame, tpl, x, y, counter)
        return (x, y, rv) if rv < cfg.response_threshold else None

    max_ring = cfg.search_window_half // d
    for r in range(max_ring + 1):
        if r == 0:
            hit = probe(cx, cy)
            if hit:
                yield hit
            continue
        off = r * d
        ring: list[tuple[int, int]] = []
        for x in range(cx - off, cx + off + 1, d):
            ring.append((x, cy - off))
        for x in range(cx - off, cx + off + 1, d):
            ring.append((x, cy + off))
        for y in range(cy - off + d, cy + off, d):
            ring.append((cx - off, y))
        for y in range(cy - off + d, cy + off, d):
            ring.append((cx + off, y))
        for x, y in ring:
            hit = probe(x, y)
            if hit:
                yield hit


def raster_scan(
    frame: HsFrame, tpl: MarkerTemplate, cfg: DetectorConfig, counter: OpCounter | None = None
) -> tuple[int, int] | None:
    """First stride-grid pixel whose response beats the threshold."""
    for x, y, _ in _raster_seeds(frame, tpl, cfg, counter):
        return x, y
    return None


def circular_scan(
    frame: HsFrame,
    tpl: MarkerTemplate,
    cfg: DetectorConfig,
    prev_center: tuple[int, int],
    counter: OpCounter | None = None,
) -> tuple[int, int] | None:
    """First qualifying pixel in expanding rings; None once the search
    window is exhausted (the marker is then considered lost)."""
    for x, y, _ in _circular_seeds(frame, tpl, cfg, prev_center, counter):
        return x, y
    return None


def grow_region(
    frame: HsFrame, tpl: MarkerTemplate, seed: tuple[int, int], cfg: DetectorConfig
) -> tuple[int, tuple[float, float]]:
    """4-connected flood fill of template-colored pixels around seed.

    Returns (area, centroid). The fill stops at area_max + 1 pixels:
    enough to prove the size gate fails without walking an entire
    same-colored background. A seed pixel outside the color tolerance
    gives area 0.
    """
    area, centroid, _, _ = _grow_region_impl(frame, tpl, seed, cfg, None)
    return area, centroid


def _grow_region_impl(
    frame: HsFrame,
    tpl: MarkerTemplate,
    seed: tuple[int, int],
    cfg: DetectorConfig,
    claimed: np.ndarray | None,
    gen: int = 1,
    tile_cache: dict | None = None,
) -> tuple[int, tuple[float, float], np.ndarray | None, bool]:
    """Returns (area, centroid, claimed, tainted). `claimed` holds the
    grow generation that visited each pixel; `tainted` means this
    region touched an earlier generation, which is only possible when
    the area cap cut that earlier fill short, so this region is a
    leftover chunk of an already rejected blob."""
    sx, sy = seed
    if not (0 <= sx < frame.width and 0 <= sy < frame.height):
        raise IndexError(f"seed ({sx}, {sy}) outside frame")
    hue, sat = frame.hue, frame.sat
    h, s, w1, w2 = tpl.ref_hue, tpl.ref_sat, tpl.w1, tpl.w2
    tol = cfg.region_color_tol
    cap = cfg.area_max + 1

    # the per-pixel color test, evaluated one 64x64 tile at a time and
    # memoized, since the fill revisits neighborhoods constantly
    tiles = tile_cache if tile_cache is not None else {}

    def matches(x: int, y: int) -> bool:
        key = (y >> 6, x >> 6)
        m = tiles.get(key)
        if m is None:
            y0, x0 = key[0] << 6, key[1] << 6
            dh = hue[y0 : y0 + 64, x0 : x0 + 64].astype(np.int64) - h
            ds = sat[y0 : y0 + 64, x0 : x0 + 64].astype(np.int64) - s
            m = w1 * dh * dh + w2 * ds * ds <= tol
            tiles[key] = m
        return m[y & 63, x & 63]

    if not matches(sx, sy):
        return 0, (float(sx), float(sy)), claimed, False

    if claimed is None:
        claimed = np.zeros((frame.height, frame.width), dtype=np.uint32)
    visited = claimed
    queue = deque([(sx, sy)])
    visited[sy, sx] = gen
    tainted = False
    count = 0
    sum_x = 0
    sum_y = 0
    while queue and count < cap:
        x, y = queue.popleft()
        count += 1
        sum_x += x
        sum_y += y
        for nx, ny in ((x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1)):
            if 0 <= nx < frame.width and 0 <= ny < frame.height:
                v = visited[ny, nx]
                if v == 0:
                    if matches(nx, ny):
                        visited[ny, nx] = gen
                        queue.append((nx, ny))
                elif v != gen:
                    tainted = True
    return count, (sum_x / count, sum_y / count), claimed, tainted


def detect(
    frame: HsFrame,
    tpl: MarkerTemplate,
    cfg: DetectorConfig,
    prev: tuple[int, int] | None = None,
    counter: OpCounter | None = None,
    frame_index: int = 0,
) -> Detection | None:
    """Full per-marker detection: scan, grow, size-gate, centroid.

    Uses circular scanning around prev when given, raster scanning
    otherwise. Seeds whose grown region fails the gate are skipped and
    the scan continues; pixels of a rejected region never re-seed, and
    a region adjoining a previously rejected one is rejected outright
    (it can only be the leftover of a blob the fill cap cut short)."""
    seeds = (
        _circular_seeds(frame, tpl, cfg, prev, counter)
        if prev is not None
        else _raster_seeds(frame, tpl, cfg, counter)
    )
    claimed: np.ndarray | None = None
    tile_cache: dict = {}
    gen = 0
    for x, y, rv in seeds:
        if claimed is not None and claimed[y, x]:
            continue
        gen += 1
        area, centroid, claimed, tainted = _grow_region_impl(
            frame, tpl, (x, y), cfg, claimed, gen, tile_cache
        )
        if not tainted and cfg.area_min < area < cfg.area_max:
            cx = int(np.floor(centroid[0] + 0.5))
            cy = int(np.floor(centroid[1] + 0.5))
            return Detection(center=(cx, cy), area=area, response=rv, frame_index=frame_index)
    return None
