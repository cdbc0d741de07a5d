"""Synthetic scene generation with analytic ground truth.

A SceneScript describes colored marker discs moving along piecewise
linear waypoint paths over a flat (optionally noisy) background, plus
same-colored distractor blobs sized to fail the detector's area gate.
Rendering is deterministic for a given (script, seed) pair. Discs whose
path velocity exceeds the script's blur threshold are drawn smeared
along the motion direction and desaturated far enough that matching is
guaranteed to reject them, which is how marker loss at high speed is
reproduced on synthetic frames.

Ground truth is computed from the waypoints, not from the rendering:
per frame and per track it carries the ideal (unjittered) center, a
drawn flag (hidden intervals) and a blurred flag (velocity threshold).
"""

import bisect
import math
from dataclasses import dataclass, field

import numpy as np

from .color import RgbFrame

# disc colors the default templates match exactly
MARKER_RGB = {"red": (255, 0, 0), "green": (0, 255, 0)}

# blend factor toward the background for blurred discs; at 0.5 the
# saturation drop costs ~3.6e7 per pixel against a saturated template,
# comfortably past the default region tolerance and seed threshold
BLUR_DESATURATION = 0.5


@dataclass
class TrackSpec:
    """One marker disc and its motion."""

    color: str                                   # "red" or "green"
    radius: float = 12.0
    waypoints: list[tuple[float, float, float]] = field(default_factory=list)  # (t, x, y)
    hidden: list[tuple[float, float]] = field(default_factory=list)            # [t0, t1) not drawn
    rgb: tuple[int, int, int] | None = None      # draw color override

    def __post_init__(self):
        if self.color not in MARKER_RGB:
            raise ValueError(f"unknown marker color {self.color!r}")
        if self.radius <= 0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        if not self.waypoints:
            raise ValueError("track needs at least one waypoint")
        times = [w[0] for w in self.waypoints]
        if times != sorted(times):
            raise ValueError("waypoint times must be nondecreasing")

    @property
    def draw_rgb(self) -> tuple[int, int, int]:
        return self.rgb if self.rgb is not None else MARKER_RGB[self.color]

    def to_dict(self) -> dict:
        d = {
            "color": self.color,
            "radius": self.radius,
            "waypoints": [list(w) for w in self.waypoints],
            "hidden": [list(h) for h in self.hidden],
        }
        if self.rgb is not None:
            d["rgb"] = list(self.rgb)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrackSpec":
        return cls(
            color=d["color"],
            radius=d.get("radius", 12.0),
            waypoints=[tuple(w) for w in d["waypoints"]],
            hidden=[tuple(h) for h in d.get("hidden", [])],
            rgb=tuple(d["rgb"]) if d.get("rgb") is not None else None,
        )


@dataclass
class DistractorSpec:
    """Static blob meant to be rejected by the size gate."""

    x: float
    y: float
    radius: float
    rgb: tuple[int, int, int] = (255, 0, 0)

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError(f"radius must be positive, got {self.radius}")

    def to_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "radius": self.radius, "rgb": list(self.rgb)}

    @classmethod
    def from_dict(cls, d: dict) -> "DistractorSpec":
        return cls(x=d["x"], y=d["y"], radius=d["radius"], rgb=tuple(d["rgb"]))


@dataclass
class SceneScript:
    duration: float                 # seconds
    fps: float = 40.0
    width: int = 640
    height: int = 480
    background: tuple[int, int, int] = (128, 128, 128)
    background_noise: float = 0.0   # per-pixel gray-level sigma
    noise: float = 0.0              # center jitter sigma, px, drawn discs only
    blur_velocity_threshold: float | None = None   # px/s; None = never blur
    tracks: list[TrackSpec] = field(default_factory=list)
    distractors: list[DistractorSpec] = field(default_factory=list)

    def __post_init__(self):
        if self.duration <= 0 or self.fps <= 0:
            raise ValueError("duration and fps must be positive")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("frame dims must be positive")
        if self.noise < 0 or self.background_noise < 0:
            raise ValueError("noise sigmas must be nonnegative")
        if self.blur_velocity_threshold is not None and self.blur_velocity_threshold <= 0:
            raise ValueError("blur_velocity_threshold must be positive")
        end = self.duration + 1e-9
        for tr in self.tracks:
            if any(w[0] > end for w in tr.waypoints):
                raise ValueError(f"{tr.color} track has waypoints past duration {self.duration}")

    @property
    def frame_count(self) -> int:
        return int(round(self.duration * self.fps))

    @property
    def frame_dims(self) -> tuple[int, int]:
        return self.width, self.height

    def timestamps_us(self) -> list[int]:
        """Capture instants as exact microseconds so timestamps survive
        any float/integer round trip identically."""
        return [round(i * 1_000_000 / self.fps) for i in range(self.frame_count)]

    def to_dict(self) -> dict:
        return {
            "duration": self.duration,
            "fps": self.fps,
            "width": self.width,
            "height": self.height,
            "background": list(self.background),
            "background_noise": self.background_noise,
            "noise": self.noise,
            "blur_velocity_threshold": self.blur_velocity_threshold,
            "tracks": [t.to_dict() for t in self.tracks],
            "distractors": [d.to_dict() for d in self.distractors],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SceneScript":
        return cls(
            duration=d["duration"],
            fps=d.get("fps", 40.0),
            width=d.get("width", 640),
            height=d.get("height", 480),
            background=tuple(d.get("background", (128, 128, 128))),
            background_noise=d.get("background_noise", 0.0),
            noise=d.get("noise", 0.0),
            blur_velocity_threshold=d.get("blur_velocity_threshold"),
            tracks=[TrackSpec.from_dict(t) for t in d.get("tracks", [])],
            distractors=[DistractorSpec.from_dict(x) for x in d.get("distractors", [])],
        )


def path_position(track: TrackSpec, t: float) -> tuple[float, float]:
    """Piecewise linear interpolation, clamped to the end waypoints."""
    ts = [w[0] for w in track.waypoints]
    xs = [w[1] for w in track.waypoints]
    ys = [w[2] for w in track.waypoints]
    return float(np.interp(t, ts, xs)), float(np.interp(t, ts, ys))


def path_velocity(track: TrackSpec, t: float) -> tuple[float, float]:
    """Velocity of the segment containing t; zero outside the path and
    at zero-length segments."""
    wps = track.waypoints
    if len(wps) < 2 or t < wps[0][0] or t >= wps[-1][0]:
        return 0.0, 0.0
    i = bisect.bisect_right([w[0] for w in wps], t) - 1
    t0, x0, y0 = wps[i]
    t1, x1, y1 = wps[i + 1]
    if t1 <= t0:
        return 0.0, 0.0
    return (x1 - x0) / (t1 - t0), (y1 - y0) / (t1 - t0)


def is_hidden(track: TrackSpec, t: float) -> bool:
    return any(t0 <= t < t1 for t0, t1 in track.hidden)


@dataclass
class TrackTruth:
    """Per-frame ground truth for one track."""

    x: float            # ideal center, jitter excluded
    y: float
    drawn: bool         # False inside a hidden interval
    blurred: bool       # drawn, but smeared past detectability

    def to_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "drawn": self.drawn, "blurred": self.blurred}

    @classmethod
    def from_dict(cls, d: dict) -> "TrackTruth":
        return cls(x=d["x"], y=d["y"], drawn=d["drawn"], blurred=d["blurred"])


def truth_at(script: SceneScript, track: TrackSpec, t: float) -> TrackTruth:
    x, y = path_position(track, t)
    drawn = not is_hidden(track, t)
    blurred = False
    if drawn and script.blur_velocity_threshold is not None:
        vx, vy = path_velocity(track, t)
        blurred = math.hypot(vx, vy) > script.blur_velocity_threshold
    return TrackTruth(x=x, y=y, drawn=drawn, blurred=blurred)


def truth_table(script: SceneScript) -> list[list[TrackTruth]]:
    """frame-major, track-minor; order matches script.tracks."""
    out = []
    for us in script.timestamps_us():
        t = us / 1e6
        out.append([truth_at(script, tr, t) for tr in script.tracks])
    return out


def _paint_disc(px: np.ndarray, cx: float, cy: float, r: float, rgb) -> None:
    h, w = px.shape[:2]
    x0 = max(int(math.floor(cx - r)), 0)
    x1 = min(int(math.ceil(cx + r)), w - 1)
    y0 = max(int(math.floor(cy - r)), 0)
    y1 = min(int(math.ceil(cy + r)), h - 1)
    if x0 > x1 or y0 > y1:
        return
    ys, xs = np.mgrid[y0 : y1 + 1, x0 : x1 + 1]
    mask = (xs - cx) ** 2 + (ys - cy) ** 2 <= r * r
    px[y0 : y1 + 1, x0 : x1 + 1][mask] = rgb


def _paint_capsule(px: np.ndarray, p0, p1, r: float, rgb) -> None:
    """All pixels within r of the segment p0-p1 (a smeared disc)."""
    h, w = px.shape[:2]
    x0 = max(int(math.floor(min(p0[0], p1[0]) - r)), 0)
    x1 = min(int(math.ceil(max(p0[0], p1[0]) + r)), w - 1)
    y0 = max(int(math.floor(min(p0[1], p1[1]) - r)), 0)
    y1 = min(int(math.ceil(max(p0[1], p1[1]) + r)), h - 1)
    if x0 > x1 or y0 > y1:
        return
    ys, xs = np.mgrid[y0 : y1 + 1, x0 : x1 + 1]
    dx, dy = p1[0] - p0[0], p1[1] - p0[1]
    seg_sq = dx * dx + dy * dy
    if seg_sq == 0:
        u = np.zeros_like(xs, dtype=np.float64)
    else:
        u = np.clip(((xs - p0[0]) * dx + (ys - p0[1]) * dy) / seg_sq, 0.0, 1.0)
    ex = p0[0] + u * dx
    ey = p0[1] + u * dy
    mask = (xs - ex) ** 2 + (ys - ey) ** 2 <= r * r
    px[y0 : y1 + 1, x0 : x1 + 1][mask] = rgb


def _blend(rgb, bg, beta: float) -> tuple[int, int, int]:
    return tuple(int(math.floor((1 - beta) * c + beta * b + 0.5)) for c, b in zip(rgb, bg))


@dataclass
class SynthFrame:
    index: int
    frame: RgbFrame
    timestamp_us: int
    truth: list[TrackTruth]

    @property
    def timestamp(self) -> float:
        return self.timestamp_us / 1e6


def render_frame(
    script: SceneScript, index: int, seed: int, jitter: np.ndarray | None = None
) -> RgbFrame:
    """Draw one frame. The jitter table (frames x tracks x 2) is shared
    across the sequence; pass it in to avoid recomputing per frame."""
    if not 0 <= index < script.frame_count:
        raise IndexError(f"frame {index} outside 0..{script.frame_count - 1}")
    if jitter is None:
        jitter = jitter_table(script, seed)
    t = script.timestamps_us()[index] / 1e6

    px = np.empty((script.height, script.width, 3), dtype=np.uint8)
    px[:] = script.background
    if script.background_noise > 0:
        rng = np.random.default_rng([seed, 1, index])
        noisy = px.astype(np.float64) + rng.normal(0.0, script.background_noise, px.shape)
        px = np.clip(np.floor(noisy + 0.5), 0, 255).astype(np.uint8)

    for d in script.distractors:
        _paint_disc(px, d.x, d.y, d.radius, d.rgb)

    for k, tr in enumerate(script.tracks):
        tt = truth_at(script, tr, t)
        if not tt.drawn:
            continue
        cx = tt.x + jitter[index, k, 0]
        cy = tt.y + jitter[index, k, 1]
        if tt.blurred:
            vx, vy = path_velocity(tr, t)
            half = 0.5 / script.fps
            p0 = (cx - vx * half, cy - vy * half)
            p1 = (cx + vx * half, cy + vy * half)
            rgb = _blend(tr.draw_rgb, script.background, BLUR_DESATURATION)
            _paint_capsule(px, p0, p1, tr.radius, rgb)
        else:
            _paint_disc(px, cx, cy, tr.radius, tr.draw_rgb)

    return RgbFrame(script.width, script.height, px)


def jitter_table(script: SceneScript, seed: int) -> np.ndarray:
    """Center offsets for every (frame, track), fixed by the seed. The
    whole table is drawn even when sigma is zero so hidden intervals or
    sigma changes never shift other frames' offsets."""
    rng = np.random.default_rng([seed, 0])
    raw = rng.standard_normal((script.frame_count, max(len(script.tracks), 1), 2))
    return raw * script.noise


def synth_sequence(script: SceneScript, seed: int):
    """Yield SynthFrame records in order, deterministic per (script, seed)."""
    jitter = jitter_table(script, seed)
    stamps = script.timestamps_us()
    truths = truth_table(script)
    for i in range(script.frame_count):
        yield SynthFrame(
            index=i,
            frame=render_frame(script, i, seed, jitter),
            timestamp_us=stamps[i],
            truth=truths[i],
        )
