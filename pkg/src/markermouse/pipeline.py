"""Per-frame engine tying the stages together.

One Engine instance owns a session: RGB frames with capture timestamps
go in, FrameReports come out. Each frame is converted to hue/saturation
once, both markers are localized (circular scan near the last track
position, raster scan when the track is lost), the tracks are advanced,
and the filtered positions drive the gesture machine.
"""

import math
import time
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field

from .color import RgbFrame, rgb_to_hs
from .detector import Detection, DetectorConfig, detect
from .gestures import GestureConfig, GestureEvent, GestureMachine
from .matcher import MarkerTemplate, OpCounter
from .tracker import KalmanConfig, TrackState, TrackStatus, lost_track, reset, step


class ConfigError(ValueError):
    """Bad engine configuration; the message names the offending field."""


def default_templates() -> tuple[MarkerTemplate, MarkerTemplate]:
    """Fully saturated red and green references."""
    red = MarkerTemplate(color_tag="red", ref_hue=0, ref_sat=10000)
    green = MarkerTemplate(color_tag="green", ref_hue=12000, ref_sat=10000)
    return red, green


@dataclass
class EngineConfig:
    red_template: MarkerTemplate
    green_template: MarkerTemplate
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    kalman: KalmanConfig = field(default_factory=KalmanConfig)
    gestures: GestureConfig = field(default_factory=GestureConfig)
    frame_dims: tuple[int, int] = (640, 480)
    screen_dims: tuple[int, int] = (1920, 1080)
    frame_budget: float = 0.025      # soft per-frame wall-time target, seconds
    use_raw_positions: bool = False  # feed unfiltered centroids to gestures

    def __post_init__(self):
        fw, fh = self.frame_dims
        if fw <= 0 or fh <= 0:
            raise ConfigError(f"frame_dims: must be positive, got {self.frame_dims}")
        sw, sh = self.screen_dims
        if sw <= 0 or sh <= 0:
            raise ConfigError(f"screen_dims: must be positive, got {self.screen_dims}")
        for name, tpl in (("red_template", self.red_template), ("green_template", self.green_template)):
            if tpl.mask_width > fw or tpl.mask_height > fh:
                raise ConfigError(
                    f"{name}: mask {tpl.mask_width}x{tpl.mask_height} does not fit "
                    f"in frame {fw}x{fh}"
                )
        if self.frame_budget <= 0:
            raise ConfigError(f"frame_budget: must be positive, got {self.frame_budget}")

    def to_dict(self) -> dict:
        return {
            "red_template": self.red_template.to_dict(),
            "green_template": self.green_template.to_dict(),
            "detector": self.detector.to_dict(),
            "kalman": self.kalman.to_dict(),
            "gestures": self.gestures.to_dict(),
            "frame_dims": list(self.frame_dims),
            "screen_dims": list(self.screen_dims),
            "frame_budget": self.frame_budget,
            "use_raw_positions": self.use_raw_positions,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EngineConfig":
        def build(key, ctor, fallback):
            if key not in d:
                return fallback()
            try:
                return ctor(d[key])
            except ConfigError:
                raise
            except (TypeError, ValueError) as e:
                raise ConfigError(f"{key}: {e}") from e

        kwargs = {
            "red_template": build("red_template", MarkerTemplate.from_dict,
                                  lambda: default_templates()[0]),
            "green_template": build("green_template", MarkerTemplate.from_dict,
                                    lambda: default_templates()[1]),
            "detector": build("detector", DetectorConfig.from_dict, DetectorConfig),
            "kalman": build("kalman", KalmanConfig.from_dict, KalmanConfig),
            "gestures": build("gestures", GestureConfig.from_dict, GestureConfig),
        }
        for key in ("frame_dims", "screen_dims"):
            if key in d:
                v = d[key]
                if not (isinstance(v, (list, tuple)) and len(v) == 2):
                    raise ConfigError(f"{key}: expected a [width, height] pair, got {v!r}")
                kwargs[key] = (int(v[0]), int(v[1]))
        for key in ("frame_budget", "use_raw_positions"):
            if key in d:
                kwargs[key] = d[key]
        known = {
            "red_template", "green_template", "detector", "kalman", "gestures",
            "frame_dims", "screen_dims", "frame_budget", "use_raw_positions",
        }
        for key in d:
            if key not in known:
                raise ConfigError(f"{key}: unknown field")
        return cls(**kwargs)


def default_config() -> EngineConfig:
    red, green = default_templates()
    return EngineConfig(red_template=red, green_template=green)


@dataclass
class MarkerReport:
    """What happened to one marker on one frame."""

    color: str                # template color_tag
    scan: str                 # "raster" or "circular"
    detection: Detection | None
    track_status: TrackStatus
    position: tuple[float, float] | None  # position handed to the gesture stage
    positions_evaluated: int  # candidate centers scored this frame
    terms_evaluated: int      # per-pixel difference terms computed this frame

    def to_dict(self) -> dict:
        return {
            "color": self.color,
            "scan": self.scan,
            "detection": self.detection.to_dict() if self.detection else None,
            "track_status": self.track_status.value,
            "position": list(self.position) if self.position else None,
            "positions_evaluated": self.positions_evaluated,
            "terms_evaluated": self.terms_evaluated,
        }


@dataclass
class FrameReport:
    frame_index: int
    timestamp: float
    red: MarkerReport
    green: MarkerReport
    events: list[GestureEvent]
    elapsed: float  # wall seconds spent processing this frame

    def to_dict(self, include_timing: bool = False) -> dict:
        """Serializable form. Timing is excluded by default so reports
        from repeated runs over the same frames compare equal."""
        d = {
            "frame_index": self.frame_index,
            "timestamp": self.timestamp,
            "red": self.red.to_dict(),
            "green": self.green.to_dict(),
            "events": [e.to_dict() for e in self.events],
        }
        if include_timing:
            d["elapsed"] = self.elapsed
        return d


class Engine:
    def __init__(self, cfg: EngineConfig | None = None):
        self.cfg = cfg if cfg is not None else default_config()
        self.red_track: TrackState = lost_track()
        self.green_track: TrackState = lost_track()
        self.machine = GestureMachine(self.cfg.gestures, self.cfg.frame_dims, self.cfg.screen_dims)
        self.frames_processed = 0
        self.hs_conversions = 0
        self._last_t: float | None = None

    def process_frame(self, frame: RgbFrame, timestamp: float) -> FrameReport:
        t0 = time.perf_counter()
        if (frame.width, frame.height) != self.cfg.frame_dims:
            raise ValueError(
                f"frame is {frame.width}x{frame.height}, engine configured for "
                f"{self.cfg.frame_dims[0]}x{self.cfg.frame_dims[1]}"
            )
        if self._last_t is not None and timestamp < self._last_t:
            raise ValueError(f"timestamp went backwards: {timestamp} < {self._last_t}")
        dt = 0.0 if self._last_t is None else timestamp - self._last_t
        self._last_t = timestamp
        idx = self.frames_processed

        hs = rgb_to_hs(frame)
        self.hs_conversions += 1

        self.red_track, red = self._track_marker(hs, self.cfg.red_template, self.red_track, dt, idx)
        self.green_track, green = self._track_marker(hs, self.cfg.green_template, self.green_track, dt, idx)

        events = self.machine.step(red.position, green.position, timestamp, idx)

        self.frames_processed += 1
        return FrameReport(idx, timestamp, red, green, events, time.perf_counter() - t0)

    def _track_marker(self, hs, tpl, track, dt, idx) -> tuple[TrackState, MarkerReport]:
        counter = OpCounter()
        fw, fh = self.cfg.frame_dims
        prev = None
        if track.status is not TrackStatus.LOST:
            px, py = track.position
            # coasting prediction can drift past the border; pull the
            # scan origin back inside
            prev = (
                min(max(int(math.floor(px + 0.5)), 0), fw - 1),
                min(max(int(math.floor(py + 0.5)), 0), fh - 1),
            )
        scan = "circular" if prev is not None else "raster"
        det = detect(hs, tpl, self.cfg.detector, prev=prev, counter=counter, frame_index=idx)

        if det is not None and track.status is TrackStatus.LOST:
            new = reset(track, det, self.cfg.kalman)
            pos = new.position
        else:
            new, pos = step(track, det, dt, self.cfg.kalman)

        if self.cfg.use_raw_positions:
            pos = (float(det.center[0]), float(det.center[1])) if det is not None else None
        return new, MarkerReport(
            color=tpl.color_tag,
            scan=scan,
            detection=det,
            track_status=new.status,
            position=pos,
            positions_evaluated=counter.positions,
            terms_evaluated=counter.terms,
        )

    def run_stream(
        self, source: Iterable[tuple[RgbFrame, float]]
    ) -> Iterator[FrameReport]:
        """Process (frame, timestamp) pairs in order, annotating any
        failure with the frame index it happened on."""
        for frame, timestamp in source:
            try:
                yield self.process_frame(frame, timestamp)
            except ValueError as e:
                raise ValueError(f"frame {self.frames_processed}: {e}") from e
