"""Run a fixture through the engine and score the result.

Joins per-frame engine reports with the fixture's ground truth:
centroid error where the marker was cleanly drawn, smoothness of the
raw versus filtered trajectories, loss/reacquisition episodes, the
event log against an expected-command script, and frame-time
percentiles.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .fixtures import Fixture
from .gestures import DISCRETE_KINDS
from .pipeline import Engine, EngineConfig, FrameReport, default_config
from .tracker import TrackStatus


def config_for(fixture: Fixture, base: EngineConfig | None = None) -> EngineConfig:
    """Default engine config resized to the fixture's frames."""
    cfg = base if base is not None else default_config()
    if cfg.frame_dims != fixture.frame_dims:
        cfg = replace(cfg, frame_dims=fixture.frame_dims)
    return cfg


def mean_sq_second_diff(points: list[tuple[float, float] | None]) -> float:
    """Smoothness score: mean squared norm of the second difference
    over every run of three consecutive defined points. NaN when no
    triple qualifies."""
    vals = []
    for a, b, c in zip(points, points[1:], points[2:]):
        if a is None or b is None or c is None:
            continue
        dx = a[0] - 2 * b[0] + c[0]
        dy = a[1] - 2 * b[1] + c[1]
        vals.append(dx * dx + dy * dy)
    return float(np.mean(vals)) if vals else float("nan")


@dataclass
class ColorMetrics:
    """Per-marker slice of a run."""

    color: str
    clean_frames: int          # drawn, not blurred
    detected_frames: int       # of those, frames with a detection
    err_mean: float            # centroid error on detected clean frames, px
    err_std: float
    err_max: float
    filtered_err_max: float    # filtered position vs truth, defined frames
    jerk_raw: float
    jerk_filtered: float
    reacquisitions: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "color": self.color,
            "clean_frames": self.clean_frames,
            "detected_frames": self.detected_frames,
            "err_mean": self.err_mean,
            "err_std": self.err_std,
            "err_max": self.err_max,
            "filtered_err_max": self.filtered_err_max,
            "jerk_raw": self.jerk_raw,
            "jerk_filtered": self.jerk_filtered,
            "reacquisitions": self.reacquisitions,
        }


@dataclass
class RunMetrics:
    frames: int
    eval_positions: list[int]      # per frame, both markers
    eval_terms: list[int]
    per_color: dict[str, ColorMetrics]
    events: list[dict]             # every event dict, in emission order
    expected: list[dict]           # [{"name", "hit", "frame_index"}]
    unexpected: list[dict]         # discrete events not matched by expected
    elapsed_p50: float
    elapsed_p95: float

    @property
    def discrete_events(self) -> list[dict]:
        return [e for e in self.events if e["type"] == "gesture"]

    def to_dict(self, per_frame: bool = False) -> dict:
        d = {
            "frames": self.frames,
            "eval_positions_total": int(sum(self.eval_positions)),
            "eval_positions_mean": float(np.mean(self.eval_positions)) if self.eval_positions else 0.0,
            "eval_terms_total": int(sum(self.eval_terms)),
            "per_color": {c: m.to_dict() for c, m in self.per_color.items()},
            "events": self.events,
            "expected": self.expected,
            "unexpected": self.unexpected,
            "elapsed_p50": self.elapsed_p50,
            "elapsed_p95": self.elapsed_p95,
        }
        if per_frame:
            d["eval_positions"] = self.eval_positions
            d["eval_terms"] = self.eval_terms
        return d


def _marker_report(report: FrameReport, color: str):
    return report.red if color == "red" else report.green


def _color_metrics(color: str, reports: list[FrameReport], fixture: Fixture) -> ColorMetrics:
    truth = fixture.truth_for(color)
    errs = []
    filtered_errs = []
    raw_pts: list[tuple[float, float] | None] = []
    filt_pts: list[tuple[float, float] | None] = []
    clean = detected = 0
    for rep, tt in zip(reports, truth):
        mr = _marker_report(rep, color)
        det = mr.detection
        raw_pts.append((float(det.center[0]), float(det.center[1])) if det else None)
        filt_pts.append(mr.position)
        if mr.position is not None:
            filtered_errs.append(math.hypot(mr.position[0] - tt.x, mr.position[1] - tt.y))
        if tt.drawn and not tt.blurred:
            clean += 1
            if det is not None:
                detected += 1
                errs.append(math.hypot(det.center[0] - tt.x, det.center[1] - tt.y))

    reacqs = []
    lost_at = None
    for i, rep in enumerate(reports):
        mr = _marker_report(rep, color)
        if mr.track_status is TrackStatus.LOST and lost_at is None:
            lost_at = i
        elif lost_at is not None and mr.detection is not None:
            reacqs.append(
                {
                    "lost_at": lost_at,
                    "regained_at": i,
                    "gap": i - lost_at,
                    "scan": mr.scan,
                    "positions_evaluated": mr.positions_evaluated,
                }
            )
            lost_at = None
    # lost_at == 0 means the track was never held; that first pickup is
    # initial acquisition, not a reacquisition episode
    if reacqs and reacqs[0]["lost_at"] == 0:
        reacqs = reacqs[1:]

    return ColorMetrics(
        color=color,
        clean_frames=clean,
        detected_frames=detected,
        err_mean=float(np.mean(errs)) if errs else float("nan"),
        err_std=float(np.std(errs)) if errs else float("nan"),
        err_max=float(np.max(errs)) if errs else float("nan"),
        filtered_err_max=float(np.max(filtered_errs)) if filtered_errs else float("nan"),
        jerk_raw=mean_sq_second_diff(raw_pts),
        jerk_filtered=mean_sq_second_diff(filt_pts),
        reacquisitions=reacqs,
    )


def _match_expected(expected: list[str], discretes: list[dict]) -> tuple[list[dict], list[dict]]:
    """Greedy in-order matching of expected command names against the
    observed discrete events."""
    hits = []
    used = [False] * len(discretes)
    pos = 0
    for name in expected:
        hit = None
        for j in range(pos, len(discretes)):
            if not used[j] and discretes[j]["name"] == name:
                hit = j
                break
        if hit is None:
            hits.append({"name": name, "hit": False, "frame_index": None})
        else:
            used[hit] = True
            pos = hit + 1
            hits.append({"name": name, "hit": True, "frame_index": discretes[hit]["frame_index"]})
    extras = [d for j, d in enumerate(discretes) if not used[j]]
    return hits, extras


def replay(
    cfg: EngineConfig | None,
    fixture: Fixture,
    expected: list[str] | None = None,
) -> RunMetrics:
    engine = Engine(config_for(fixture, cfg))
    reports = list(engine.run_stream(fixture.source()))
    return score(reports, fixture, expected)


def score(
    reports: list[FrameReport],
    fixture: Fixture,
    expected: list[str] | None = None,
) -> RunMetrics:
    if expected is not None:
        valid = {k.value for k in DISCRETE_KINDS}
        bad = [n for n in expected if n not in valid]
        if bad:
            raise ValueError(f"unknown expected command names {bad}")

    colors = [tr.color for tr in fixture.script.tracks]
    per_color = {c: _color_metrics(c, reports, fixture) for c in dict.fromkeys(colors)}

    events = [e.to_dict() for rep in reports for e in rep.events]
    discretes = [e for e in events if e["type"] == "gesture"]
    hits, extras = _match_expected(expected or [], discretes)
    if expected is None:
        extras = []

    elapsed = [rep.elapsed for rep in reports]
    return RunMetrics(
        frames=len(reports),
        eval_positions=[r.red.positions_evaluated + r.green.positions_evaluated for r in reports],
        eval_terms=[r.red.terms_evaluated + r.green.terms_evaluated for r in reports],
        per_color=per_color,
        events=events,
        expected=hits,
        unexpected=extras,
        elapsed_p50=float(np.percentile(elapsed, 50)) if elapsed else float("nan"),
        elapsed_p95=float(np.percentile(elapsed, 95)) if elapsed else float("nan"),
    )
