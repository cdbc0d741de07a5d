"""Constant-velocity Kalman filtering of marker detections.

State is (x, y, vx, vy) with position-only measurements. Missed
detections are coasted on prediction for up to max_misses frames, then
the track is Lost and the caller falls back to raster scanning.
All operations return a new TrackState; instances are never mutated.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .detector import Detection

# measurement picks the position components out of the state
_H = np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]])
_I4 = np.eye(4)


class TrackStatus(Enum):
    ACTIVE = "active"
    COASTING = "coasting"
    LOST = "lost"


@dataclass
class KalmanConfig:
    process_noise: float = 50.0       # velocity variance added per second
    measurement_noise: float = 25.0   # px^2, matches typical centroid jitter
    max_misses: int = 3               # coasting frames before Lost
    init_pos_var: float = 100.0
    init_vel_var: float = 400.0

    def __post_init__(self):
        if self.process_noise <= 0 or self.measurement_noise <= 0:
            raise ValueError("noise variances must be positive")
        if self.max_misses < 0:
            raise ValueError("max_misses must be >= 0")

    def to_dict(self) -> dict:
        return {
            "process_noise": self.process_noise,
            "measurement_noise": self.measurement_noise,
            "max_misses": self.max_misses,
            "init_pos_var": self.init_pos_var,
            "init_vel_var": self.init_vel_var,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "KalmanConfig":
        return cls(**d)


@dataclass
class TrackState:
    state: np.ndarray        # (x, y, vx, vy), float64
    covariance: np.ndarray   # 4x4, symmetric PSD
    misses: int = 0
    status: TrackStatus = TrackStatus.ACTIVE

    @property
    def position(self) -> tuple[float, float]:
        return float(self.state[0]), float(self.state[1])

    @property
    def velocity(self) -> tuple[float, float]:
        return float(self.state[2]), float(self.state[3])


def lost_track() -> TrackState:
    """Placeholder state used before the first detection."""
    return TrackState(
        state=np.zeros(4),
        covariance=np.zeros((4, 4)),
        misses=10**9,
        status=TrackStatus.LOST,
    )


def reset(track: TrackState, det: Detection, cfg: KalmanConfig | None = None) -> TrackState:
    """Fresh Active track at the detection, zero velocity."""
    cfg = cfg or KalmanConfig()
    v = np.diag([cfg.init_pos_var, cfg.init_pos_var, cfg.init_vel_var, cfg.init_vel_var])
    return TrackState(
        state=np.array([det.center[0], det.center[1], 0.0, 0.0]),
        covariance=v,
        misses=0,
        status=TrackStatus.ACTIVE,
    )


def predict(track: TrackState, dt: float, cfg: KalmanConfig) -> TrackState:
    """Time update: advance position by velocity, inflate covariance."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if track.status is TrackStatus.LOST:
        raise ValueError("cannot predict a Lost track")
    F = np.array(
        [[1, 0, dt, 0], [0, 1, 0, dt], [0, 0, 1, 0], [0, 0, 0, 1]], dtype=np.float64
    )
    Q = np.diag([0.0, 0.0, cfg.process_noise * dt, cfg.process_noise * dt])
    x = F @ track.state
    P = F @ track.covariance @ F.T + Q
    P = (P + P.T) * 0.5
    return TrackState(state=x, covariance=P, misses=track.misses, status=track.status)


def update(track: TrackState, meas: tuple[float, float], cfg: KalmanConfig) -> TrackState:
    """Measurement update with a position observation."""
    if track.status is TrackStatus.LOST:
        raise ValueError("cannot update a Lost track")
    z = np.asarray(meas, dtype=np.float64)
    if not np.all(np.isfinite(z)):
        raise ValueError(f"non-finite measurement {meas}")
    P = track.covariance
    S = _H @ P @ _H.T + np.eye(2) * cfg.measurement_noise
    K = P @ _H.T @ np.linalg.inv(S)
    x = track.state + K @ (z - _H @ track.state)
    P = (_I4 - K @ _H) @ P
    P = (P + P.T) * 0.5
    return TrackState(state=x, covariance=P, misses=0, status=TrackStatus.ACTIVE)


def step(
    track: TrackState, det: Detection | None, dt: float, cfg: KalmanConfig
) -> tuple[TrackState, tuple[float, float] | None]:
    """One frame: predict, then correct with the detection if there is
    one, else coast. Returns the new track and the filtered position
    (None once the track is Lost).

    dt = 0 is allowed and skips the time update (two frames with the
    same timestamp).
    """
    if dt < 0:
        raise ValueError(f"dt must be >= 0, got {dt}")
    if track.status is TrackStatus.LOST:
        return track, None

    pred = predict(track, dt, cfg) if dt > 0 else track
    if det is not None:
        post = update(pred, (float(det.center[0]), float(det.center[1])), cfg)
        return post, post.position

    misses = track.misses + 1
    if misses > cfg.max_misses:
        lost = TrackState(pred.state, pred.covariance, misses, TrackStatus.LOST)
        return lost, None
    coasting = TrackState(pred.state, pred.covariance, misses, TrackStatus.COASTING)
    return coasting, coasting.position
