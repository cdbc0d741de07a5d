"""Colored-marker tracking and hand-gesture engine.

Feeds a stream of RGB frames through hue/saturation template matching,
Kalman tracking, and a gesture state machine, emitting cursor positions
and discrete system commands.
"""

from .color import HsFrame, RgbFrame, hs_at, rgb_to_hs
from .detector import Detection, DetectorConfig, detect
from .gestures import GestureConfig, GestureEvent, GestureKind, GestureMachine, map_to_screen
from .matcher import MarkerTemplate, OpCounter, SlideDirection, response_direct, response_incremental, response_row
from .pipeline import ConfigError, Engine, EngineConfig, FrameReport, MarkerReport, default_config
from .tracker import KalmanConfig, TrackState, TrackStatus

__all__ = [
    "ConfigError",
    "Detection",
    "DetectorConfig",
    "Engine",
    "EngineConfig",
    "FrameReport",
    "GestureConfig",
    "GestureEvent",
    "GestureKind",
    "GestureMachine",
    "HsFrame",
    "KalmanConfig",
    "MarkerReport",
    "MarkerTemplate",
    "OpCounter",
    "RgbFrame",
    "SlideDirection",
    "TrackState",
    "TrackStatus",
    "default_config",
    "detect",
    "hs_at",
    "map_to_screen",
    "response_direct",
    "response_incremental",
    "response_row",
    "rgb_to_hs",
]
