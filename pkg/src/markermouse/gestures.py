"""Gesture state machine: marker positions in, commands out.

Red alone moves the cursor; holding it still for the dwell time arms a
click, released by moving up (left click), right (right click) or down
(double click). Green alone arms the same way and fires forward (right)
or backward (left). Both markers together track the inter-marker
distance and fire zoom in/out on net growth/shrink past the threshold,
re-anchoring after each step so zooming repeats.
"""

import math
from dataclasses import dataclass, replace
from enum import Enum


class GestureKind(Enum):
    CURSOR_MOVE = "cursor_move"
    LEFT_CLICK = "left_click"
    RIGHT_CLICK = "right_click"
    DOUBLE_CLICK = "double_click"
    ZOOM_IN = "zoom_in"
    ZOOM_OUT = "zoom_out"
    FORWARD = "forward"
    BACKWARD = "backward"


DISCRETE_KINDS = frozenset(k for k in GestureKind if k is not GestureKind.CURSOR_MOVE)


@dataclass
class GestureEvent:
    kind: GestureKind
    frame_index: int
    timestamp: float
    x: int | None = None   # screen px, cursor moves only
    y: int | None = None

    def to_dict(self) -> dict:
        if self.kind is GestureKind.CURSOR_MOVE:
            return {
                "type": "cursor",
                "x": self.x,
                "y": self.y,
                "frame_index": self.frame_index,
                "t": self.timestamp,
            }
        return {
            "type": "gesture",
            "name": self.kind.value,
            "frame_index": self.frame_index,
            "t": self.timestamp,
        }


@dataclass
class GestureConfig:
    dwell_time: float = 2.0        # seconds a marker must hold still
    dwell_radius: float = 15.0     # px, "holding still" tolerance
    move_threshold: float = 40.0   # px displacement that fires an armed command
    zoom_threshold: float = 30.0   # px net distance change per zoom step
    axis_dominance: float = 1.5    # dominant axis must beat the other by this factor

    def __post_init__(self):
        if self.dwell_time <= 0 or self.dwell_radius <= 0 or self.zoom_threshold <= 0:
            raise ValueError("dwell_time, dwell_radius and zoom_threshold must be positive")
        if self.move_threshold <= self.dwell_radius:
            raise ValueError("move_threshold must exceed dwell_radius")
        if self.axis_dominance < 1.0:
            raise ValueError("axis_dominance must be >= 1")

    @classmethod
    def scaled_to(cls, frame_width: int) -> "GestureConfig":
        """Defaults are tuned for a 640-wide frame; scale px thresholds."""
        k = frame_width / 640.0
        return cls(
            dwell_radius=15.0 * k,
            move_threshold=40.0 * k,
            zoom_threshold=30.0 * k,
        )

    def to_dict(self) -> dict:
        return {
            "dwell_time": self.dwell_time,
            "dwell_radius": self.dwell_radius,
            "move_threshold": self.move_threshold,
            "zoom_threshold": self.zoom_threshold,
            "axis_dominance": self.axis_dominance,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GestureConfig":
        return cls(**d)


class Phase(Enum):
    START = "start"
    RED_DWELLING = "red_dwelling"
    RED_ARMED = "red_armed"
    GREEN_DWELLING = "green_dwelling"
    GREEN_ARMED = "green_armed"
    ZOOM_TRACKING = "zoom_tracking"


@dataclass
class MachineState:
    phase: Phase = Phase.START
    anchor: tuple[float, float] | None = None   # dwell anchor (dwell/armed phases)
    since: float | None = None                  # dwell start time
    zoom_dist: float | None = None              # anchored inter-marker distance
    last_red: tuple[float, float] | None = None
    last_green: tuple[float, float] | None = None


def map_to_screen(
    p: tuple[float, float],
    frame_dims: tuple[int, int],
    screen_dims: tuple[int, int],
) -> tuple[int, int]:
    """Linear frame-to-screen mapping, origin to origin, floor-rounded
    and clamped to the screen. Positions slightly outside the frame
    (prediction overshoot at the edges) are clamped in first."""
    fw, fh = frame_dims
    sw, sh = screen_dims
    if fw <= 0 or fh <= 0 or sw <= 0 or sh <= 0:
        raise ValueError(f"degenerate dims: frame {frame_dims}, screen {screen_dims}")
    x = min(max(p[0], 0.0), fw - 1)
    y = min(max(p[1], 0.0), fh - 1)
    sx = int(math.floor(x * sw / fw))
    sy = int(math.floor(y * sh / fh))
    return min(sx, sw - 1), min(sy, sh - 1)


# armed-phase displacement -> command, per marker
_RED_COMMANDS = {"up": GestureKind.LEFT_CLICK, "right": GestureKind.RIGHT_CLICK, "down": GestureKind.DOUBLE_CLICK}
_GREEN_COMMANDS = {"right": GestureKind.FORWARD, "left": GestureKind.BACKWARD}


def _classify_move(
    dx: float, dy: float, threshold: float, dominance: float
) -> str | None:
    """Direction of a displacement once it crosses the threshold.

    None = still below threshold; "ambiguous" = crossed, but neither
    axis dominates the other by the dominance factor.
    """
    adx, ady = abs(dx), abs(dy)
    if max(adx, ady) <= threshold:
        return None
    if adx >= ady:
        if adx < dominance * ady:
            return "ambiguous"
        return "right" if dx > 0 else "left"
    if ady < dominance * adx:
        return "ambiguous"
    return "up" if dy < 0 else "down"


class GestureMachine:
    """Sequential per-session recognizer. Feed one position pair per
    frame; timestamps must never decrease."""

    def __init__(
        self,
        cfg: GestureConfig,
        frame_dims: tuple[int, int],
        screen_dims: tuple[int, int],
    ):
        self.cfg = cfg
        self.frame_dims = frame_dims
        self.screen_dims = screen_dims
        self.state = MachineState()
        self._last_t: float | None = None

    def step(
        self,
        red: tuple[float, float] | None,
        green: tuple[float, float] | None,
        t: float,
        frame_index: int = 0,
    ) -> list[GestureEvent]:
        if self._last_t is not None and t < self._last_t:
            raise ValueError(f"time went backwards: {t} < {self._last_t}")
        self._last_t = t

        events: list[GestureEvent] = []
        if red is not None:
            sx, sy = map_to_screen(red, self.frame_dims, self.screen_dims)
            events.append(GestureEvent(GestureKind.CURSOR_MOVE, frame_index, t, sx, sy))

        command: GestureKind | None = None
        if red is not None and green is not None:
            command = self._step_zoom(red, green)
        elif red is not None:
            command = self._step_single(red, t, Phase.RED_DWELLING, Phase.RED_ARMED, _RED_COMMANDS)
        elif green is not None:
            command = self._step_single(green, t, Phase.GREEN_DWELLING, Phase.GREEN_ARMED, _GREEN_COMMANDS)
        else:
            self.state = replace(self.state, phase=Phase.START, anchor=None, since=None, zoom_dist=None)

        if command is not None:
            events.append(GestureEvent(command, frame_index, t))

        self.state = replace(self.state, last_red=red, last_green=green)
        return events

    def _step_zoom(self, red, green) -> GestureKind | None:
        st = self.state
        dist = math.hypot(red[0] - green[0], red[1] - green[1])
        if st.phase is not Phase.ZOOM_TRACKING:
            # both markers preempt whatever else was going on
            self.state = MachineState(phase=Phase.ZOOM_TRACKING, zoom_dist=dist)
            return None
        delta = dist - st.zoom_dist
        if delta > self.cfg.zoom_threshold:
            self.state = replace(st, zoom_dist=dist)
            return GestureKind.ZOOM_IN
        if delta < -self.cfg.zoom_threshold:
            self.state = replace(st, zoom_dist=dist)
            return GestureKind.ZOOM_OUT
        return None

    def _step_single(
        self,
        pos: tuple[float, float],
        t: float,
        dwelling: Phase,
        armed: Phase,
        commands: dict[str, "GestureKind"],
    ) -> GestureKind | None:
        st = self.state
        cfg = self.cfg
        if st.phase is dwelling:
            if math.hypot(pos[0] - st.anchor[0], pos[1] - st.anchor[1]) > cfg.dwell_radius:
                # wandered out: dwell restarts here and now
                self.state = MachineState(phase=dwelling, anchor=pos, since=t)
            elif t - st.since >= cfg.dwell_time:
                self.state = MachineState(phase=armed, anchor=st.anchor)
            return None
        if st.phase is armed:
            direction = _classify_move(
                pos[0] - st.anchor[0], pos[1] - st.anchor[1],
                cfg.move_threshold, cfg.axis_dominance,
            )
            if direction is None:
                return None
            # any threshold crossing consumes the arm, even when it maps
            # to no command (ambiguous axis, or a direction the grammar
            # leaves undefined)
            self.state = MachineState(phase=Phase.START)
            return commands.get(direction)
        self.state = MachineState(phase=dwelling, anchor=pos, since=t)
        return None
