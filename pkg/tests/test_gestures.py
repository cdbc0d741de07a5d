"""Gesture grammar: dwell-arm-release clicks, scroll, zoom, mapping."""

import pytest

from markermouse.gestures import (
    GestureConfig,
    GestureEvent,
    GestureKind,
    GestureMachine,
    _classify_move,
    map_to_screen,
)

FRAME = (640, 480)
SCREEN = (1920, 1080)
FPS = 40.0


def machine(**cfg_kwargs) -> GestureMachine:
    return GestureMachine(GestureConfig(**cfg_kwargs), FRAME, SCREEN)


def run(m: GestureMachine, schedule) -> list[GestureEvent]:
    """schedule: iterable of (red, green, t) triples."""
    out = []
    for i, (red, green, t) in enumerate(schedule):
        out.extend(m.step(red, green, t, frame_index=i))
    return out


def dwell_then_move(pos, move_to, hold=2.2, fps=FPS, marker="red"):
    """A still hold at pos long enough to arm, then a jump to move_to."""
    frames = int(hold * fps)
    sched = []
    for i in range(frames):
        t = i / fps
        p = pos
        sched.append((p, None, t) if marker == "red" else (None, p, t))
    t = frames / fps
    sched.append((move_to, None, t) if marker == "red" else (None, move_to, t))
    return sched


def discrete(events):
    return [e.kind for e in events if e.kind is not GestureKind.CURSOR_MOVE]


class TestMapToScreen:
    def test_corner_pixel(self):
        assert map_to_screen((639, 479), FRAME, SCREEN) == (1917, 1077)

    def test_origin_and_center(self):
        assert map_to_screen((0, 0), FRAME, SCREEN) == (0, 0)
        assert map_to_screen((320, 240), FRAME, SCREEN) == (960, 540)

    def test_out_of_frame_clamped(self):
        assert map_to_screen((-12.5, 500.0), FRAME, SCREEN) == (0, 1077)

    def test_result_never_reaches_screen_size(self):
        sx, sy = map_to_screen((639.999, 479.999), FRAME, SCREEN)
        assert sx < 1920 and sy < 1080

    def test_degenerate_dims_raise(self):
        with pytest.raises(ValueError):
            map_to_screen((0, 0), (0, 480), SCREEN)
        with pytest.raises(ValueError):
            map_to_screen((0, 0), FRAME, (1920, 0))


class TestClassifyMove:
    def test_below_or_at_threshold_is_none(self):
        assert _classify_move(40.0, 0.0, 40.0, 1.5) is None
        assert _classify_move(0.0, -40.0, 40.0, 1.5) is None
        assert _classify_move(5.0, 5.0, 40.0, 1.5) is None

    def test_cardinal_directions(self):
        assert _classify_move(50, 0, 40, 1.5) == "right"
        assert _classify_move(-50, 0, 40, 1.5) == "left"
        assert _classify_move(0, -50, 40, 1.5) == "up"
        assert _classify_move(0, 50, 40, 1.5) == "down"

    def test_dominance_boundary_inclusive(self):
        # 45 = 1.5 * 30 exactly: dominant
        assert _classify_move(45, 30, 40, 1.5) == "right"
        assert _classify_move(30, -45, 40, 1.5) == "up"
        # just inside the factor: ambiguous
        assert _classify_move(44, 30, 40, 1.5) == "ambiguous"
        assert _classify_move(30, 44, 40, 1.5) == "ambiguous"

    def test_perfect_diagonal_ambiguous(self):
        assert _classify_move(50, 50, 40, 1.5) == "ambiguous"


class TestClicks:
    @pytest.mark.parametrize(
        "move_to,expected",
        [
            ((320, 180), GestureKind.LEFT_CLICK),    # up
            ((380, 240), GestureKind.RIGHT_CLICK),   # right
            ((320, 300), GestureKind.DOUBLE_CLICK),  # down
        ],
    )
    def test_red_dwell_then_move_fires(self, move_to, expected):
        events = run(machine(), dwell_then_move((320, 240), move_to))
        assert discrete(events) == [expected]

    def test_red_left_is_undefined_and_consumes_arm(self):
        m = machine()
        events = run(m, dwell_then_move((320, 240), (260, 240)))
        assert discrete(events) == []
        # arm was consumed: an immediate up-move must not click
        more = m.step((320, 180), None, 3.0, frame_index=99)
        assert discrete(more) == []

    def test_ambiguous_release_consumes_without_event(self):
        m = machine()
        events = run(m, dwell_then_move((320, 240), (370, 290)))
        assert discrete(events) == []
        more = m.step((320, 160), None, 3.0)
        assert discrete(more) == []

    def test_exact_threshold_does_not_fire(self):
        m = machine()
        run(m, dwell_then_move((320, 240), (320, 240)))  # arm only
        events = m.step((360, 240), None, 3.0)  # exactly 40 px
        assert discrete(events) == []
        events = m.step((361, 240), None, 3.025)  # now past it
        assert discrete(events) == [GestureKind.RIGHT_CLICK]

    def test_small_wander_keeps_arm(self):
        m = machine()
        run(m, dwell_then_move((320, 240), (330, 240)))  # 10 px, below threshold
        events = m.step((320, 180), None, 3.0)
        assert discrete(events) == [GestureKind.LEFT_CLICK]

    def test_dwell_restarts_when_wandering_out(self):
        m = machine()
        sched = []
        # 1 s still, then jump 30 px (outside the 15 px radius), then
        # 1.2 s still at the new spot: not armed on the original clock
        for i in range(40):
            sched.append(((320, 240), None, i / FPS))
        for i in range(40, 88):
            sched.append(((350, 240), None, i / FPS))
        run(machine(), sched)
        m2 = machine()
        run(m2, sched)
        events = m2.step((350, 180), None, 88 / FPS)
        assert discrete(events) == []  # only 1.2 s at the new anchor

    def test_jitter_within_radius_still_arms(self):
        m = machine()
        sched = []
        for i in range(int(2.2 * FPS)):
            wiggle = 5 if i % 2 else -5
            sched.append(((320 + wiggle, 240), None, i / FPS))
        run(m, sched)
        events = m.step((320, 170), None, 2.3)
        assert discrete(events) == [GestureKind.LEFT_CLICK]

    def test_two_clicks_need_two_dwells(self):
        m = machine()
        ev1 = run(m, dwell_then_move((320, 240), (320, 180)))
        assert discrete(ev1) == [GestureKind.LEFT_CLICK]
        # machine is back at start; next click needs a fresh 2 s hold
        sched = [((320, 180), None, 3.0 + i / FPS) for i in range(int(2.2 * FPS))]
        run(m, sched)
        ev2 = m.step((320, 120), None, 6.0)
        assert discrete(ev2) == [GestureKind.LEFT_CLICK]


class TestScroll:
    def test_green_right_is_forward(self):
        events = run(machine(), dwell_then_move((320, 240), (380, 240), marker="green"))
        assert discrete(events) == [GestureKind.FORWARD]

    def test_green_left_is_backward(self):
        events = run(machine(), dwell_then_move((320, 240), (260, 240), marker="green"))
        assert discrete(events) == [GestureKind.BACKWARD]

    def test_green_vertical_is_undefined(self):
        m = machine()
        events = run(m, dwell_then_move((320, 240), (320, 180), marker="green"))
        assert discrete(events) == []

    def test_green_emits_no_cursor_events(self):
        events = run(machine(), dwell_then_move((320, 240), (380, 240), marker="green"))
        assert all(e.kind is not GestureKind.CURSOR_MOVE for e in events)

    def test_switching_marker_discards_progress(self):
        m = machine()
        run(m, dwell_then_move((320, 240), (320, 240)))  # red armed
        # green takes over; it must dwell itself before firing
        events = m.step(None, (380, 240), 3.0)
        events += m.step(None, (450, 240), 3.025)
        assert discrete(events) == []


class TestZoom:
    def staged(self, pairs):
        m = machine()
        out = []
        for i, (red, green) in enumerate(pairs):
            out.extend(m.step(red, green, i / FPS, frame_index=i))
        return m, out

    def test_spread_fires_zoom_in(self):
        _, events = self.staged([
            ((300, 240), (340, 240)),   # dist 40, anchors
            ((290, 240), (350, 240)),   # dist 60, +20: below threshold
            ((280, 240), (352, 240)),   # dist 72, +32: fires
        ])
        assert discrete(events) == [GestureKind.ZOOM_IN]

    def test_pinch_fires_zoom_out(self):
        _, events = self.staged([
            ((300, 240), (400, 240)),   # dist 100
            ((310, 240), (379, 240)),   # dist 69, -31: fires
        ])
        assert discrete(events) == [GestureKind.ZOOM_OUT]

    def test_exact_threshold_change_does_not_fire(self):
        _, events = self.staged([
            ((300, 240), (340, 240)),   # dist 40
            ((300, 240), (370, 240)),   # dist 70, +30 == threshold
        ])
        assert discrete(events) == []

    def test_reanchor_makes_zoom_repeat(self):
        _, events = self.staged([
            ((300, 240), (340, 240)),   # dist 40
            ((300, 240), (371, 240)),   # dist 71, +31: zoom in, re-anchor
            ((300, 240), (402, 240)),   # dist 102, +31 from 71: zoom in again
            ((300, 240), (433, 240)),   # +31 again
        ])
        assert discrete(events) == [GestureKind.ZOOM_IN] * 3

    def test_slow_continuous_spread_accumulates(self):
        # +10 px per frame never jumps the threshold in one step but the
        # anchor only moves when a zoom fires, so steps accumulate:
        # fires at spread 80, 120, 160
        pairs = [((300, 240), (300 + 40 + 10 * i, 240)) for i in range(13)]
        _, events = self.staged(pairs)
        assert discrete(events) == [GestureKind.ZOOM_IN] * 3

    def test_both_markers_preempt_red_dwell(self):
        m = machine()
        run(m, dwell_then_move((320, 240), (320, 240)))  # red armed
        m.step((320, 240), (360, 240), 3.0)              # green joins: zoom mode
        # red moving up now changes the distance, not a click
        events = m.step((320, 190), (360, 240), 3.025)
        assert GestureKind.LEFT_CLICK not in discrete(events)

    def test_zoom_to_single_marker_starts_fresh_dwell(self):
        m = machine()
        m.step((300, 240), (340, 240), 0.0)
        m.step((300, 240), (340, 240), 0.025)
        m.step((300, 240), None, 0.05)          # green gone: red dwell restarts
        events = m.step((360, 240), None, 0.075)  # immediate move must not click
        assert discrete(events) == []

    def test_cursor_still_emitted_during_zoom(self):
        _, events = self.staged([
            ((300, 240), (340, 240)),
            ((290, 240), (350, 240)),
        ])
        cursors = [e for e in events if e.kind is GestureKind.CURSOR_MOVE]
        assert len(cursors) == 2


class TestStepBasics:
    def test_cursor_event_per_visible_red_frame(self):
        m = machine()
        events = m.step((320, 240), None, 0.0, frame_index=7)
        assert len(events) == 1
        e = events[0]
        assert e.kind is GestureKind.CURSOR_MOVE
        assert (e.x, e.y) == (960, 540)
        assert e.frame_index == 7 and e.timestamp == 0.0

    def test_cursor_comes_before_command_in_same_frame(self):
        m = machine()
        run(m, dwell_then_move((320, 240), (320, 240)))
        events = m.step((320, 180), None, 3.0)
        assert [e.kind for e in events] == [
            GestureKind.CURSOR_MOVE,
            GestureKind.LEFT_CLICK,
        ]

    def test_no_markers_no_events(self):
        assert machine().step(None, None, 0.0) == []

    def test_both_vanishing_resets_to_start(self):
        m = machine()
        run(m, dwell_then_move((320, 240), (320, 240)))  # armed
        m.step(None, None, 3.0)
        events = m.step((320, 180), None, 3.025)  # would click if still armed
        assert discrete(events) == []

    def test_time_backwards_raises(self):
        m = machine()
        m.step((320, 240), None, 1.0)
        with pytest.raises(ValueError):
            m.step((320, 240), None, 0.5)

    def test_equal_timestamps_allowed(self):
        m = machine()
        m.step((320, 240), None, 1.0)
        m.step((320, 240), None, 1.0)

    def test_dwell_needs_full_time_not_frame_count(self):
        # same frames at half the frame rate: dwell still keys off t
        m = machine()
        sched = [((320, 240), None, i / 20.0) for i in range(int(2.2 * 20))]
        run(m, sched)
        events = m.step((320, 180), None, 2.3)
        assert discrete(events) == [GestureKind.LEFT_CLICK]


class TestEventDicts:
    def test_cursor_dict(self):
        e = GestureEvent(GestureKind.CURSOR_MOVE, 3, 0.075, 960, 540)
        assert e.to_dict() == {
            "type": "cursor", "x": 960, "y": 540, "frame_index": 3, "t": 0.075,
        }

    def test_gesture_dict(self):
        e = GestureEvent(GestureKind.ZOOM_OUT, 12, 0.3)
        assert e.to_dict() == {
            "type": "gesture", "name": "zoom_out", "frame_index": 12, "t": 0.3,
        }


class TestConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(dwell_time=0),
            dict(dwell_radius=-1),
            dict(move_threshold=10.0, dwell_radius=15.0),
            dict(zoom_threshold=0),
            dict(axis_dominance=0.9),
        ],
    )
    def test_invalid_rejected(self, kwargs):
        with pytest.raises(ValueError):
            GestureConfig(**kwargs)

    def test_scaled_to_other_frame_width(self):
        cfg = GestureConfig.scaled_to(1280)
        assert cfg.dwell_radius == 30.0
        assert cfg.move_threshold == 80.0
        assert cfg.zoom_threshold == 60.0
        assert cfg.dwell_time == 2.0  # time is not a pixel quantity

    def test_dict_round_trip(self):
        cfg = GestureConfig(dwell_time=1.5, move_threshold=50.0)
        assert GestureConfig.from_dict(cfg.to_dict()) == cfg
