"""Track filtering against a hand-rolled matrix oracle."""

import numpy as np
import pytest

from markermouse.detector import Detection
from markermouse.tracker import (
    KalmanConfig,
    TrackState,
    TrackStatus,
    lost_track,
    predict,
    reset,
    step,
    update,
)


def det_at(x: int, y: int) -> Detection:
    return Detection(center=(x, y), area=100, response=0)


class Oracle:
    """Textbook constant-velocity filter written independently with
    explicit matrices, no shared code with the module under test."""

    def __init__(self, cfg: KalmanConfig, x0: float, y0: float):
        self.x = np.array([x0, y0, 0.0, 0.0])
        self.P = np.diag(
            [cfg.init_pos_var, cfg.init_pos_var, cfg.init_vel_var, cfg.init_vel_var]
        )
        self.cfg = cfg

    def predict(self, dt: float):
        F = np.eye(4)
        F[0, 2] = dt
        F[1, 3] = dt
        Q = np.zeros((4, 4))
        Q[2, 2] = Q[3, 3] = self.cfg.process_noise * dt
        self.x = F @ self.x
        self.P = F @ self.P @ F.T + Q
        self.P = (self.P + self.P.T) / 2

    def update(self, zx: float, zy: float):
        H = np.zeros((2, 4))
        H[0, 0] = H[1, 1] = 1.0
        R = self.cfg.measurement_noise * np.eye(2)
        z = np.array([zx, zy])
        S = H @ self.P @ H.T + R
        K = self.P @ H.T @ np.linalg.inv(S)
        self.x = self.x + K @ (z - H @ self.x)
        self.P = (np.eye(4) - K @ H) @ self.P
        self.P = (self.P + self.P.T) / 2


class TestConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [dict(process_noise=0), dict(measurement_noise=-1), dict(max_misses=-1)],
    )
    def test_invalid_rejected(self, kwargs):
        with pytest.raises(ValueError):
            KalmanConfig(**kwargs)

    def test_dict_round_trip(self):
        cfg = KalmanConfig(process_noise=10, max_misses=5)
        assert KalmanConfig.from_dict(cfg.to_dict()) == cfg


class TestAgainstOracle:
    def test_predict_update_cycle_matches_elementwise(self):
        cfg = KalmanConfig()
        rng = np.random.default_rng(31)
        track = reset(lost_track(), det_at(100, 200), cfg)
        oracle = Oracle(cfg, 100, 200)
        t = 0.0
        for _ in range(50):
            dt = float(rng.uniform(0.01, 0.05))
            t += dt
            zx = 100 + 80 * t + float(rng.normal(0, 3))
            zy = 200 + 40 * t + float(rng.normal(0, 3))
            track = predict(track, dt, cfg)
            oracle.predict(dt)
            np.testing.assert_allclose(track.state, oracle.x, atol=1e-12)
            np.testing.assert_allclose(track.covariance, oracle.P, atol=1e-12)
            track = update(track, (zx, zy), cfg)
            oracle.update(zx, zy)
            np.testing.assert_allclose(track.state, oracle.x, atol=1e-12)
            np.testing.assert_allclose(track.covariance, oracle.P, atol=1e-12)

    def test_step_equals_manual_predict_update(self):
        cfg = KalmanConfig()
        track = reset(lost_track(), det_at(50, 60), cfg)
        manual = update(predict(track, 0.025, cfg), (55.0, 63.0), cfg)
        stepped, pos = step(track, det_at(55, 63), 0.025, cfg)
        np.testing.assert_allclose(stepped.state, manual.state)
        np.testing.assert_allclose(stepped.covariance, manual.covariance)
        assert pos == manual.position

    def test_velocity_estimate_converges(self):
        cfg = KalmanConfig()
        track = reset(lost_track(), det_at(0, 0), cfg)
        rng = np.random.default_rng(7)
        dt = 0.025
        for i in range(1, 200):
            x = 120 * i * dt + float(rng.normal(0, 1))
            y = -60 * i * dt + float(rng.normal(0, 1))
            track, _ = step(track, det_at(round(x), round(y)), dt, cfg)
        vx, vy = track.velocity
        assert vx == pytest.approx(120, abs=15)
        assert vy == pytest.approx(-60, abs=15)


class TestLifecycle:
    def test_lost_placeholder(self):
        t = lost_track()
        assert t.status is TrackStatus.LOST

    def test_reset_gives_active_zero_velocity(self):
        cfg = KalmanConfig()
        t = reset(lost_track(), det_at(10, 20), cfg)
        assert t.status is TrackStatus.ACTIVE
        assert t.position == (10.0, 20.0)
        assert t.velocity == (0.0, 0.0)
        assert t.misses == 0
        np.testing.assert_array_equal(
            t.covariance, np.diag([100.0, 100.0, 400.0, 400.0])
        )

    def test_miss_sequence_active_coasting_lost(self):
        cfg = KalmanConfig(max_misses=3)
        t = reset(lost_track(), det_at(100, 100), cfg)
        statuses = []
        positions = []
        for _ in range(5):
            t, pos = step(t, None, 0.025, cfg)
            statuses.append(t.status)
            positions.append(pos)
        assert statuses == [
            TrackStatus.COASTING,
            TrackStatus.COASTING,
            TrackStatus.COASTING,
            TrackStatus.LOST,
            TrackStatus.LOST,
        ]
        assert positions[0] is not None and positions[2] is not None
        assert positions[3] is None and positions[4] is None

    def test_coasting_position_is_the_prediction(self):
        cfg = KalmanConfig()
        t = reset(lost_track(), det_at(0, 0), cfg)
        dt = 0.1
        for i in range(1, 30):
            t, _ = step(t, det_at(10 * i, 0), dt, cfg)
        vx = t.velocity[0]
        x0 = t.position[0]
        coasted, pos = step(t, None, dt, cfg)
        assert coasted.status is TrackStatus.COASTING
        assert pos[0] == pytest.approx(x0 + vx * dt, abs=1e-9)

    def test_detection_recovers_coasting_track(self):
        cfg = KalmanConfig()
        t = reset(lost_track(), det_at(100, 100), cfg)
        t, _ = step(t, None, 0.025, cfg)
        assert t.status is TrackStatus.COASTING and t.misses == 1
        t, pos = step(t, det_at(101, 101), 0.025, cfg)
        assert t.status is TrackStatus.ACTIVE and t.misses == 0
        assert pos is not None

    def test_zero_max_misses_goes_straight_to_lost(self):
        cfg = KalmanConfig(max_misses=0)
        t = reset(lost_track(), det_at(5, 5), cfg)
        t, pos = step(t, None, 0.025, cfg)
        assert t.status is TrackStatus.LOST and pos is None

    def test_step_on_lost_track_is_inert(self):
        cfg = KalmanConfig()
        t, pos = step(lost_track(), None, 0.025, cfg)
        assert t.status is TrackStatus.LOST and pos is None

    def test_zero_dt_skips_time_update(self):
        cfg = KalmanConfig()
        t = reset(lost_track(), det_at(10, 10), cfg)
        stepped, _ = step(t, det_at(12, 10), 0.0, cfg)
        manual = update(t, (12.0, 10.0), cfg)
        np.testing.assert_allclose(stepped.state, manual.state)


class TestErrors:
    def test_predict_rejects_nonpositive_dt(self):
        cfg = KalmanConfig()
        t = reset(lost_track(), det_at(0, 0), cfg)
        with pytest.raises(ValueError):
            predict(t, 0.0, cfg)
        with pytest.raises(ValueError):
            predict(t, -0.01, cfg)

    def test_predict_and_update_reject_lost(self):
        cfg = KalmanConfig()
        with pytest.raises(ValueError):
            predict(lost_track(), 0.025, cfg)
        with pytest.raises(ValueError):
            update(lost_track(), (0.0, 0.0), cfg)

    def test_step_rejects_negative_dt(self):
        cfg = KalmanConfig()
        t = reset(lost_track(), det_at(0, 0), cfg)
        with pytest.raises(ValueError):
            step(t, None, -0.025, cfg)

    def test_update_rejects_non_finite(self):
        cfg = KalmanConfig()
        t = reset(lost_track(), det_at(0, 0), cfg)
        with pytest.raises(ValueError):
            update(t, (float("nan"), 0.0), cfg)


class TestNumerics:
    def test_covariance_stays_symmetric(self):
        cfg = KalmanConfig()
        rng = np.random.default_rng(13)
        t = reset(lost_track(), det_at(0, 0), cfg)
        for _ in range(500):
            if rng.random() < 0.2:
                t, _ = step(t, None, 0.025, cfg)
                if t.status is TrackStatus.LOST:
                    t = reset(t, det_at(0, 0), cfg)
            else:
                d = det_at(int(rng.integers(0, 640)), int(rng.integers(0, 480)))
                t, _ = step(t, d, 0.025, cfg)
            assert np.array_equal(t.covariance, t.covariance.T)
            assert np.all(np.linalg.eigvalsh(t.covariance) > -1e-9)

    def test_inputs_never_mutated(self):
        cfg = KalmanConfig()
        t = reset(lost_track(), det_at(10, 10), cfg)
        s0 = t.state.copy()
        p0 = t.covariance.copy()
        step(t, det_at(50, 50), 0.025, cfg)
        np.testing.assert_array_equal(t.state, s0)
        np.testing.assert_array_equal(t.covariance, p0)
