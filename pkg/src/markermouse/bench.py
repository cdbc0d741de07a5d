"""Deterministic benchmarks for the matching and scanning strategies.

Counts are the contract here: term evaluations follow closed-form
models and are asserted exactly, while wall times are reported for
information only since they vary with hardware.
"""

import time
from dataclasses import replace

import numpy as np

from .color import HsFrame, rgb_to_hs
from .detector import detect
from .matcher import HUE_MAX, MarkerTemplate, OpCounter, response_row, response_row_direct
from .pipeline import Engine, default_config
from .synth import SceneScript, TrackSpec, synth_sequence

SAT_MAX = 10000


def random_hs_frame(width: int, height: int, seed: int) -> HsFrame:
    rng = np.random.default_rng(seed)
    hue = rng.integers(0, HUE_MAX, size=(height, width), dtype=np.uint16)
    sat = rng.integers(0, SAT_MAX + 1, size=(height, width), dtype=np.uint16)
    return HsFrame(width=width, height=height, hue=hue, sat=sat)


def row_sweep_model_terms(
    frame_dims: tuple[int, int], mask_dims: tuple[int, int], stride: int
) -> tuple[int, int, int, int]:
    """Closed-form counts for a full-frame row sweep.

    Returns (rows, positions_per_row, incremental_terms, direct_terms).
    Per row the incremental kernel pays the full mask once and then
    2 * stride * mask_height terms per slide; the direct kernel pays
    the full mask at every position.
    """
    w, h = frame_dims
    m, n = mask_dims
    rows = len(range(n // 2, h - n // 2, stride))
    per_row = len(range(m // 2, w - m // 2, stride))
    inc = rows * (m * n + (per_row - 1) * 2 * stride * n)
    direct = rows * per_row * m * n
    return rows, per_row, inc, direct


def bench_matcher(
    frame_dims: tuple[int, int] = (640, 480),
    mask_dims: tuple[int, int] = (11, 11),
    stride: int = 1,
    repetitions: int = 1,
    seed: int = 0,
) -> dict:
    """Full-frame row sweep with both kernels: assert equal responses
    and exact term counts, report wall time."""
    w, h = frame_dims
    m, n = mask_dims
    frame = random_hs_frame(w, h, seed)
    tpl = MarkerTemplate(color_tag="red", ref_hue=9000, ref_sat=5000, mask_width=m, mask_height=n)

    rows, per_row, model_inc, model_direct = row_sweep_model_terms(frame_dims, mask_dims, stride)
    ys = range(n // 2, h - n // 2, stride)

    inc_counter = OpCounter()
    t0 = time.perf_counter()
    for _ in range(repetitions):
        inc_rows = [response_row(frame, tpl, y, stride, counter=inc_counter) for y in ys]
    inc_seconds = (time.perf_counter() - t0) / repetitions

    direct_counter = OpCounter()
    t0 = time.perf_counter()
    for _ in range(repetitions):
        direct_rows = [response_row_direct(frame, tpl, y, stride, counter=direct_counter) for y in ys]
    direct_seconds = (time.perf_counter() - t0) / repetitions

    if inc_rows != direct_rows:
        raise AssertionError("incremental and direct row sweeps disagree")
    measured_inc = inc_counter.terms // repetitions
    measured_direct = direct_counter.terms // repetitions
    if measured_inc != model_inc:
        raise AssertionError(f"incremental terms {measured_inc} != model {model_inc}")
    if measured_direct != model_direct:
        raise AssertionError(f"direct terms {measured_direct} != model {model_direct}")

    return {
        "frame": f"{w}x{h}",
        "mask": f"{m}x{n}",
        "stride": stride,
        "rows": rows,
        "positions": rows * per_row,
        "incremental_terms": measured_inc,
        "model_terms": model_inc,
        "direct_terms": measured_direct,
        "terms_ratio": measured_inc / measured_direct,
        "incremental_seconds": inc_seconds,
        "direct_seconds": direct_seconds,
        "outputs_equal": True,
    }


HIDE_FRAME = 6


def reacquire_script(
    offset: tuple[int, int] = (12, 16),
    center: tuple[int, int] = (320, 240),
    fps: float = 40.0,
    frames: int = 20,
) -> SceneScript:
    """Standard scenario: a settled marker vanishes for one frame and
    reappears displaced by the given offset."""
    cx, cy = center
    t_hide = HIDE_FRAME / fps
    t_back = (HIDE_FRAME + 1) / fps
    return SceneScript(
        duration=frames / fps,
        fps=fps,
        tracks=[
            TrackSpec(
                color="red",
                waypoints=[
                    (0.0, cx, cy),
                    (t_hide, cx, cy),
                    (t_back, cx + offset[0], cy + offset[1]),
                ],
                hidden=[(t_hide, t_back)],
            )
        ],
    )


def bench_reacquire(
    offset: tuple[int, int] = (12, 16),
    search_window_half: int = 48,
    stride: int = 4,
    seed: int = 0,
    frames: int = 20,
) -> dict:
    """Run the scenario and compare scanning effort on reacquisition.

    The headline numbers are the positions evaluated on the frame that
    regained the marker versus a from-scratch raster scan of that same
    frame. When the comeback offset is outside the search window the
    marker is only regained after the track is lost, so the cumulative
    count across the missed frames documents the cost of the failed
    window searches."""
    script = reacquire_script(offset, frames=frames)
    cfg = default_config()
    cfg = replace(
        cfg, detector=replace(cfg.detector, search_window_half=search_window_half, stride=stride)
    )
    engine = Engine(cfg)

    reports = []
    rendered = []
    for sf in synth_sequence(script, seed):
        reports.append(engine.process_frame(sf.frame, sf.timestamp))
        rendered.append(sf.frame)

    comeback = HIDE_FRAME + 1
    regained = next(
        (i for i in range(comeback, len(reports)) if reports[i].red.detection is not None), None
    )
    if regained is None:
        raise AssertionError("marker never reacquired; scenario too short")

    raster_counter = OpCounter()
    det = detect(
        rgb_to_hs(rendered[regained]), cfg.red_template, cfg.detector,
        prev=None, counter=raster_counter,
    )
    if det is None:
        raise AssertionError("raster baseline failed to find the marker")
    raster_positions = raster_counter.positions

    hit = reports[regained].red
    cumulative = sum(r.red.positions_evaluated for r in reports[HIDE_FRAME : regained + 1])
    return {
        "offset_px": float(np.hypot(*offset)),
        "search_window_half": search_window_half,
        "stride": stride,
        "scan_used": hit.scan,
        "reacquired_frame": regained,
        "frames_to_reacquire": regained - comeback,
        "hit_positions": hit.positions_evaluated,
        "raster_positions": raster_positions,
        "ratio": hit.positions_evaluated / raster_positions,
        "reduction_pct": 100.0 * (1.0 - hit.positions_evaluated / raster_positions),
        "miss_plus_hit_positions": cumulative,
    }
