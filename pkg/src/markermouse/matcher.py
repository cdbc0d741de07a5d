"""Weighted hue/saturation SSD response values, direct and sliding-window.

A response value at (x, y) is the sum over the m x n mask window of
w1*(H - h)^2 + w2*(S - s)^2 against a template's reference (h, s).
Lower is a better match. Everything is exact integer arithmetic on the
quantized planes, so the incremental (slide-by-d) form is bit-equal to
the direct form, not merely close.

Coordinates: x is the column, y is the row, origin top-left. All
modules share this convention.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .color import HUE_MAX, SAT_SCALE, HsFrame


class SlideDirection(Enum):
    LEFT_TO_RIGHT = "left_to_right"
    RIGHT_TO_LEFT = "right_to_left"
    TOP_TO_BOTTOM = "top_to_bottom"
    BOTTOM_TO_TOP = "bottom_to_top"


@dataclass
class MarkerTemplate:
    """Reference color and mask geometry for one marker.

    Weights are expected to stay small (the defaults are 1); response
    values are accumulated in int64.
    """

    color_tag: str                # "red" or "green"
    ref_hue: int                  # quantized, [0, HUE_MAX)
    ref_sat: int                  # quantized, [0, SAT_SCALE]
    mask_width: int = 11          # m, odd
    mask_height: int = 11         # n, odd
    w1: int = 1                   # hue weight
    w2: int = 1                   # saturation weight

    def __post_init__(self):
        if self.color_tag not in ("red", "green"):
            raise ValueError(f"unknown color_tag {self.color_tag!r}")
        m, n = self.mask_width, self.mask_height
        if m < 3 or n < 3 or m % 2 == 0 or n % 2 == 0:
            raise ValueError(f"mask dims must be odd and >= 3, got {m}x{n}")
        if not (0 <= self.ref_hue < HUE_MAX):
            raise ValueError(f"ref_hue {self.ref_hue} outside [0, {HUE_MAX})")
        if not (0 <= self.ref_sat <= SAT_SCALE):
            raise ValueError(f"ref_sat {self.ref_sat} outside [0, {SAT_SCALE}]")
        if self.w1 < 0 or self.w2 < 0 or self.w1 + self.w2 == 0:
            raise ValueError("weights must be nonnegative with w1 + w2 > 0")

    @property
    def half_w(self) -> int:
        return (self.mask_width - 1) // 2

    @property
    def half_h(self) -> int:
        return (self.mask_height - 1) // 2

    def to_dict(self) -> dict:
        return {
            "color_tag": self.color_tag,
            "ref_hue": self.ref_hue,
            "ref_sat": self.ref_sat,
            "mask_width": self.mask_width,
            "mask_height": self.mask_height,
            "w1": self.w1,
            "w2": self.w2,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MarkerTemplate":
        return cls(**d)


@dataclass
class OpCounter:
    """Explicit work accumulator: window positions scored and per-pixel
    term evaluations performed. Passed in, never shared implicitly."""

    positions: int = 0
    terms: int = 0


def _check_window(frame: HsFrame, tpl: MarkerTemplate, x: int, y: int) -> None:
    ha, hb = tpl.half_w, tpl.half_h
    if not (ha <= x < frame.width - ha and hb <= y < frame.height - hb):
        raise IndexError(
            f"{tpl.mask_width}x{tpl.mask_height} window at ({x}, {y}) "
            f"falls outside {frame.width}x{frame.height} frame"
        )


def _term_sum(frame: HsFrame, tpl: MarkerTemplate, rows: slice, cols: slice) -> tuple[int, int]:
    """Evaluate the weighted squared differences over a rectangle.

    Returns (sum, number of per-pixel terms evaluated).
    """
    dh = frame.hue[rows, cols].astype(np.int64) - tpl.ref_hue
    ds = frame.sat[rows, cols].astype(np.int64) - tpl.ref_sat
    total = int((tpl.w1 * dh * dh + tpl.w2 * ds * ds).sum())
    return total, dh.size


def response_direct(
    frame: HsFrame, tpl: MarkerTemplate, x: int, y: int, counter: OpCounter | None = None
) -> int:
    """Response value at (x, y), full window sum."""
    _check_window(frame, tpl, x, y)
    ha, hb = tpl.half_w, tpl.half_h
    value, nterms = _term_sum(
        frame, tpl, slice(y - hb, y + hb + 1), slice(x - ha, x + ha + 1)
    )
    if counter is not None:
        counter.positions += 1
        counter.terms += nterms
    return value


def response_incremental(
    frame: HsFrame,
    tpl: MarkerTemplate,
    prev: int,
    x: int,
    y: int,
    stride: int,
    direction: SlideDirection,
    counter: OpCounter | None = None,
) -> int:
    """Response at (x, y) from the response `prev` at the window one
    step back along `direction` (stride pixels away).

    Adds the entering rows/columns and subtracts the exiting ones;
    bit-equal to response_direct at (x, y).
    """
    ha, hb = tpl.half_w, tpl.half_h
    extent = tpl.mask_width if direction in (
        SlideDirection.LEFT_TO_RIGHT, SlideDirection.RIGHT_TO_LEFT
    ) else tpl.mask_height
    if not (1 <= stride < extent):
        raise ValueError(f"stride {stride} outside [1, {extent - 1}] for {direction.value}")

    d = stride
    if direction is SlideDirection.LEFT_TO_RIGHT:
        x_old, y_old = x - d, y
        rows = slice(y - hb, y + hb + 1)
        enter = (rows, slice(x + ha - d + 1, x + ha + 1))
        leave = (rows, slice(x - ha - d, x - ha))
    elif direction is SlideDirection.RIGHT_TO_LEFT:
        x_old, y_old = x + d, y
        rows = slice(y - hb, y + hb + 1)
        enter = (rows, slice(x - ha, x - ha + d))
        leave = (rows, slice(x + ha + 1, x + ha + d + 1))
    elif direction is SlideDirection.TOP_TO_BOTTOM:
        x_old, y_old = x, y - d
        cols = slice(x - ha, x + ha + 1)
        enter = (slice(y + hb - d + 1, y + hb + 1), cols)
        leave = (slice(y - hb - d, y - hb), cols)
    else:  # BOTTOM_TO_TOP
        x_old, y_old = x, y + d
        cols = slice(x - ha, x + ha + 1)
        enter = (slice(y - hb, y - hb + d), cols)
        leave = (slice(y + hb + 1, y + hb + d + 1), cols)

    _check_window(frame, tpl, x_old, y_old)
    _check_window(frame, tpl, x, y)

    add, n_add = _term_sum(frame, tpl, *enter)
    sub, n_sub = _term_sum(frame, tpl, *leave)
    if counter is not None:
        counter.positions += 1
        counter.terms += n_add + n_sub
    return prev + add - sub


def response_row(
    frame: HsFrame, tpl: MarkerTemplate, y_row: int, stride: int, counter: OpCounter | None = None
) -> list[tuple[int, int]]:
    """All response values along one row: x = ha, ha+stride, ... while
    the window fits. First position is computed directly, the rest by
    the sliding update (or directly again when stride >= mask width,
    where sliding would cost more than recomputing).
    """
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    m, n = tpl.mask_width, tpl.mask_height
    ha, hb = tpl.half_w, tpl.half_h
    if not (hb <= y_row < frame.height - hb):
        raise IndexError(f"row {y_row} has no valid {m}x{n} window")
    if frame.width < m:
        return []

    npos = (frame.width - m) // stride + 1
    if stride >= m or npos == 1:
        return [
            (ha + i * stride, response_direct(frame, tpl, ha + i * stride, y_row, counter))
            for i in range(npos)
        ]

    rows = slice(y_row - hb, y_row + hb + 1)
    first = response_direct(frame, tpl, ha, y_row, counter)

    # Union of all entering columns is [m, m + span) and of all exiting
    # columns is [0, span); each region is evaluated once, which is
    # exactly the 2*stride*n terms per step the update rule costs.
    span = (npos - 1) * stride
    enter_terms, n_enter = _term_sums_by_column(frame, tpl, rows, slice(m, m + span))
    leave_terms, n_leave = _term_sums_by_column(frame, tpl, rows, slice(0, span))
    if counter is not None:
        counter.positions += npos - 1
        counter.terms += n_enter + n_leave

    # rv at position i is the first value plus everything entered so
    # far minus everything left so far
    enter_cum = np.concatenate([[0], np.cumsum(enter_terms)])
    leave_cum = np.concatenate([[0], np.cumsum(leave_terms)])
    off = np.arange(npos) * stride
    rvs = (first + enter_cum[off] - leave_cum[off]).tolist()
    return [(ha + i * stride, rv) for i, rv in enumerate(rvs)]


def _term_sums_by_column(
    frame: HsFrame, tpl: MarkerTemplate, rows: slice, cols: slice
) -> tuple[np.ndarray, int]:
    """Column sums of the weighted squared differences over a band."""
    dh = frame.hue[rows, cols].astype(np.int64) - tpl.ref_hue
    ds = frame.sat[rows, cols].astype(np.int64) - tpl.ref_sat
    terms = tpl.w1 * dh * dh + tpl.w2 * ds * ds
    return terms.sum(axis=0), terms.size


def response_row_direct(
    frame: HsFrame, tpl: MarkerTemplate, y_row: int, stride: int, counter: OpCounter | None = None
) -> list[tuple[int, int]]:
    """Same positions as response_row but every window recomputed in
    full: the O(R*m*n) baseline the benchmarks compare against."""
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    m, n = tpl.mask_width, tpl.mask_height
    ha, hb = tpl.half_w, tpl.half_h
    if not (hb <= y_row < frame.height - hb):
        raise IndexError(f"row {y_row} has no valid {m}x{n} window")
    if frame.width < m:
        return []

    rows = slice(y_row - hb, y_row + hb + 1)
    hwin = sliding_window_view(frame.hue[rows], (n, m))[0, ::stride]
    swin = sliding_window_view(frame.sat[rows], (n, m))[0, ::stride]
    dh = hwin.astype(np.int64) - tpl.ref_hue
    ds = swin.astype(np.int64) - tpl.ref_sat
    vals = (tpl.w1 * dh * dh + tpl.w2 * ds * ds).sum(axis=(1, 2))
    if counter is not None:
        counter.positions += len(vals)
        counter.terms += dh.size
    return [(ha + i * stride, int(v)) for i, v in enumerate(vals)]
