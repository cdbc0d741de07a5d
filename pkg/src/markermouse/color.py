"""RGB to hue/saturation conversion.

Matching runs on hue and saturation only, so detection tolerates
brightness changes. Both channels are stored as 16-bit fixed point
(hue: degrees x 100, saturation: fraction x 10000) so every downstream
score is exact integer arithmetic.
"""

from dataclasses import dataclass

import numpy as np

HUE_SCALE = 100        # quantized units per degree
SAT_SCALE = 10000      # quantized units for saturation 1.0
HUE_MAX = 360 * HUE_SCALE

_DEG_PER_RAD = 180.0 / np.pi


@dataclass
class RgbFrame:
    """One camera frame, 8-bit RGB, row-major."""

    width: int
    height: int
    pixels: np.ndarray  # uint8, shape (height, width, 3)

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"bad frame dims {self.width}x{self.height}")
        px = np.asarray(self.pixels, dtype=np.uint8)
        if px.size != self.width * self.height * 3:
            raise ValueError(
                f"pixel buffer has {px.size} bytes, expected {self.width * self.height * 3}"
            )
        self.pixels = px.reshape(self.height, self.width, 3)

    @classmethod
    def from_bytes(cls, width: int, height: int, data: bytes) -> "RgbFrame":
        return cls(width, height, np.frombuffer(data, dtype=np.uint8).copy())

    def to_bytes(self) -> bytes:
        return self.pixels.tobytes()


@dataclass
class HsFrame:
    """Quantized hue/saturation planes for one frame."""

    width: int
    height: int
    hue: np.ndarray  # uint16, shape (height, width), values < HUE_MAX
    sat: np.ndarray  # uint16, shape (height, width), values <= SAT_SCALE


def rgb_to_hs(frame: RgbFrame) -> HsFrame:
    """Convert an RGB frame to quantized hue/saturation planes.

    Standard HSI formulas: theta = arccos of the normalized RGB
    expression, H = theta if B <= G else 360 - theta,
    S = 1 - 3*min(R,G,B)/(R+G+B). Intensity is never needed downstream
    and is not kept. Achromatic pixels (R=G=B, including black) get
    hue 0, saturation 0.
    """
    px = frame.pixels
    r = px[..., 0].astype(np.float64)
    g = px[..., 1].astype(np.float64)
    b = px[..., 2].astype(np.float64)

    rg = r - g
    rb = r - b
    den = np.sqrt(rg * rg + rb * (g - b))
    achro = den == 0.0  # holds exactly when r == g == b
    den[achro] = 1.0
    arg = (0.5 * (rg + rb)) / den
    np.clip(arg, -1.0, 1.0, out=arg)
    theta = np.arccos(arg)
    theta *= _DEG_PER_RAD
    hue = np.where(b <= g, theta, 360.0 - theta)
    hue[achro] = 0.0

    total = r + g + b
    zero = total == 0.0
    total[zero] = 1.0
    minc = np.minimum(np.minimum(r, g), b)
    sat = 1.0 - 3.0 * minc / total
    sat[zero] = 0.0

    # floor(x + 0.5) everywhere: one fixed rounding rule, no banker's
    # rounding surprises. Hue 360.00 wraps back to 0.
    hue *= HUE_SCALE
    hue += 0.5
    hq = np.floor(hue).astype(np.uint32) % HUE_MAX
    sat *= SAT_SCALE
    sat += 0.5
    sq = np.floor(sat).astype(np.uint16)
    return HsFrame(frame.width, frame.height, hq.astype(np.uint16), sq)


def hs_at(frame: HsFrame, x: int, y: int) -> tuple[int, int]:
    """Quantized (hue, saturation) at pixel (x, y); x is the column."""
    if not (0 <= x < frame.width and 0 <= y < frame.height):
        raise IndexError(f"({x}, {y}) outside {frame.width}x{frame.height} frame")
    return int(frame.hue[y, x]), int(frame.sat[y, x])
