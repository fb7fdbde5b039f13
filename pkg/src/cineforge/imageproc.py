"""Frame buffers and deterministic post-processing.

All pixel arithmetic in this module is pinned: float stages round half up
(floor(x + 0.5)) and clamp to [0, 255]; the sharpen stage is exact integer
math. Running the same inputs through any of these ops yields byte-identical
results on every platform.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidInputError

__all__ = [
    "FrameBuffer",
    "PostProcessConfig",
    "apply_brightness",
    "apply_channel_gain",
    "sharpen",
    "post_process_frames",
    "resize",
    "blank_frame",
]

_CHANNELS = {"r": 0, "g": 1, "b": 2}


@dataclass(frozen=True)
class FrameBuffer:
    """Immutable RGB frame: 8-bit interleaved rows, top to bottom."""

    width: int
    height: int
    pixels: bytes

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise InvalidInputError(
                f"frame dimensions must be positive, got {self.width}x{self.height}")
        expected = self.width * self.height * 3
        if len(self.pixels) != expected:
            raise InvalidInputError(
                f"pixel payload is {len(self.pixels)} bytes, expected {expected} "
                f"for {self.width}x{self.height} RGB")

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "FrameBuffer":
        """Build from an (height, width, 3) uint8 array."""
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise InvalidInputError(f"expected (h, w, 3) array, got shape {arr.shape}")
        if arr.dtype != np.uint8:
            raise InvalidInputError(f"expected uint8 array, got {arr.dtype}")
        h, w = arr.shape[:2]
        return cls(width=w, height=h, pixels=np.ascontiguousarray(arr).tobytes())

    def to_array(self) -> np.ndarray:
        """Return an (height, width, 3) uint8 copy of the pixels."""
        flat = np.frombuffer(self.pixels, dtype=np.uint8)
        return flat.reshape(self.height, self.width, 3).copy()

    def same_shape(self, other: "FrameBuffer") -> bool:
        return self.width == other.width and self.height == other.height


@dataclass(frozen=True)
class PostProcessConfig:
    """Gains and toggles for the standard post-processing chain."""

    brightness_gain: float = 1.1
    blue_gain: float = 1.05
    sharpen_enabled: bool = True

    def __post_init__(self):
        if not (self.brightness_gain > 0):
            raise InvalidInputError(
                f"brightness_gain must be > 0, got {self.brightness_gain}")
        if not (self.blue_gain > 0):
            raise InvalidInputError(f"blue_gain must be > 0, got {self.blue_gain}")


def _round_clamp_u8(arr: np.ndarray) -> np.ndarray:
    """Round half up and clamp to the 8-bit range."""
    return np.clip(np.floor(arr + 0.5), 0.0, 255.0).astype(np.uint8)


def apply_brightness(frame: FrameBuffer, gain: float) -> FrameBuffer:
    """Scale all channels by gain, round half up, clamp to [0, 255]."""
    if not (gain > 0):
        raise InvalidInputError(f"gain must be > 0, got {gain}")
    arr = frame.to_array().astype(np.float64)
    return FrameBuffer.from_array(_round_clamp_u8(arr * gain))


def apply_channel_gain(frame: FrameBuffer, channel: str, gain: float) -> FrameBuffer:
    """Scale a single channel ("r", "g" or "b") by gain; other channels pass through."""
    if channel not in _CHANNELS:
        raise InvalidInputError(f"channel must be one of r/g/b, got {channel!r}")
    if not (gain > 0):
        raise InvalidInputError(f"gain must be > 0, got {gain}")
    arr = frame.to_array()
    idx = _CHANNELS[channel]
    scaled = _round_clamp_u8(arr[:, :, idx].astype(np.float64) * gain)
    out = arr.copy()
    out[:, :, idx] = scaled
    return FrameBuffer.from_array(out)


def sharpen(frame: FrameBuffer) -> FrameBuffer:
    """Apply the fixed 3x3 sharpen kernel (-2 neighbours, 32 centre, /16).

    Edges replicate. Computed entirely in integers: the exact value is
    (32*centre - 2*neighbour_sum + 8) // 16, which equals round-half-up of
    (32c - 2s)/16, then clamped. A uniform frame is a fixed point.
    """
    arr = frame.to_array().astype(np.int32)
    padded = np.pad(arr, ((1, 1), (1, 1), (0, 0)), mode="edge")
    centre = padded[1:-1, 1:-1]
    neigh = (
        padded[:-2, :-2] + padded[:-2, 1:-1] + padded[:-2, 2:]
        + padded[1:-1, :-2] + padded[1:-1, 2:]
        + padded[2:, :-2] + padded[2:, 1:-1] + padded[2:, 2:]
    )
    out = (32 * centre - 2 * neigh + 8) >> 4
    return FrameBuffer.from_array(np.clip(out, 0, 255).astype(np.uint8))


def post_process_frames(frames: Sequence[FrameBuffer],
                        cfg: PostProcessConfig | None = None) -> list[FrameBuffer]:
    """Run the standard chain over a frame list: brightness, blue gain, sharpen.

    Order is fixed. All frames must share dimensions. An empty list maps to
    an empty list. With unit gains and sharpening disabled this is the
    identity.
    """
    cfg = cfg or PostProcessConfig()
    frames = list(frames)
    if not frames:
        return []
    first = frames[0]
    for i, f in enumerate(frames):
        if not first.same_shape(f):
            raise InvalidInputError(
                f"frame {i} is {f.width}x{f.height}, expected "
                f"{first.width}x{first.height}")
    out = []
    for f in frames:
        f = apply_brightness(f, cfg.brightness_gain)
        f = apply_channel_gain(f, "b", cfg.blue_gain)
        if cfg.sharpen_enabled:
            f = sharpen(f)
        out.append(f)
    return out


def _axis_taps(dst: int, src: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Source tap indices and weights for one axis of a bilinear resize.

    Half-pixel-centre convention: src_pos = (dst + 0.5) * src/dst - 0.5,
    clamped to the valid range, so a same-size resize samples exactly on the
    source grid.
    """
    pos = (np.arange(dst, dtype=np.float64) + 0.5) * (src / dst) - 0.5
    pos = np.clip(pos, 0.0, src - 1.0)
    lo = np.floor(pos).astype(np.int64)
    hi = np.minimum(lo + 1, src - 1)
    w = pos - lo
    return lo, hi, w


def resize(frame: FrameBuffer, width: int, height: int) -> FrameBuffer:
    """Bilinearly resample to width x height.

    Same-size resize is byte-identical to the input. Downscaling 2x2 to 1x1
    yields the rounded mean of the four pixels.
    """
    if width < 1 or height < 1:
        raise InvalidInputError(
            f"target dimensions must be positive, got {width}x{height}")
    if width == frame.width and height == frame.height:
        return frame
    arr = frame.to_array().astype(np.float64)
    x_lo, x_hi, wx = _axis_taps(width, frame.width)
    y_lo, y_hi, wy = _axis_taps(height, frame.height)
    rows_lo = arr[y_lo]
    rows_hi = arr[y_hi]
    rows = rows_lo * (1.0 - wy)[:, None, None] + rows_hi * wy[:, None, None]
    cols = rows[:, x_lo] * (1.0 - wx)[None, :, None] + rows[:, x_hi] * wx[None, :, None]
    return FrameBuffer.from_array(_round_clamp_u8(cols))


def blank_frame(width: int, height: int) -> FrameBuffer:
    """All-black frame, the substitute used when a scene fails to render."""
    if width < 1 or height < 1:
        raise InvalidInputError(
            f"frame dimensions must be positive, got {width}x{height}")
    return FrameBuffer(width=width, height=height, pixels=bytes(width * height * 3))
