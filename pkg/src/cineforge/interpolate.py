"""Linear frame interpolation between keyframes.

The mapping from output slot j to keyframe space is pinned:

    pos    = j * (K - 1) / (N - 1)        (IEEE-754 double, this exact order)
    left   = floor(pos)
    weight = pos - left

with the boundary normalised so the final slot is (K-1, 0.0) rather than
(K-2, 1.0). Blending rounds half up and clamps. Interpolated frames are
materialised lazily: a 60 s render at 30 fps and 1024x768 would be ~4 GB as
a concrete list.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterator, Sequence, overload

import numpy as np

from .errors import InvalidInputError
from .imageproc import FrameBuffer

__all__ = [
    "Timeline",
    "BlendPosition",
    "target_frame_count",
    "blend_position",
    "blend",
    "interpolate_frames",
]

logger = logging.getLogger(__name__)

MIN_FPS = 15
MAX_FPS = 30
DEFAULT_DURATION_S = 60.0


@dataclass(frozen=True)
class Timeline:
    """Output timing: fixed duration at an integer frame rate."""

    fps: int
    duration_s: float = DEFAULT_DURATION_S

    def __post_init__(self):
        if not isinstance(self.fps, int) or isinstance(self.fps, bool):
            raise InvalidInputError(f"fps must be an integer, got {self.fps!r}")
        if not (MIN_FPS <= self.fps <= MAX_FPS):
            raise InvalidInputError(
                f"fps must be in [{MIN_FPS}, {MAX_FPS}], got {self.fps}")
        if not (self.duration_s > 0):
            raise InvalidInputError(
                f"duration_s must be positive, got {self.duration_s}")

    @property
    def target_frames(self) -> int:
        return target_frame_count(self.duration_s, self.fps)


@dataclass(frozen=True)
class BlendPosition:
    """Resolved source position for one output slot."""

    left_index: int
    weight: float

    def __post_init__(self):
        if self.left_index < 0:
            raise InvalidInputError(f"left_index must be >= 0, got {self.left_index}")
        if not (0.0 <= self.weight < 1.0):
            raise InvalidInputError(f"weight must be in [0, 1), got {self.weight}")


def target_frame_count(duration_s: float, fps: int) -> int:
    """Number of output frames for a duration at fps (round half up)."""
    if not (duration_s > 0):
        raise InvalidInputError(f"duration_s must be positive, got {duration_s}")
    if fps < 1:
        raise InvalidInputError(f"fps must be >= 1, got {fps}")
    return int(math.floor(duration_s * fps + 0.5))


def blend_position(j: int, keyframe_count: int, target_count: int) -> BlendPosition:
    """Map output slot j of target_count onto the keyframe axis.

    Slot 0 lands exactly on keyframe 0 and slot N-1 exactly on keyframe K-1
    (the division j*(K-1)/(N-1) is correctly rounded, so the endpoints are
    exact in double precision).
    """
    if keyframe_count < 2:
        raise InvalidInputError(
            f"need at least 2 keyframes, got {keyframe_count}")
    if target_count < 2:
        raise InvalidInputError(f"need at least 2 output frames, got {target_count}")
    if not (0 <= j < target_count):
        raise InvalidInputError(
            f"slot {j} out of range for {target_count} output frames")
    pos = j * (keyframe_count - 1) / (target_count - 1)
    left = int(math.floor(pos))
    weight = pos - left
    if left >= keyframe_count - 1:
        left = keyframe_count - 1
        weight = 0.0
    return BlendPosition(left_index=left, weight=weight)


def blend(a: FrameBuffer, b: FrameBuffer, weight: float) -> FrameBuffer:
    """Per-pixel linear blend: round-half-up of (1-w)*a + w*b, clamped."""
    if not a.same_shape(b):
        raise InvalidInputError(
            f"cannot blend {a.width}x{a.height} with {b.width}x{b.height}")
    if not (0.0 <= weight <= 1.0):
        raise InvalidInputError(f"weight must be in [0, 1], got {weight}")
    fa = a.to_array().astype(np.float64)
    fb = b.to_array().astype(np.float64)
    mixed = (1.0 - weight) * fa + weight * fb
    out = np.clip(np.floor(mixed + 0.5), 0.0, 255.0).astype(np.uint8)
    return FrameBuffer.from_array(out)


class _LazyBlendSequence(Sequence[FrameBuffer]):
    """Sequence view over the interpolated frames; slots render on access.

    Keyframes are pre-cast to float64 once (the uint8->float64 cast is
    exact, so results are byte-identical to calling blend() on the original
    buffers).
    """

    def __init__(self, keyframes: list[FrameBuffer], target_count: int):
        self._width = keyframes[0].width
        self._height = keyframes[0].height
        self._planes = [kf.to_array().astype(np.float64) for kf in keyframes]
        self._count = target_count

    def __len__(self) -> int:
        return self._count

    def _render(self, j: int) -> FrameBuffer:
        pos = blend_position(j, len(self._planes), self._count)
        left = self._planes[pos.left_index]
        if pos.weight == 0.0:
            mixed = left
        else:
            right = self._planes[pos.left_index + 1]
            mixed = (1.0 - pos.weight) * left + pos.weight * right
        out = np.clip(np.floor(mixed + 0.5), 0.0, 255.0).astype(np.uint8)
        return FrameBuffer.from_array(out)

    @overload
    def __getitem__(self, index: int) -> FrameBuffer: ...

    @overload
    def __getitem__(self, index: slice) -> list[FrameBuffer]: ...

    def __getitem__(self, index):
        if isinstance(index, slice):
            return [self._render(j) for j in range(*index.indices(self._count))]
        j = index
        if j < 0:
            j += self._count
        if not (0 <= j < self._count):
            raise IndexError(f"frame index {index} out of range")
        return self._render(j)

    def __iter__(self) -> Iterator[FrameBuffer]:
        for j in range(self._count):
            yield self._render(j)


def interpolate_frames(keyframes: Sequence[FrameBuffer], target_count: int,
                       fps: int | None = None) -> Sequence[FrameBuffer]:
    """Expand K keyframes into target_count frames by pairwise blending.

    Returns an immutable sequence of length target_count whose j-th element
    equals blend(keyframes[i], keyframes[i+1], w) for (i, w) =
    blend_position(j, K, N). The first and last outputs are byte-identical
    to the first and last keyframes.
    """
    keyframes = list(keyframes)
    if len(keyframes) < 2:
        raise InvalidInputError(f"need at least 2 keyframes, got {len(keyframes)}")
    first = keyframes[0]
    for i, kf in enumerate(keyframes):
        if not first.same_shape(kf):
            raise InvalidInputError(
                f"keyframe {i} is {kf.width}x{kf.height}, expected "
                f"{first.width}x{first.height}")
    if target_count < len(keyframes):
        raise InvalidInputError(
            f"target_count {target_count} is below keyframe count {len(keyframes)}")

    k = len(keyframes)
    positions = np.arange(target_count, dtype=np.float64) * (k - 1) / (target_count - 1)
    lefts = np.minimum(np.floor(positions).astype(np.int64), k - 2)
    # counts per segment, for the log only; the boundary slot belongs to the
    # last segment here even though its blend weight is normalised to zero
    per_segment = {int(i): int(c) for i, c in
                   zip(*np.unique(lefts, return_counts=True))}
    logger.info(
        "interpolate start: keyframes=%d target=%d fps=%s size=%dx%d",
        k, target_count, fps, first.width, first.height)
    seq = _LazyBlendSequence(keyframes, target_count)
    logger.info("interpolate plan: per-segment output counts %s", per_segment)
    return seq
