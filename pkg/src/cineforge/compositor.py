"""Frame-sequence persistence and external MP4 encoding.

Frames land as frame_0001.png .. frame_NNNN.png (1-based, 4-digit). The
encoder is an external ffmpeg-compatible binary (CINEFORGE_ENCODER, default
"ffmpeg") invoked with a pinned argument template. A missing encoder is a
degraded success: the PNG sequence and mixed WAV remain on disk and the
returned artifacts simply lack a video path.
"""

from __future__ import annotations

import logging
import os
import re
import shutil
import subprocess
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from PIL import Image

from .audiolab import AudioBuffer, write_wav
from .errors import EncodeError, InvalidInputError
from .imageproc import FrameBuffer, blank_frame

__all__ = [
    "FrameSequence",
    "RenderArtifacts",
    "FRAME_NAME_TEMPLATE",
    "ENV_ENCODER",
    "blank_frame",
    "write_frame_sequence",
    "read_frame",
    "encode_video",
]

logger = logging.getLogger(__name__)

FRAME_NAME_TEMPLATE = "frame_{:04d}.png"
FRAME_PATTERN_FOR_ENCODER = "frame_%04d.png"
ENV_ENCODER = "CINEFORGE_ENCODER"
DEFAULT_ENCODER = "ffmpeg"
MIXED_AUDIO_NAME = "mixed_audio.wav"

_FRAME_FILE = re.compile(r"^frame_(\d{4,})\.png$")


@dataclass(frozen=True)
class FrameSequence:
    """A written, contiguous PNG frame sequence."""

    directory: Path
    count: int
    fps: int
    width: int
    height: int

    def __post_init__(self):
        if self.count < 1:
            raise InvalidInputError(f"frame count must be >= 1, got {self.count}")
        if self.fps < 1:
            raise InvalidInputError(f"fps must be >= 1, got {self.fps}")

    def frame_path(self, number: int) -> Path:
        """Path of the 1-based frame file."""
        if not (1 <= number <= self.count):
            raise InvalidInputError(
                f"frame {number} out of range 1..{self.count}")
        return self.directory / FRAME_NAME_TEMPLATE.format(number)

    @property
    def duration_s(self) -> float:
        return self.count / self.fps


@dataclass(frozen=True)
class RenderArtifacts:
    """Everything a finished job leaves on disk."""

    video_path: Path | None
    frames: FrameSequence
    audio_path: Path
    log_path: Path


def write_frame_sequence(frames: Sequence[FrameBuffer], directory: str | Path,
                         fps: int, compress_level: int = 1) -> FrameSequence:
    """Write frames as frame_0001.png onward; stale higher-numbered files
    from a previous run are removed so the directory exactly mirrors the
    sequence."""
    directory = Path(directory)
    count = len(frames)
    if count == 0:
        raise InvalidInputError("cannot write an empty frame sequence")
    first = frames[0]
    directory.mkdir(parents=True, exist_ok=True)
    for i, frame in enumerate(frames, start=1):
        if frame.width != first.width or frame.height != first.height:
            raise InvalidInputError(
                f"frame {i} is {frame.width}x{frame.height}, expected "
                f"{first.width}x{first.height}")
        img = Image.frombytes("RGB", (frame.width, frame.height), frame.pixels)
        img.save(directory / FRAME_NAME_TEMPLATE.format(i), "PNG",
                 compress_level=compress_level)
    for entry in directory.iterdir():
        m = _FRAME_FILE.match(entry.name)
        if m and int(m.group(1)) > count:
            entry.unlink()
    return FrameSequence(directory=directory, count=count, fps=fps,
                         width=first.width, height=first.height)


def read_frame(path: str | Path) -> FrameBuffer:
    """Decode a single PNG frame back into a buffer."""
    with Image.open(path) as img:
        rgb = img.convert("RGB")
        return FrameBuffer(width=rgb.width, height=rgb.height,
                           pixels=rgb.tobytes())


def encoder_binary() -> str:
    return os.environ.get(ENV_ENCODER) or DEFAULT_ENCODER


def encode_video(seq: FrameSequence, audio: AudioBuffer, out: str | Path,
                 encoder: str | None = None,
                 log_path: str | Path | None = None) -> RenderArtifacts:
    """Mux the frame sequence and audio into an H.264/AAC MP4.

    The mixed audio is written as WAV next to the target first. The audio
    duration must be within one frame duration of seq.count/fps. When the
    encoder binary cannot be found the call degrades: no MP4, but the
    frames and WAV stay on disk and the artifacts record the absence.
    """
    out = Path(out)
    frame_duration = 1.0 / seq.fps
    if abs(audio.duration_s - seq.duration_s) > frame_duration:
        raise InvalidInputError(
            f"audio runs {audio.duration_s:.3f} s but the sequence runs "
            f"{seq.duration_s:.3f} s; difference exceeds one frame")

    out.parent.mkdir(parents=True, exist_ok=True)
    audio_path = out.parent / MIXED_AUDIO_NAME
    write_wav(audio, audio_path)
    log_path = Path(log_path) if log_path else out.parent / "error_log.txt"

    binary = encoder or encoder_binary()
    resolved = shutil.which(binary)
    if resolved is None:
        logger.warning(
            "encoder %r not found; keeping frame sequence and WAV only", binary)
        return RenderArtifacts(video_path=None, frames=seq,
                               audio_path=audio_path, log_path=log_path)

    if out.exists():
        # the pinned argument template has no overwrite flag
        out.unlink()
    argv = [
        resolved,
        "-framerate", str(seq.fps),
        "-i", str(seq.directory / FRAME_PATTERN_FOR_ENCODER),
        "-i", str(audio_path),
        "-c:v", "libx264",
        "-pix_fmt", "yuv420p",
        "-c:a", "aac",
        "-shortest",
        "-movflags", "+faststart",
        str(out),
    ]
    logger.info("invoking encoder: %s", " ".join(argv))
    proc = subprocess.run(argv, capture_output=True, text=True)
    if proc.returncode != 0:
        tail = proc.stderr[-2000:] if proc.stderr else ""
        raise EncodeError(
            f"encoder exited with status {proc.returncode}",
            exit_code=proc.returncode, stderr_tail=tail)
    return RenderArtifacts(video_path=out, frames=seq,
                           audio_path=audio_path, log_path=log_path)
