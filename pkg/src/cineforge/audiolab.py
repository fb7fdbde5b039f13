"""PCM audio buffers and the voiceover/music processing chains.

Samples are float64 in [-1, 1], interleaved when stereo. Every public
operation clamps its output into that range. WAV I/O is 16-bit PCM via the
stdlib wave module; int conversion is exact on round trips
(float = int / 32768, int = clamp(floor(float * 32768 + 0.5))).
"""

from __future__ import annotations

import io
import math
import wave
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Literal, TYPE_CHECKING

import numpy as np

from .errors import InvalidInputError

if TYPE_CHECKING:
    from .storyboard import Storyboard

__all__ = [
    "AudioBuffer",
    "MixPlan",
    "silence",
    "normalize_duration",
    "fade",
    "gain_db",
    "mix",
    "prepare_voiceover",
    "prepare_music",
    "build_voiceover",
    "build_music",
    "read_wav",
    "write_wav",
]

DEFAULT_SAMPLE_RATE = 44100
TARGET_DURATION_S = 60.0
VOICEOVER_FADE_MS = 1000
MUSIC_FADE_MS = 2000
MUSIC_GAIN_DB = -10.0

DurationMode = Literal["trim_or_loop", "trim_or_pad"]
_MODES = ("trim_or_loop", "trim_or_pad")

FallbackHook = Callable[[str, str], None]


@dataclass(frozen=True)
class AudioBuffer:
    """Immutable PCM buffer: float64 samples, interleaved channel frames."""

    sample_rate: int
    channels: int
    samples: np.ndarray

    def __post_init__(self):
        if self.sample_rate < 1:
            raise InvalidInputError(f"sample_rate must be >= 1, got {self.sample_rate}")
        if self.channels not in (1, 2):
            raise InvalidInputError(f"channels must be 1 or 2, got {self.channels}")
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim != 1:
            raise InvalidInputError(f"samples must be 1-D, got {arr.ndim}-D")
        if arr.size % self.channels != 0:
            raise InvalidInputError(
                f"{arr.size} samples do not divide into {self.channels} channels")
        if arr.size and not np.all(np.isfinite(arr)):
            raise InvalidInputError("samples must be finite")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)

    @property
    def frames(self) -> int:
        return self.samples.size // self.channels

    @property
    def duration_s(self) -> float:
        return self.frames / self.sample_rate

    def planar(self) -> np.ndarray:
        """Samples as a (frames, channels) view."""
        return self.samples.reshape(self.frames, self.channels)


@dataclass(frozen=True)
class MixPlan:
    """Linear gains applied when mixing voiceover over music."""

    voiceover_gain: float = 1.0
    music_gain: float = 0.3

    def __post_init__(self):
        if self.voiceover_gain < 0 or self.music_gain < 0:
            raise InvalidInputError("mix gains must be >= 0")


def _clamped(rate: int, channels: int, samples: np.ndarray) -> AudioBuffer:
    return AudioBuffer(rate, channels, np.clip(samples, -1.0, 1.0))


def _frames_for(duration_s: float, rate: int) -> int:
    return int(math.floor(duration_s * rate + 0.5))


def silence(duration_s: float, sample_rate: int = DEFAULT_SAMPLE_RATE,
            channels: int = 1) -> AudioBuffer:
    """All-zero buffer of round(duration_s * rate) frames."""
    if duration_s < 0:
        raise InvalidInputError(f"duration_s must be >= 0, got {duration_s}")
    n = _frames_for(duration_s, sample_rate)
    return AudioBuffer(sample_rate, channels, np.zeros(n * channels))


def normalize_duration(buf: AudioBuffer, target_s: float,
                       mode: DurationMode) -> AudioBuffer:
    """Force a buffer to exactly round(target_s * rate) frames.

    Longer sources are truncated. Shorter ones are looped whole
    ("trim_or_loop") or padded with trailing silence ("trim_or_pad").
    Looping an empty buffer is an error; padding an empty buffer yields
    silence.
    """
    if mode not in _MODES:
        raise InvalidInputError(f"mode must be one of {_MODES}, got {mode!r}")
    if target_s < 0:
        raise InvalidInputError(f"target_s must be >= 0, got {target_s}")
    target = _frames_for(target_s, buf.sample_rate)
    cur = buf.frames
    if cur == target:
        return _clamped(buf.sample_rate, buf.channels, buf.samples)
    if cur > target:
        out = buf.planar()[:target].reshape(-1)
    elif mode == "trim_or_loop":
        if cur == 0:
            raise InvalidInputError("cannot loop an empty buffer")
        reps = -(-target // cur)  # ceil
        out = np.tile(buf.planar(), (reps, 1))[:target].reshape(-1)
    else:
        pad = np.zeros((target - cur) * buf.channels)
        out = np.concatenate([buf.samples, pad])
    return _clamped(buf.sample_rate, buf.channels, out)


def fade(buf: AudioBuffer, fade_in_ms: int, fade_out_ms: int) -> AudioBuffer:
    """Linear fade-in / fade-out envelopes applied per frame.

    Fade-in factor at frame k of n_in is k/n_in; fade-out factor at frame j
    of the final n_out is (n_out-1-j)/n_out, so the first and last frames
    are exactly zero. The two windows must fit inside the buffer.
    """
    if fade_in_ms < 0 or fade_out_ms < 0:
        raise InvalidInputError("fade durations must be >= 0")
    n_in = _frames_for(fade_in_ms / 1000.0, buf.sample_rate)
    n_out = _frames_for(fade_out_ms / 1000.0, buf.sample_rate)
    if n_in + n_out > buf.frames:
        raise InvalidInputError(
            f"fade windows ({fade_in_ms}+{fade_out_ms} ms) exceed buffer "
            f"duration {buf.duration_s:.3f} s")
    env = np.ones(buf.frames)
    if n_in:
        env[:n_in] = np.arange(n_in) / n_in
    if n_out:
        env[buf.frames - n_out:] = (n_out - 1 - np.arange(n_out)) / n_out
    out = buf.planar() * env[:, None]
    return _clamped(buf.sample_rate, buf.channels, out.reshape(-1))


def gain_db(buf: AudioBuffer, db: float) -> AudioBuffer:
    """Scale by the linear factor 10^(db/20) and clamp."""
    if not math.isfinite(db):
        raise InvalidInputError(f"db must be finite, got {db}")
    factor = 10.0 ** (db / 20.0)
    return _clamped(buf.sample_rate, buf.channels, buf.samples * factor)


def mix(voiceover: AudioBuffer, music: AudioBuffer,
        plan: MixPlan | None = None) -> AudioBuffer:
    """Sum the two tracks with the plan's gains, clamped to [-1, 1].

    Sample rates and frame counts must match. When channel counts differ
    the mono side is up-mixed to stereo by duplication.
    """
    plan = plan or MixPlan()
    if voiceover.sample_rate != music.sample_rate:
        raise InvalidInputError(
            f"sample rates differ: {voiceover.sample_rate} vs {music.sample_rate}")
    if voiceover.frames != music.frames:
        raise InvalidInputError(
            f"frame counts differ: {voiceover.frames} vs {music.frames}")
    channels = max(voiceover.channels, music.channels)

    def widen(b: AudioBuffer) -> np.ndarray:
        p = b.planar()
        if b.channels == channels:
            return p
        return np.repeat(p, channels, axis=1)

    out = widen(voiceover) * plan.voiceover_gain + widen(music) * plan.music_gain
    return _clamped(voiceover.sample_rate, channels, out.reshape(-1))


def prepare_voiceover(buf: AudioBuffer) -> AudioBuffer:
    """Standard narration conditioning: exactly 60 s (pad/trim) + 1 s fades."""
    out = normalize_duration(buf, TARGET_DURATION_S, "trim_or_pad")
    return fade(out, VOICEOVER_FADE_MS, VOICEOVER_FADE_MS)


def prepare_music(buf: AudioBuffer) -> AudioBuffer:
    """Standard bed conditioning: 60 s (loop/trim), -10 dB, 2 s fades."""
    out = normalize_duration(buf, TARGET_DURATION_S, "trim_or_loop")
    out = gain_db(out, MUSIC_GAIN_DB)
    return fade(out, MUSIC_FADE_MS, MUSIC_FADE_MS)


def build_voiceover(storyboard: "Storyboard", speech, cfg=None,
                    on_fallback: FallbackHook | None = None) -> AudioBuffer:
    """Narration track from a storyboard's scene descriptions.

    Descriptions are joined with ". ", synthesised through the speech
    backend, then conditioned to exactly 60 s with 1 s fades. Synthesis
    failure degrades to 60 s of silence, reporting through on_fallback.
    """
    from .backends import synthesize_speech
    from .errors import CineforgeError

    text = ". ".join(s.description for s in storyboard.scenes)
    try:
        raw = synthesize_speech(speech, text, cfg)
    except CineforgeError as exc:
        if on_fallback:
            on_fallback("voiceover", str(exc))
        return silence(TARGET_DURATION_S, DEFAULT_SAMPLE_RATE, 1)
    return prepare_voiceover(raw)


def build_music(source: AudioBuffer | None,
                on_fallback: FallbackHook | None = None) -> AudioBuffer:
    """Music bed from a source buffer.

    Conditioned to 60 s (looping short sources), attenuated -10 dB, with
    2 s fades. A missing or empty source degrades to 60 s of silence,
    reporting through on_fallback.
    """
    if source is None or source.frames == 0:
        if on_fallback:
            on_fallback("music", "no usable music source; substituting silence")
        return silence(TARGET_DURATION_S, DEFAULT_SAMPLE_RATE, 1)
    return prepare_music(source)


def _float_to_pcm16(samples: np.ndarray) -> np.ndarray:
    ints = np.floor(samples * 32768.0 + 0.5)
    return np.clip(ints, -32768, 32767).astype(np.int16)


def write_wav(buf: AudioBuffer, path: str | Path) -> Path:
    """Write as 16-bit PCM WAV."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with wave.open(str(path), "wb") as w:
        w.setnchannels(buf.channels)
        w.setsampwidth(2)
        w.setframerate(buf.sample_rate)
        w.writeframes(_float_to_pcm16(buf.samples).tobytes())
    return path


def read_wav(source: str | Path | bytes) -> AudioBuffer:
    """Read a 16-bit PCM WAV from a path or raw bytes."""
    if isinstance(source, bytes):
        fh = io.BytesIO(source)
    else:
        fh = open(source, "rb")
    try:
        try:
            with wave.open(fh, "rb") as w:
                width = w.getsampwidth()
                channels = w.getnchannels()
                rate = w.getframerate()
                if width != 2:
                    raise InvalidInputError(
                        f"only 16-bit PCM WAV is supported, got {8 * width}-bit")
                if channels not in (1, 2):
                    raise InvalidInputError(
                        f"only mono/stereo WAV is supported, got {channels} channels")
                raw = w.readframes(w.getnframes())
        except (wave.Error, EOFError) as exc:
            raise InvalidInputError(f"not a valid WAV stream: {exc}") from exc
    finally:
        fh.close()
    ints = np.frombuffer(raw, dtype="<i2").astype(np.float64)
    return AudioBuffer(rate, channels, ints / 32768.0)
