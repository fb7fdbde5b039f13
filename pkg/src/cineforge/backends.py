"""Generator backends: capability selection, mock generators, HTTP clients.

Mock backends are pure functions of their inputs (hash-derived, no global
RNG state), so equal inputs give byte-identical outputs across processes
and platforms. HTTP backends speak the documented wire contracts and
surface every failure as a GenerationError the pipeline can degrade on.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import random
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import numpy as np
import requests

from .audiolab import AudioBuffer, read_wav
from .errors import (
    BackendProtocolError,
    GenerationError,
    InvalidInputError,
    MusicFetchError,
    UnknownMoodError,
)
from .imageproc import FrameBuffer, resize

__all__ = [
    "GIB",
    "SUPPORTED_RESOLUTIONS",
    "BackendCapabilities",
    "ImageModelTier",
    "ImageRequest",
    "SpeechConfig",
    "TextGenParams",
    "MoodCatalog",
    "BackendSet",
    "select_image_tier",
    "select_text_device",
    "scene_seed",
    "generate_scene_image",
    "generate_story_text",
    "synthesize_speech",
    "fetch_music",
    "MockImageBackend",
    "MockTextBackend",
    "MockSpeechBackend",
    "HttpImageBackend",
    "HttpTextBackend",
    "HttpSpeechBackend",
    "make_backend_set",
]

GIB = 1 << 30
SEED_MODULUS = 1 << 64

SUPPORTED_RESOLUTIONS = ((720, 480), (768, 512), (1024, 768))
SUPPORTED_STEPS = (20, 30, 50)
GUIDANCE_MIN = 7.0
GUIDANCE_MAX = 8.5
DEFAULT_NEGATIVE_PROMPT = "blurry, distorted, low quality"

ENV_BACKEND = "CINEFORGE_BACKEND"
ENV_BACKEND_URL = "CINEFORGE_BACKEND_URL"

IMAGE_XL_MIN_BYTES = 12 * GIB
TEXT_ACCEL_MIN_BYTES = 2 * GIB

MOCK_SPEECH_RATE = 44100
MOCK_SECONDS_PER_WORD = 0.4


@dataclass(frozen=True)
class BackendCapabilities:
    """What the host offers: accelerator presence and memory budgets."""

    accelerator_present: bool = False
    accelerator_memory_bytes: int = 0
    host_memory_bytes: int = 0

    def __post_init__(self):
        if self.accelerator_memory_bytes < 0 or self.host_memory_bytes < 0:
            raise InvalidInputError("memory sizes must be >= 0")


@dataclass(frozen=True)
class ImageModelTier:
    """Image model family plus the device it should run on."""

    tier: str
    device: str

    def __post_init__(self):
        if self.tier not in ("xl", "base"):
            raise InvalidInputError(f"tier must be xl or base, got {self.tier!r}")
        if self.device not in ("accelerator", "host"):
            raise InvalidInputError(
                f"device must be accelerator or host, got {self.device!r}")
        if self.tier == "xl" and self.device != "accelerator":
            raise InvalidInputError("xl tier requires the accelerator")


@dataclass(frozen=True)
class ImageRequest:
    """One scene-image generation request."""

    visual_prompt: str
    width: int
    height: int
    steps: int
    guidance_scale: float
    seed: int
    negative_prompt: str = DEFAULT_NEGATIVE_PROMPT

    def __post_init__(self):
        if not self.visual_prompt.strip():
            raise InvalidInputError("visual_prompt must not be blank")
        if (self.width, self.height) not in SUPPORTED_RESOLUTIONS:
            raise InvalidInputError(
                f"{self.width}x{self.height} is not a supported resolution "
                f"(supported: {SUPPORTED_RESOLUTIONS})")
        if self.steps not in SUPPORTED_STEPS:
            raise InvalidInputError(
                f"steps must be one of {SUPPORTED_STEPS}, got {self.steps}")
        if not (GUIDANCE_MIN <= self.guidance_scale <= GUIDANCE_MAX):
            raise InvalidInputError(
                f"guidance_scale must be in [{GUIDANCE_MIN}, {GUIDANCE_MAX}], "
                f"got {self.guidance_scale}")
        if not (0 <= self.seed < SEED_MODULUS):
            raise InvalidInputError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class SpeechConfig:
    """Narration synthesis options."""

    language: str = "en"
    slow: bool = False

    def __post_init__(self):
        if not self.language.strip():
            raise InvalidInputError("language must be a non-empty tag")


@dataclass(frozen=True)
class TextGenParams:
    """Sampling parameters forwarded verbatim to text backends."""

    max_new_tokens: int = 800
    temperature: float = 0.8
    top_p: float = 0.9


class ImageBackend(Protocol):
    def generate_image(self, req: ImageRequest) -> FrameBuffer: ...


class TextBackend(Protocol):
    def generate_text(self, instruction: str, params: TextGenParams) -> str: ...


class SpeechBackend(Protocol):
    def synthesize(self, text: str, cfg: SpeechConfig) -> AudioBuffer: ...


def select_image_tier(caps: BackendCapabilities) -> ImageModelTier:
    """Pick the image model tier: xl needs an accelerator with > 12 GiB."""
    if caps.accelerator_present and caps.accelerator_memory_bytes > IMAGE_XL_MIN_BYTES:
        return ImageModelTier("xl", "accelerator")
    if caps.accelerator_present:
        return ImageModelTier("base", "accelerator")
    return ImageModelTier("base", "host")


def select_text_device(caps: BackendCapabilities) -> str:
    """Text generation runs on the accelerator only above 2 GiB (strict)."""
    if caps.accelerator_present and caps.accelerator_memory_bytes > TEXT_ACCEL_MIN_BYTES:
        return "accelerator"
    return "host"


def scene_seed(base: int, scene_index: int) -> int:
    """Per-scene seed: base + 100 * index, wrapping modulo 2^64."""
    if base < 0:
        raise InvalidInputError(f"seed base must be >= 0, got {base}")
    if scene_index < 0:
        raise InvalidInputError(f"scene index must be >= 0, got {scene_index}")
    return (base + 100 * scene_index) % SEED_MODULUS


def _hash_bytes(key: str, n: int) -> np.ndarray:
    """n pseudo-random bytes derived from key via counter-mode blake2b."""
    root = hashlib.blake2b(key.encode("utf-8"), digest_size=32).digest()
    blocks = []
    for counter in range(-(-n // 64)):
        blocks.append(hashlib.blake2b(
            root + counter.to_bytes(4, "little"), digest_size=64).digest())
    return np.frombuffer(b"".join(blocks)[:n], dtype=np.uint8)


_LATTICE = 9  # coarse noise grid edge; upsampled bilinearly to frame size


class MockImageBackend:
    """Seeded value-noise frames with a scene fiducial; no real model.

    The frame is a coarse hash-derived noise lattice upsampled bilinearly
    (smooth, so PNG encoding stays fast), shaded by a vertical gradient,
    with (seed // 100) % 10 + 1 high-contrast tick blocks in the top-left
    corner so adjacent scenes are visually distinguishable and blending is
    verifiable by eye.
    """

    def generate_image(self, req: ImageRequest) -> FrameBuffer:
        key = f"image|{req.seed}|{req.visual_prompt}|{req.width}|{req.height}"
        raw = _hash_bytes(key, _LATTICE * _LATTICE * 3)
        lattice = FrameBuffer.from_array(
            raw.reshape(_LATTICE, _LATTICE, 3).copy())
        base = resize(lattice, req.width, req.height).to_array().astype(np.float64)

        rows = np.arange(req.height, dtype=np.float64)
        gradient = (rows / (req.height - 1)) * 56.0 - 28.0
        shaded = base * 0.78 + 28.0 + gradient[:, None, None]
        arr = np.clip(np.floor(shaded + 0.5), 0.0, 255.0).astype(np.uint8)

        ticks = (req.seed // 100) % 10 + 1
        size = max(4, req.height // 16)
        y0 = 3
        for k in range(ticks):
            x0 = 3 + k * (size + 4)
            if x0 + size + 1 >= req.width or y0 + size + 1 >= req.height:
                break
            arr[y0 - 1:y0 + size + 1, x0 - 1:x0 + size + 1] = 0
            arr[y0:y0 + size, x0:x0 + size] = 255
        return FrameBuffer.from_array(arr)


_INSTRUCTION_PROMPT = re.compile(r"for '(.*)', divided into", re.DOTALL)

_MOCK_CAMERAS = (
    "Wide shot", "Tracking shot", "Close-up", "Aerial view",
    "Slow push-in", "Handheld frame",
)
_MOCK_MOMENTS = (
    "at first light", "under a restless sky", "as shadows lengthen",
    "in driving rain", "after the storm", "at dusk",
)
_MOCK_BEATS = (
    "The world is introduced.",
    "Tension begins to build.",
    "The conflict reaches its peak.",
    "Consequences start to unfold.",
    "The story finds its resolution.",
)
_MOCK_STYLES = (
    "soft volumetric light", "high contrast silhouettes", "storm-lit textures",
    "long shadows", "warm fading glow", "cold blue haze",
)


class MockTextBackend:
    """Deterministic well-formed five-scene storyboard text from a hash."""

    def generate_text(self, instruction: str, params: TextGenParams) -> str:
        subject = "an unnamed scene"
        m = _INSTRUCTION_PROMPT.search(instruction)
        if m and m.group(1).strip():
            subject = m.group(1).strip()
        digest = hashlib.blake2b(
            f"story|{instruction}|{params.max_new_tokens}|{params.temperature}"
            f"|{params.top_p}".encode("utf-8"), digest_size=16).digest()
        rng = random.Random(int.from_bytes(digest, "big"))
        segments = []
        for i in range(1, 6):
            camera = rng.choice(_MOCK_CAMERAS)
            moment = rng.choice(_MOCK_MOMENTS)
            style = rng.choice(_MOCK_STYLES)
            segments.append(
                f"Scene {i}: {camera} of {subject} {moment}. {_MOCK_BEATS[i - 1]}\n"
                f"Prompt: {subject}, {camera.lower()}, {style}")
        return "\n\n".join(segments)


class MockSpeechBackend:
    """Per-word sawtooth tones, 0.4 s per word at 44.1 kHz mono.

    Pure float arithmetic (no libm transcendentals), so samples are exact
    and platform-independent.
    """

    def synthesize(self, text: str, cfg: SpeechConfig) -> AudioBuffer:
        words = text.split()
        if not words:
            raise InvalidInputError("cannot synthesize empty text")
        frames_per_word = int(MOCK_SECONDS_PER_WORD * MOCK_SPEECH_RATE)
        if cfg.slow:
            frames_per_word *= 2
        chunks = []
        t = np.arange(frames_per_word, dtype=np.float64)
        for word in words:
            h = hashlib.blake2b(
                f"speech|{cfg.language}|{word}".encode("utf-8"),
                digest_size=4).digest()
            freq = 120.0 + (int.from_bytes(h, "big") % 16) * 15.0
            phase = t * (freq / MOCK_SPEECH_RATE)
            frac = phase - np.floor(phase)
            chunks.append((2.0 * frac - 1.0) * 0.3)
        return AudioBuffer(MOCK_SPEECH_RATE, 1, np.concatenate(chunks))


_IMAGE_HEADER = struct.Struct("<4sIII")
_IMAGE_MAGIC = b"CFIM"


class HttpImageBackend:
    """Client for a remote image generator (POST {base}/v1/images)."""

    def __init__(self, base_url: str, timeout: float = 120.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout

    def generate_image(self, req: ImageRequest) -> FrameBuffer:
        payload = {
            "prompt": req.visual_prompt,
            "negative_prompt": req.negative_prompt,
            "width": req.width,
            "height": req.height,
            "steps": req.steps,
            "guidance_scale": req.guidance_scale,
            "seed": req.seed,
        }
        try:
            resp = requests.post(f"{self.base_url}/v1/images", json=payload,
                                 timeout=self.timeout)
        except requests.RequestException as exc:
            raise GenerationError(f"image backend unreachable: {exc}",
                                  stage="keyframes") from exc
        if resp.status_code != 200:
            raise BackendProtocolError(
                f"image backend returned HTTP {resp.status_code}",
                stage="keyframes")
        body = resp.content
        if len(body) < _IMAGE_HEADER.size:
            raise BackendProtocolError(
                f"image response truncated at {len(body)} bytes", stage="keyframes")
        magic, width, height, _reserved = _IMAGE_HEADER.unpack_from(body)
        if magic != _IMAGE_MAGIC:
            raise BackendProtocolError(
                f"bad image magic {magic!r}", stage="keyframes")
        pixels = body[_IMAGE_HEADER.size:]
        if len(pixels) != width * height * 3:
            raise BackendProtocolError(
                f"image payload is {len(pixels)} bytes, header claims "
                f"{width}x{height}", stage="keyframes")
        if (width, height) != (req.width, req.height):
            raise BackendProtocolError(
                f"backend produced {width}x{height}, requested "
                f"{req.width}x{req.height}", stage="keyframes")
        return FrameBuffer(width=width, height=height, pixels=pixels)


class HttpTextBackend:
    """Client for a remote story generator (POST {base}/v1/story)."""

    def __init__(self, base_url: str, timeout: float = 120.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout

    def generate_text(self, instruction: str, params: TextGenParams) -> str:
        payload = {
            "instruction": instruction,
            "max_new_tokens": params.max_new_tokens,
            "temperature": params.temperature,
            "top_p": params.top_p,
        }
        try:
            resp = requests.post(f"{self.base_url}/v1/story", json=payload,
                                 timeout=self.timeout)
        except requests.RequestException as exc:
            raise GenerationError(f"text backend unreachable: {exc}",
                                  stage="storyboard") from exc
        if resp.status_code != 200:
            raise BackendProtocolError(
                f"text backend returned HTTP {resp.status_code}", stage="storyboard")
        try:
            doc = resp.json()
        except ValueError as exc:
            raise BackendProtocolError(
                f"text backend sent non-JSON body: {exc}", stage="storyboard") from exc
        text = doc.get("text") if isinstance(doc, dict) else None
        if not isinstance(text, str):
            raise BackendProtocolError(
                "text backend response missing string field 'text'",
                stage="storyboard")
        return text


class HttpSpeechBackend:
    """Client for a remote speech synthesizer (POST {base}/v1/speech)."""

    def __init__(self, base_url: str, timeout: float = 120.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout

    def synthesize(self, text: str, cfg: SpeechConfig) -> AudioBuffer:
        payload = {"text": text, "language": cfg.language, "slow": cfg.slow}
        try:
            resp = requests.post(f"{self.base_url}/v1/speech", json=payload,
                                 timeout=self.timeout)
        except requests.RequestException as exc:
            raise GenerationError(f"speech backend unreachable: {exc}",
                                  stage="voiceover") from exc
        if resp.status_code != 200:
            raise BackendProtocolError(
                f"speech backend returned HTTP {resp.status_code}",
                stage="voiceover")
        try:
            return read_wav(resp.content)
        except InvalidInputError as exc:
            raise BackendProtocolError(
                f"speech backend sent an unreadable WAV: {exc}",
                stage="voiceover") from exc


def generate_scene_image(backend: ImageBackend, req: ImageRequest) -> FrameBuffer:
    """Run one image request; any backend failure becomes a GenerationError."""
    try:
        frame = backend.generate_image(req)
    except GenerationError:
        raise
    except Exception as exc:
        raise GenerationError(f"image backend failed: {exc}",
                              stage="keyframes") from exc
    if frame.width != req.width or frame.height != req.height:
        raise GenerationError(
            f"backend produced {frame.width}x{frame.height}, requested "
            f"{req.width}x{req.height}", stage="keyframes")
    return frame


def generate_story_text(backend: TextBackend, instruction: str,
                        params: TextGenParams | None = None) -> str:
    """Run one story-text request; failures become GenerationErrors."""
    if not instruction.strip():
        raise InvalidInputError("instruction must not be blank")
    params = params or TextGenParams()
    try:
        return backend.generate_text(instruction, params)
    except GenerationError:
        raise
    except Exception as exc:
        raise GenerationError(f"text backend failed: {exc}",
                              stage="storyboard") from exc


def synthesize_speech(backend: SpeechBackend, text: str,
                      cfg: SpeechConfig | None = None) -> AudioBuffer:
    """Synthesize narration; failures become GenerationErrors."""
    if not text.strip():
        raise InvalidInputError("cannot synthesize empty text")
    cfg = cfg or SpeechConfig()
    try:
        buf = backend.synthesize(text, cfg)
    except (GenerationError, InvalidInputError):
        raise
    except Exception as exc:
        raise GenerationError(f"speech backend failed: {exc}",
                              stage="voiceover") from exc
    if buf.channels != 1:
        raise GenerationError("speech backends must return mono audio",
                              stage="voiceover")
    return buf


@dataclass
class MoodCatalog:
    """Mood name to track reference; each entry is {"path": …} or {"url": …}."""

    entries: dict[str, dict[str, str]] = field(default_factory=dict)

    def __post_init__(self):
        for mood, ref in self.entries.items():
            if not isinstance(ref, dict) or len(ref) != 1 or \
                    next(iter(ref)) not in ("path", "url"):
                raise InvalidInputError(
                    f"catalog entry for {mood!r} must map to exactly one of "
                    f"'path' or 'url'")

    @classmethod
    def default(cls) -> "MoodCatalog":
        """Catalog over the bundled fixture tracks."""
        from importlib import resources

        root = resources.files("cineforge") / "fixtures" / "music"
        return cls(entries={
            mood: {"path": str(root / f"{mood}.wav")}
            for mood in ("cinematic", "epic", "suspense")
        })

    @classmethod
    def from_json(cls, path: str | Path) -> "MoodCatalog":
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        if not isinstance(doc, dict):
            raise InvalidInputError("catalog file must be a JSON object")
        return cls(entries=doc)

    def moods(self) -> list[str]:
        return sorted(self.entries)


def fetch_music(catalog: MoodCatalog, mood: str,
                timeout: float = 60.0) -> AudioBuffer:
    """Load the catalog track for a mood (local path or remote URL)."""
    if mood not in catalog.entries:
        raise UnknownMoodError(
            f"unknown mood {mood!r}; catalog has {catalog.moods()}")
    ref = catalog.entries[mood]
    if "path" in ref:
        try:
            return read_wav(ref["path"])
        except (OSError, InvalidInputError) as exc:
            raise MusicFetchError(
                f"could not load music for {mood!r} from {ref['path']}: {exc}"
            ) from exc
    url = ref["url"]
    try:
        resp = requests.get(url, timeout=timeout)
    except requests.RequestException as exc:
        raise MusicFetchError(
            f"could not fetch music for {mood!r} from {url}: {exc}") from exc
    if resp.status_code != 200:
        raise MusicFetchError(
            f"music fetch for {mood!r} returned HTTP {resp.status_code}")
    try:
        return read_wav(resp.content)
    except InvalidInputError as exc:
        raise MusicFetchError(
            f"music for {mood!r} is not a readable WAV: {exc}") from exc


@dataclass
class BackendSet:
    """The three generators plus the music catalog a job renders with."""

    image: ImageBackend
    text: TextBackend
    speech: SpeechBackend
    music_catalog: MoodCatalog = field(default_factory=MoodCatalog.default)
    name: str = "mock"


def make_backend_set(kind: str | None = None, base_url: str | None = None,
                     catalog: MoodCatalog | None = None) -> BackendSet:
    """Build a backend set; defaults honour CINEFORGE_BACKEND[_URL]."""
    kind = (kind or os.environ.get(ENV_BACKEND) or "mock").strip().lower()
    catalog = catalog or MoodCatalog.default()
    if kind == "mock":
        return BackendSet(
            image=MockImageBackend(), text=MockTextBackend(),
            speech=MockSpeechBackend(), music_catalog=catalog, name="mock")
    if kind == "http":
        base = base_url or os.environ.get(ENV_BACKEND_URL)
        if not base:
            raise InvalidInputError(
                f"http backend requires a base URL ({ENV_BACKEND_URL} or --backend-url)")
        return BackendSet(
            image=HttpImageBackend(base), text=HttpTextBackend(base),
            speech=HttpSpeechBackend(base), music_catalog=catalog, name="http")
    raise InvalidInputError(f"backend must be 'mock' or 'http', got {kind!r}")
