"""Job orchestration: storyboard, keyframes, interpolation, audio, compositing.

Every generation failure degrades to a predefined substitute (rule-based
storyboard, blank keyframe, silence, or video-less artifacts) and lands in
the job's fallback ledger plus error_log.txt. Only unrecoverable I/O marks
a job failed. A finished job always carries exactly fps*60 frames and 60 s
of mixed audio.
"""

from __future__ import annotations

import logging
import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Mapping

from . import audiolab, backends as backends_mod, compositor, storyboard as storyboard_mod
from .audiolab import DEFAULT_SAMPLE_RATE, MixPlan, silence
from .backends import (
    BackendCapabilities,
    BackendSet,
    ImageRequest,
    SpeechConfig,
    scene_seed,
)
from .errors import (
    CineforgeError,
    ConfigValidationError,
    EncodeError,
    InvalidInputError,
)
from .imageproc import FrameBuffer, PostProcessConfig, blank_frame, post_process_frames
from .interpolate import interpolate_frames, target_frame_count
from .storyboard import (
    DEFAULT_VOCAB,
    Storyboard,
    build_generation_instruction,
    parse_custom_storyboard,
    parse_generated_storyboard,
    serialize_storyboard,
)

__all__ = [
    "QualityProfile",
    "QUALITY_PROFILES",
    "RESOLUTIONS",
    "RenderConfig",
    "FallbackRecord",
    "Job",
    "JOB_STATES",
    "validate_config",
    "run_job",
    "incident_log",
]

logger = logging.getLogger(__name__)

JOB_STATES = ("queued", "storyboard", "keyframes", "interpolating", "audio",
              "compositing", "done", "failed")

RESOLUTIONS = {
    f"{w}x{h}": (w, h) for w, h in backends_mod.SUPPORTED_RESOLUTIONS
}

DEFAULT_RESOLUTION = "768x512"
DEFAULT_FPS = 24
DEFAULT_QUALITY = "high"
DEFAULT_MOOD = "cinematic"
TOTAL_DURATION_S = 60.0
MAX_CONCURRENT_SCENES = 5

ERROR_LOG_NAME = "error_log.txt"

_ADVANCED_ONLY = ("custom_storyboard", "voiceover_upload", "music_upload")


@dataclass(frozen=True)
class QualityProfile:
    """Diffusion sampling knobs for one quality tier."""

    steps: int
    guidance_scale: float

    def __post_init__(self):
        if self.steps not in backends_mod.SUPPORTED_STEPS:
            raise InvalidInputError(
                f"steps must be one of {backends_mod.SUPPORTED_STEPS}, "
                f"got {self.steps}")
        if not (backends_mod.GUIDANCE_MIN <= self.guidance_scale
                <= backends_mod.GUIDANCE_MAX):
            raise InvalidInputError(
                f"guidance_scale out of range: {self.guidance_scale}")


QUALITY_PROFILES = {
    "medium": QualityProfile(steps=20, guidance_scale=7.0),
    "high": QualityProfile(steps=30, guidance_scale=7.5),
    "ultra": QualityProfile(steps=50, guidance_scale=8.5),
}


@dataclass(frozen=True)
class RenderConfig:
    """Validated job parameters."""

    prompt: str
    mode: str = "simple"
    resolution: str = DEFAULT_RESOLUTION
    fps: int = DEFAULT_FPS
    quality: str = DEFAULT_QUALITY
    mood: str = DEFAULT_MOOD
    seed_base: int | None = None
    custom_storyboard: str | None = None
    voiceover_upload: Path | None = None
    music_upload: Path | None = None

    def __post_init__(self):
        if not self.prompt.strip():
            raise ConfigValidationError("prompt", "must be non-empty text")
        if self.mode not in ("simple", "advanced"):
            raise ConfigValidationError("mode", f"got {self.mode!r}",
                                        allowed=("simple", "advanced"))
        if self.resolution not in RESOLUTIONS:
            raise ConfigValidationError("resolution", f"got {self.resolution!r}",
                                        allowed=tuple(RESOLUTIONS))
        if not isinstance(self.fps, int) or isinstance(self.fps, bool) or \
                not (15 <= self.fps <= 30):
            raise ConfigValidationError("fps", f"got {self.fps!r}",
                                        allowed=("integers 15..30",))
        if self.quality not in QUALITY_PROFILES:
            raise ConfigValidationError("quality", f"got {self.quality!r}",
                                        allowed=tuple(QUALITY_PROFILES))
        if not self.mood.strip():
            raise ConfigValidationError("mood", "must be non-empty text")
        if self.seed_base is not None and (
                not isinstance(self.seed_base, int)
                or isinstance(self.seed_base, bool) or self.seed_base < 0):
            raise ConfigValidationError(
                "seed_base", f"must be a non-negative integer, got {self.seed_base!r}")

    @property
    def size(self) -> tuple[int, int]:
        return RESOLUTIONS[self.resolution]


@dataclass(frozen=True)
class FallbackRecord:
    """One degraded substitution: which stage, why, when."""

    stage: str
    reason: str
    timestamp: str

    def as_dict(self) -> dict[str, str]:
        return {"stage": self.stage, "reason": self.reason,
                "timestamp": self.timestamp}


class Job:
    """Mutable progress/fallback state for one render.

    Mutation is single-writer (the runner thread); other threads observe
    through snapshot(), which copies under the lock. States only move
    forward through JOB_STATES, and progress never decreases.
    """

    def __init__(self, job_id: str | None = None):
        self.id = job_id or uuid.uuid4().hex[:12]
        self.state = "queued"
        self.progress = 0.0
        self.fallbacks: list[FallbackRecord] = []
        self.artifacts: compositor.RenderArtifacts | None = None
        self.storyboard: Storyboard | None = None
        self.error: str | None = None
        self.workdir: Path | None = None
        self._flushed = 0
        self._lock = threading.Lock()

    def set_state(self, state: str, progress: float | None = None) -> None:
        with self._lock:
            if state not in JOB_STATES:
                raise InvalidInputError(f"unknown job state {state!r}")
            if state != "failed" and JOB_STATES.index(state) < JOB_STATES.index(self.state):
                raise InvalidInputError(
                    f"job state cannot move back from {self.state} to {state}")
            self.state = state
            if progress is not None:
                self.progress = max(self.progress, min(1.0, progress))

    def bump_progress(self, progress: float) -> None:
        with self._lock:
            self.progress = max(self.progress, min(1.0, progress))

    def record_fallback(self, stage: str, reason: str) -> FallbackRecord:
        rec = FallbackRecord(
            stage=stage, reason=reason,
            timestamp=datetime.now(timezone.utc).isoformat())
        with self._lock:
            self.fallbacks.append(rec)
        incident_log(self)
        return rec

    def fail(self, reason: str) -> None:
        with self._lock:
            self.state = "failed"
            self.error = reason

    def has_stage_fallback(self, stage: str) -> bool:
        with self._lock:
            return any(r.stage == stage for r in self.fallbacks)

    def snapshot(self) -> dict[str, Any]:
        with self._lock:
            artifacts = None
            if self.artifacts is not None:
                artifacts = {
                    "video_available": self.artifacts.video_path is not None,
                    "frame_count": self.artifacts.frames.count,
                    "fps": self.artifacts.frames.fps,
                    "width": self.artifacts.frames.width,
                    "height": self.artifacts.frames.height,
                }
            return {
                "id": self.id,
                "state": self.state,
                "progress": self.progress,
                "fallbacks": [r.as_dict() for r in self.fallbacks],
                "error": self.error,
                "storyboard_available": self.storyboard is not None,
                "artifacts": artifacts,
            }


def incident_log(job: Job) -> Path | None:
    """Append unflushed fallback records to error_log.txt (best effort).

    Line format: `<iso-timestamp> <stage> <reason>`. A clean job never
    creates the file.
    """
    if job.workdir is None:
        return None
    path = Path(job.workdir) / ERROR_LOG_NAME
    with job._lock:
        pending = job.fallbacks[job._flushed:]
        if not pending:
            return path
        try:
            with open(path, "a", encoding="utf-8") as fh:
                for rec in pending:
                    fh.write(f"{rec.timestamp} {rec.stage} {rec.reason}\n")
            job._flushed = len(job.fallbacks)
        except OSError:
            pass  # logging must never take the job down
    return path


def _coerce_fps(value: Any) -> Any:
    if isinstance(value, float) and value.is_integer():
        return int(value)
    return value


_KNOWN_KEYS = {
    "prompt", "mode", "resolution", "fps", "quality", "mood", "seed_base",
    "custom_storyboard", "voiceover_upload", "music_upload",
}


def validate_config(raw: Mapping[str, Any]) -> RenderConfig:
    """Check a raw key-value map and apply defaults.

    Raises ConfigValidationError naming the offending field; advanced-only
    fields (custom storyboard, uploads) are rejected in simple mode.
    """
    for key in raw:
        if key not in _KNOWN_KEYS:
            raise ConfigValidationError(key, "unknown configuration field",
                                        allowed=tuple(sorted(_KNOWN_KEYS)))
    prompt = raw.get("prompt")
    if not isinstance(prompt, str) or not prompt.strip():
        raise ConfigValidationError("prompt", "must be non-empty text")

    mode = raw.get("mode", "simple")
    if mode not in ("simple", "advanced"):
        raise ConfigValidationError("mode", f"got {mode!r}",
                                    allowed=("simple", "advanced"))
    if mode == "simple":
        for field_name in _ADVANCED_ONLY:
            if raw.get(field_name) not in (None, ""):
                raise ConfigValidationError(
                    field_name, "only allowed in advanced mode")

    fps = _coerce_fps(raw.get("fps", DEFAULT_FPS))
    custom = raw.get("custom_storyboard") or None
    if custom is not None and not isinstance(custom, str):
        raise ConfigValidationError("custom_storyboard", "must be text")
    if custom is not None and not custom.strip():
        custom = None

    def _path_or_none(key: str) -> Path | None:
        value = raw.get(key) or None
        if value is None:
            return None
        if not isinstance(value, (str, Path)):
            raise ConfigValidationError(key, "must be a file path")
        return Path(value)

    seed_base = raw.get("seed_base")
    if isinstance(seed_base, float) and seed_base.is_integer():
        seed_base = int(seed_base)

    return RenderConfig(
        prompt=prompt,
        mode=mode,
        resolution=raw.get("resolution", DEFAULT_RESOLUTION),
        fps=fps,
        quality=raw.get("quality", DEFAULT_QUALITY),
        mood=raw.get("mood", DEFAULT_MOOD),
        seed_base=seed_base,
        custom_storyboard=custom,
        voiceover_upload=_path_or_none("voiceover_upload"),
        music_upload=_path_or_none("music_upload"),
    )


def _stage_storyboard(job: Job, cfg: RenderConfig, backends: BackendSet) -> Storyboard:
    if cfg.custom_storyboard is not None:
        sb = parse_custom_storyboard(cfg.custom_storyboard, cfg.prompt,
                                     format_hint="auto", vocab=DEFAULT_VOCAB)
        if sb.origin == "fallback":
            job.record_fallback(
                "storyboard", "custom storyboard unusable; rule-based fallback applied")
        return sb
    instruction = build_generation_instruction(cfg.prompt)
    try:
        raw = backends_mod.generate_story_text(backends.text, instruction)
    except CineforgeError as exc:
        job.record_fallback("storyboard", f"text backend failed: {exc}")
        return storyboard_mod.fallback_storyboard(cfg.prompt)
    sb = parse_generated_storyboard(raw, cfg.prompt, vocab=DEFAULT_VOCAB)
    if sb.origin == "fallback":
        job.record_fallback(
            "storyboard", "generated text unusable; rule-based fallback applied")
    return sb


def _stage_keyframes(job: Job, cfg: RenderConfig, backends: BackendSet,
                     sb: Storyboard, seed_base: int) -> list[FrameBuffer]:
    width, height = cfg.size
    profile = QUALITY_PROFILES[cfg.quality]
    requests = []
    for i, scene in enumerate(sb.scenes):
        requests.append(ImageRequest(
            visual_prompt=scene.visual_prompt,
            width=width, height=height,
            steps=profile.steps,
            guidance_scale=profile.guidance_scale,
            seed=scene_seed(seed_base, i),
        ))
    frames: list[FrameBuffer | None] = [None] * len(requests)
    done = 0
    with ThreadPoolExecutor(max_workers=MAX_CONCURRENT_SCENES) as pool:
        futures = {
            pool.submit(backends_mod.generate_scene_image, backends.image, req): i
            for i, req in enumerate(requests)
        }
        for fut in as_completed(futures):
            i = futures[fut]
            try:
                frames[i] = fut.result()
            except CineforgeError as exc:
                job.record_fallback("keyframes", f"scene {i + 1}: {exc}")
                frames[i] = blank_frame(width, height)
            done += 1
            job.bump_progress(0.10 + 0.07 * done)
    return frames  # every slot filled: either a result or a blank substitute


def _load_upload(path: Path) -> audiolab.AudioBuffer:
    return audiolab.read_wav(path)


def _stage_audio(job: Job, cfg: RenderConfig, backends: BackendSet,
                 sb: Storyboard) -> audiolab.AudioBuffer:
    if cfg.voiceover_upload is not None:
        try:
            voiceover = audiolab.prepare_voiceover(_load_upload(cfg.voiceover_upload))
        except (OSError, InvalidInputError) as exc:
            job.record_fallback("voiceover", f"voiceover upload unusable: {exc}")
            voiceover = silence(TOTAL_DURATION_S, DEFAULT_SAMPLE_RATE, 1)
    else:
        voiceover = audiolab.build_voiceover(
            sb, backends.speech, SpeechConfig(),
            on_fallback=job.record_fallback)

    music: audiolab.AudioBuffer
    if cfg.music_upload is not None:
        try:
            music = audiolab.prepare_music(_load_upload(cfg.music_upload))
        except (OSError, InvalidInputError) as exc:
            job.record_fallback("music", f"music upload unusable: {exc}")
            music = silence(TOTAL_DURATION_S, DEFAULT_SAMPLE_RATE, 1)
    else:
        try:
            source = backends_mod.fetch_music(backends.music_catalog, cfg.mood)
        except CineforgeError as exc:
            job.record_fallback("music", str(exc))
            source = None
        if source is None:
            music = silence(TOTAL_DURATION_S, DEFAULT_SAMPLE_RATE, 1)
        else:
            music = audiolab.build_music(source, on_fallback=job.record_fallback)

    if music.sample_rate != voiceover.sample_rate:
        job.record_fallback(
            "music",
            f"music sample rate {music.sample_rate} does not match narration "
            f"rate {voiceover.sample_rate}; substituting silence")
        music = silence(TOTAL_DURATION_S, voiceover.sample_rate,
                        voiceover.channels)
    return audiolab.mix(voiceover, music, MixPlan())


def run_job(cfg: RenderConfig, backends: BackendSet,
            caps: BackendCapabilities | None = None,
            workdir: str | Path = ".",
            out: str | Path | None = None,
            job: Job | None = None) -> Job:
    """Execute the full render flow; always returns a terminal job.

    Generation failures degrade per stage (fallback records, incident log);
    only unrecoverable I/O or internal faults yield state=failed.
    """
    caps = caps or BackendCapabilities()
    job = job or Job()
    workdir = Path(workdir)
    job.workdir = workdir
    tier = backends_mod.select_image_tier(caps)
    logger.info("job %s: image tier %s on %s, text on %s", job.id, tier.tier,
                tier.device, backends_mod.select_text_device(caps))
    try:
        workdir.mkdir(parents=True, exist_ok=True)

        job.set_state("storyboard", 0.02)
        sb = _stage_storyboard(job, cfg, backends)
        job.storyboard = sb
        job.bump_progress(0.10)

        job.set_state("keyframes", 0.10)
        seed_base = cfg.seed_base if cfg.seed_base is not None \
            else int(time.time()) % backends_mod.SEED_MODULUS
        keyframes = _stage_keyframes(job, cfg, backends, sb, seed_base)
        keyframes = post_process_frames(keyframes, PostProcessConfig())
        job.bump_progress(0.45)

        job.set_state("interpolating", 0.45)
        total = target_frame_count(TOTAL_DURATION_S, cfg.fps)
        timeline = interpolate_frames(keyframes, total, fps=cfg.fps)
        job.bump_progress(0.70)

        job.set_state("audio", 0.70)
        mixed = _stage_audio(job, cfg, backends, sb)
        job.bump_progress(0.85)

        job.set_state("compositing", 0.85)
        out_path = Path(out) if out is not None \
            else workdir / "outputs" / "final_video.mp4"
        frames_dir = workdir / "temp" / "frames"
        seq = compositor.write_frame_sequence(timeline, frames_dir, cfg.fps)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        (out_path.parent / "storyboard.json").write_text(
            serialize_storyboard(sb), encoding="utf-8")
        log_path = workdir / ERROR_LOG_NAME
        try:
            artifacts = compositor.encode_video(seq, mixed, out_path,
                                                log_path=log_path)
        except EncodeError as exc:
            job.record_fallback(
                "compositing",
                f"encoder failed (exit {exc.exit_code}); kept frames and audio")
            artifacts = compositor.RenderArtifacts(
                video_path=None, frames=seq,
                audio_path=out_path.parent / compositor.MIXED_AUDIO_NAME,
                log_path=log_path)
        if artifacts.video_path is None and not job.has_stage_fallback("compositing"):
            job.record_fallback(
                "compositing",
                f"encoder {compositor.encoder_binary()!r} unavailable; "
                f"kept frames and audio")
        job.artifacts = artifacts
        job.set_state("done", 1.0)
    except Exception as exc:  # unrecoverable I/O or internal fault
        job.fail(f"{type(exc).__name__}: {exc}")
        incident_log(job)
    return job
