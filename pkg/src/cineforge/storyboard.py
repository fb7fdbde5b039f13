"""Storyboard model, prompt enrichment, and total parsers.

A storyboard is always exactly five scenes of twelve seconds. The parsers
never raise on arbitrary text: anything unusable degrades to the
deterministic fallback storyboard derived from the user prompt.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Literal

from .errors import InvalidInputError

__all__ = [
    "Scene",
    "Storyboard",
    "CinematicVocabulary",
    "DEFAULT_VOCAB",
    "SCENE_COUNT",
    "SCENE_DURATION_S",
    "FALLBACK_HEADINGS",
    "build_generation_instruction",
    "enrich_visual_prompt",
    "fallback_storyboard",
    "parse_generated_storyboard",
    "parse_custom_storyboard",
    "serialize_storyboard",
]

SCENE_COUNT = 5
SCENE_DURATION_S = 12.0
TOTAL_DURATION_S = 60.0

FALLBACK_HEADINGS = (
    "OPENING SHOT",
    "RISING ACTION",
    "CLIMAX",
    "FALLING ACTION",
    "RESOLUTION",
)

ENRICHMENT_SUFFIX = ", cinematic shot, dramatic lighting, 4K"

Origin = Literal["generated", "custom", "fallback"]

_SCENE_MARKER = re.compile(r"Scene\s+\d+\s*:", re.IGNORECASE)
_PROMPT_LINE = re.compile(r"^[ \t]*prompt[ \t]*:[ \t]*", re.IGNORECASE | re.MULTILINE)
_DASH_RULE = re.compile(r"^[ \t]*-{3,}[ \t]*$", re.MULTILINE)
_BLANK_RUN = re.compile(r"\n[ \t]*\n")
_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])\s+")


@dataclass(frozen=True)
class CinematicVocabulary:
    """Keywords that mark a prompt as already-cinematic, plus fallback styles."""

    enrichment_keywords: tuple[str, ...] = (
        "cinematic", "dramatic", "4k", "golden hour", "wide angle",
    )
    fallback_styles: tuple[str, ...] = (
        "wide angle, golden hour lighting",
        "tracking shot, rising tension",
        "close-up, high contrast",
        "slow motion, soft focus",
        "aerial view, fading light",
    )

    def __post_init__(self):
        if not self.enrichment_keywords:
            raise InvalidInputError("enrichment_keywords must not be empty")
        if any(not k.strip() for k in self.enrichment_keywords):
            raise InvalidInputError("enrichment keywords must be non-blank")
        if len(self.fallback_styles) != SCENE_COUNT:
            raise InvalidInputError(
                f"need exactly {SCENE_COUNT} fallback styles, "
                f"got {len(self.fallback_styles)}")


DEFAULT_VOCAB = CinematicVocabulary()


@dataclass(frozen=True)
class Scene:
    """One twelve-second beat of the storyboard."""

    index: int
    heading: str
    description: str
    visual_prompt: str
    duration_s: float = SCENE_DURATION_S

    def __post_init__(self):
        if not (1 <= self.index <= SCENE_COUNT):
            raise InvalidInputError(
                f"scene index must be in [1, {SCENE_COUNT}], got {self.index}")
        if self.duration_s != SCENE_DURATION_S:
            raise InvalidInputError(
                f"scene duration is fixed at {SCENE_DURATION_S} s, got {self.duration_s}")
        if not self.description.strip():
            raise InvalidInputError(f"scene {self.index} has a blank description")
        if not self.visual_prompt.strip():
            raise InvalidInputError(f"scene {self.index} has a blank visual prompt")


@dataclass(frozen=True)
class Storyboard:
    """Exactly five ordered scenes plus the prompt that produced them."""

    source_prompt: str
    scenes: tuple[Scene, ...]
    origin: Origin

    def __post_init__(self):
        if self.origin not in ("generated", "custom", "fallback"):
            raise InvalidInputError(f"unknown origin {self.origin!r}")
        if len(self.scenes) != SCENE_COUNT:
            raise InvalidInputError(
                f"storyboard must have {SCENE_COUNT} scenes, got {len(self.scenes)}")
        for pos, scene in enumerate(self.scenes, start=1):
            if scene.index != pos:
                raise InvalidInputError(
                    f"scene at position {pos} carries index {scene.index}")
        object.__setattr__(self, "scenes", tuple(self.scenes))

    @property
    def total_duration_s(self) -> float:
        return sum(s.duration_s for s in self.scenes)


def build_generation_instruction(prompt: str) -> str:
    """The text-generation instruction for a user prompt. Exact template."""
    if not prompt.strip():
        raise InvalidInputError("prompt must not be blank")
    return (f"Generate a 1-minute cinematic storyboard for '{prompt}', "
            f"divided into 5 scenes (12s each).")


def enrich_visual_prompt(prompt: str, vocab: CinematicVocabulary = DEFAULT_VOCAB) -> str:
    """Append the cinematic suffix unless a vocabulary keyword is present.

    Matching is case-insensitive substring. Idempotent: the suffix itself
    contains keywords.
    """
    if not prompt.strip():
        raise InvalidInputError("cannot enrich a blank prompt")
    lowered = prompt.lower()
    if any(k.lower() in lowered for k in vocab.enrichment_keywords):
        return prompt
    return prompt + ENRICHMENT_SUFFIX


def _fallback_scene(position: int, prompt: str,
                    vocab: CinematicVocabulary) -> Scene:
    heading = FALLBACK_HEADINGS[position - 1]
    style = vocab.fallback_styles[position - 1]
    return Scene(
        index=position,
        heading=heading,
        description=f"{heading}: {prompt}",
        visual_prompt=enrich_visual_prompt(f"{prompt}, {style}", vocab),
    )


def fallback_storyboard(prompt: str,
                        vocab: CinematicVocabulary = DEFAULT_VOCAB) -> Storyboard:
    """Deterministic five-scene storyboard built from the prompt alone."""
    if not prompt.strip():
        raise InvalidInputError("prompt must not be blank")
    scenes = tuple(_fallback_scene(i, prompt, vocab) for i in range(1, SCENE_COUNT + 1))
    return Storyboard(source_prompt=prompt, scenes=scenes, origin="fallback")


def _split_sentences(text: str) -> tuple[str, str]:
    """First sentence and the remainder (either may be empty)."""
    parts = _SENTENCE_SPLIT.split(text.strip(), maxsplit=1)
    first = parts[0].strip()
    rest = parts[1].strip() if len(parts) > 1 else ""
    return first, rest


def _segment_to_parts(segment: str) -> tuple[str, str] | None:
    """Extract (description, visual_prompt) from one scene segment.

    A "Prompt:" line prefix designates the visual prompt; otherwise the
    first sentence is the description and the remainder (if any) the visual
    prompt. Returns None for unusable segments.
    """
    segment = segment.strip()
    if not segment:
        return None
    m = _PROMPT_LINE.search(segment)
    if m:
        description = segment[:m.start()].strip()
        visual = segment[m.end():].strip()
        if not description and not visual:
            return None
        if not description:
            description = visual
        if not visual:
            visual = description
        return description, visual
    first, rest = _split_sentences(segment)
    if not first:
        return None
    description = first
    visual = rest if rest else first
    return description, visual


def _strip_leading_marker(segment: str) -> str:
    stripped = segment.lstrip()
    m = _SCENE_MARKER.match(stripped)
    if m:
        return stripped[m.end():]
    return segment


def _scenes_from_parts(parts: list[tuple[str, str]], prompt: str,
                       vocab: CinematicVocabulary,
                       headings: list[str] | None = None) -> tuple[Scene, ...]:
    """Assemble exactly five scenes, padding short lists with fallback rows."""
    scenes = []
    for pos in range(1, SCENE_COUNT + 1):
        if pos <= len(parts):
            description, visual = parts[pos - 1]
            heading = FALLBACK_HEADINGS[pos - 1]
            if headings and headings[pos - 1]:
                heading = headings[pos - 1]
            scenes.append(Scene(
                index=pos,
                heading=heading,
                description=description,
                visual_prompt=enrich_visual_prompt(visual, vocab),
            ))
        else:
            scenes.append(_fallback_scene(pos, prompt, vocab))
    return tuple(scenes)


def parse_generated_storyboard(text: str, prompt: str,
                               vocab: CinematicVocabulary = DEFAULT_VOCAB
                               ) -> Storyboard:
    """Parse model-generated text into a storyboard. Total: never raises
    on text content; unusable text degrades to the fallback storyboard.

    Scene segments are delimited by "Scene <n>:" markers (case-insensitive);
    text before the first marker is ignored. At least five usable segments
    are required for a "generated" result; extras beyond five are dropped.
    """
    prompt = _safe_prompt(prompt, text)
    if not isinstance(text, str):
        return fallback_storyboard(prompt, vocab)
    text = text.replace("\r\n", "\n").replace("\r", "\n")
    pieces = _SCENE_MARKER.split(text)
    segments = pieces[1:]  # text before the first marker is preamble
    parts = []
    for seg in segments:
        extracted = _segment_to_parts(seg)
        if extracted:
            parts.append(extracted)
        if len(parts) == SCENE_COUNT:
            break
    if len(parts) < SCENE_COUNT:
        return fallback_storyboard(prompt, vocab)
    scenes = _scenes_from_parts(parts, prompt, vocab)
    return Storyboard(source_prompt=prompt, scenes=scenes, origin="generated")


def _safe_prompt(prompt: str, source_text: str = "") -> str:
    """Never let a blank prompt break parser totality."""
    if isinstance(prompt, str) and prompt.strip():
        return prompt
    if isinstance(source_text, str):
        snippet = source_text.strip()[:60]
        if snippet:
            return snippet
    return "untitled scene"


def _parse_json_scenes(text: str) -> list[dict] | None:
    """Scene dicts from a JSON payload, or None when the shape is unusable."""
    try:
        doc = json.loads(text)
    except (json.JSONDecodeError, RecursionError):
        return None
    if isinstance(doc, list):
        raw = doc
    elif isinstance(doc, dict):
        raw = doc.get("scenes")
        if not isinstance(raw, list):
            return None
    else:
        return None
    if not raw:
        return None
    cleaned = []
    for entry in raw:
        if not isinstance(entry, dict):
            return None
        description = entry.get("description")
        if not isinstance(description, str) or not description.strip():
            return None
        visual = entry.get("visual_prompt", entry.get("prompt"))
        if visual is not None and not isinstance(visual, str):
            return None
        heading = entry.get("heading")
        if heading is not None and not isinstance(heading, str):
            return None
        cleaned.append({
            "description": description.strip(),
            "visual": visual.strip() if isinstance(visual, str) and visual.strip() else None,
            "heading": heading.strip() if isinstance(heading, str) and heading.strip() else None,
        })
    return cleaned


def _plain_segments(text: str) -> list[str]:
    """Split plain text by the first delimiter style that yields >= 2 parts.

    Styles, in order: "---" rule lines, blank-line runs, "Scene <n>:"
    markers. With no delimiters the whole text is a single segment.
    """
    for splitter in (_DASH_RULE, _BLANK_RUN):
        segments = splitter.split(text)
        if len(segments) >= 2:
            return segments
    pieces = _SCENE_MARKER.split(text)
    if len(pieces) >= 3:  # at least two markers
        return pieces[1:]
    return [text]


def parse_custom_storyboard(text: str, prompt: str,
                            format_hint: Literal["plain", "json", "auto"] = "auto",
                            vocab: CinematicVocabulary = DEFAULT_VOCAB
                            ) -> Storyboard:
    """Parse user-supplied storyboard text. Total: never raises on content.

    JSON payloads (a scene array, or an object with a "scenes" array) are
    accepted when every entry has a non-empty "description"; "prompt" or
    "visual_prompt" and "heading" are optional. Plain text splits on "---"
    lines, blank lines, or "Scene <n>:" markers. Fewer than five scenes pad
    with fallback rows; more than five keep the first five. Unusable input
    degrades to the fallback storyboard.
    """
    if format_hint not in ("plain", "json", "auto"):
        raise InvalidInputError(
            f"format_hint must be 'plain', 'json' or 'auto', got {format_hint!r}")
    prompt = _safe_prompt(prompt, text if isinstance(text, str) else "")
    if not isinstance(text, str) or not text.strip():
        return fallback_storyboard(prompt, vocab)
    text = text.replace("\r\n", "\n").replace("\r", "\n")

    attempt_json = format_hint == "json" or (
        format_hint == "auto" and text.lstrip()[:1] in ("[", "{"))
    if attempt_json:
        raw = _parse_json_scenes(text)
        if raw is None:
            # JSON-shaped but unusable input is malformed, not plain text
            return fallback_storyboard(prompt, vocab)
        parts = [(e["description"], e["visual"] or e["description"])
                 for e in raw[:SCENE_COUNT]]
        headings = [e["heading"] for e in raw[:SCENE_COUNT]]
        scenes = _scenes_from_parts(parts, prompt, vocab, headings=headings)
        return Storyboard(source_prompt=prompt, scenes=scenes, origin="custom")

    parts = []
    for seg in _plain_segments(text):
        extracted = _segment_to_parts(_strip_leading_marker(seg))
        if extracted:
            parts.append(extracted)
        if len(parts) == SCENE_COUNT:
            break
    if not parts:
        return fallback_storyboard(prompt, vocab)
    scenes = _scenes_from_parts(parts, prompt, vocab)
    return Storyboard(source_prompt=prompt, scenes=scenes, origin="custom")


def serialize_storyboard(sb: Storyboard) -> str:
    """Canonical JSON for a storyboard; parse_custom_storyboard round-trips it."""
    doc = {
        "source_prompt": sb.source_prompt,
        "origin": sb.origin,
        "scenes": [
            {
                "index": s.index,
                "heading": s.heading,
                "description": s.description,
                "visual_prompt": s.visual_prompt,
                "duration_s": s.duration_s,
            }
            for s in sb.scenes
        ],
    }
    return json.dumps(doc, indent=2, ensure_ascii=False)
