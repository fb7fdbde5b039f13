"""Evaluation metrics: SSIM over frames, BLEU over script text, and the
storyboard-parser accuracy harness.

SSIM uses uniform square windows at stride 1 on luma; BLEU uses clipped
n-gram counts kept as exact rationals until the final log/exp.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from math import exp, log
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import InvalidInputError
from .imageproc import FrameBuffer
from .storyboard import parse_custom_storyboard

__all__ = [
    "SsimParams",
    "BleuParams",
    "luma",
    "ssim",
    "bleu",
    "parsing_accuracy",
    "WELLFORMED_SUFFIX",
    "MALFORMED_SUFFIX",
]

WELLFORMED_SUFFIX = "_ok"
MALFORMED_SUFFIX = "_bad"


@dataclass(frozen=True)
class SsimParams:
    """Uniform-window SSIM parameters."""

    window: int = 8
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = 255.0

    def __post_init__(self):
        if self.window < 1:
            raise InvalidInputError(f"window must be >= 1, got {self.window}")
        if self.k1 <= 0 or self.k2 <= 0:
            raise InvalidInputError("k1 and k2 must be > 0")
        if self.dynamic_range <= 0:
            raise InvalidInputError("dynamic_range must be > 0")


@dataclass(frozen=True)
class BleuParams:
    """BLEU variant: highest n-gram order and smoothing flavour."""

    max_n: int = 4
    smoothing: str = "none"

    def __post_init__(self):
        if self.max_n < 1:
            raise InvalidInputError(f"max_n must be >= 1, got {self.max_n}")
        if self.smoothing not in ("none", "add_one"):
            raise InvalidInputError(
                f"smoothing must be 'none' or 'add_one', got {self.smoothing!r}")


def luma(frame: FrameBuffer) -> np.ndarray:
    """Per-pixel luminance, 0.299 R + 0.587 G + 0.114 B, float64."""
    arr = frame.to_array().astype(np.float64)
    return 0.299 * arr[:, :, 0] + 0.587 * arr[:, :, 1] + 0.114 * arr[:, :, 2]


def ssim(a: FrameBuffer, b: FrameBuffer,
         params: SsimParams | None = None) -> float:
    """Mean structural similarity over all stride-1 windows.

    Variances are population estimates over the window. Identical frames
    score exactly 1.0; the result always lies in [-1, 1].
    """
    params = params or SsimParams()
    if not a.same_shape(b):
        raise InvalidInputError(
            f"cannot compare {a.width}x{a.height} with {b.width}x{b.height}")
    if params.window > min(a.width, a.height):
        raise InvalidInputError(
            f"window {params.window} exceeds frame side "
            f"{min(a.width, a.height)}")
    la = luma(a)
    lb = luma(b)
    win = params.window
    wa = sliding_window_view(la, (win, win))
    wb = sliding_window_view(lb, (win, win))

    mu_a = wa.mean(axis=(-2, -1))
    mu_b = wb.mean(axis=(-2, -1))
    mean_aa = (wa * wa).mean(axis=(-2, -1))
    mean_bb = (wb * wb).mean(axis=(-2, -1))
    mean_ab = (wa * wb).mean(axis=(-2, -1))
    var_a = mean_aa - mu_a * mu_a
    var_b = mean_bb - mu_b * mu_b
    cov = mean_ab - mu_a * mu_b

    c1 = (params.k1 * params.dynamic_range) ** 2
    c2 = (params.k2 * params.dynamic_range) ** 2
    numerator = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    denominator = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return float((numerator / denominator).mean())


def _tokens(text: str) -> list[str]:
    return text.lower().split()


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu(candidate: str, references: list[str],
         params: BleuParams | None = None) -> float:
    """Corpus-of-one BLEU: clipped n-gram precisions with brevity penalty.

    Tokenization is case-folded whitespace splitting. Orders with no
    candidate n-grams are skipped; with smoothing "none" any zero precision
    annihilates the score. The reference length r is the one closest to the
    candidate length (ties to the shorter).
    """
    params = params or BleuParams()
    if not references:
        raise InvalidInputError("need at least one reference")
    cand = _tokens(candidate)
    refs = [_tokens(r) for r in references]
    if not cand:
        return 0.0

    precisions: list[Fraction] = []
    for n in range(1, params.max_n + 1):
        cand_counts = _ngrams(cand, n)
        total = sum(cand_counts.values())
        if total == 0:
            continue  # candidate too short to have n-grams of this order
        ref_counts = [_ngrams(ref, n) for ref in refs]
        clipped = 0
        for gram, count in cand_counts.items():
            best = max((rc.get(gram, 0) for rc in ref_counts), default=0)
            clipped += min(count, best)
        if params.smoothing == "add_one":
            precisions.append(Fraction(clipped + 1, total + 1))
        else:
            precisions.append(Fraction(clipped, total))

    if not precisions:
        return 0.0
    if any(p == 0 for p in precisions):
        return 0.0

    c = len(cand)
    r = min((abs(len(ref) - c), len(ref)) for ref in refs)[1]
    brevity = 1.0 if c >= r else exp(1.0 - r / c)
    mean_log = sum(log(float(p)) for p in precisions) / len(precisions)
    return brevity * exp(mean_log)


def _classify(path: Path) -> str | None:
    stem = path.stem
    if stem.endswith(WELLFORMED_SUFFIX):
        return "well_formed"
    if stem.endswith(MALFORMED_SUFFIX):
        return "malformed"
    return None


def parsing_accuracy(corpus_dir: str | Path) -> dict[str, float | int]:
    """Run the custom-storyboard parser across a tagged fixture corpus.

    Files named *_ok.* are expected to parse without fallback; *_bad.* are
    expected to fall back. Returns {total, parsed, fallback, accuracy}
    where accuracy is the non-fallback fraction of well-formed files.
    Untagged files are ignored; a corpus without well-formed files has no
    defined accuracy and raises.
    """
    corpus_dir = Path(corpus_dir)
    if not corpus_dir.is_dir():
        raise InvalidInputError(f"corpus directory not found: {corpus_dir}")
    total = parsed = fallback = 0
    well_formed = well_parsed = 0
    for path in sorted(corpus_dir.iterdir()):
        kind = _classify(path)
        if kind is None or not path.is_file():
            continue
        text = path.read_text(encoding="utf-8", errors="replace")
        hint = "json" if path.suffix == ".json" else "auto"
        sb = parse_custom_storyboard(text, prompt=path.stem, format_hint=hint)
        total += 1
        if sb.origin == "fallback":
            fallback += 1
        else:
            parsed += 1
        if kind == "well_formed":
            well_formed += 1
            if sb.origin != "fallback":
                well_parsed += 1
    if total == 0:
        raise InvalidInputError(f"no tagged fixtures found in {corpus_dir}")
    if well_formed == 0:
        raise InvalidInputError(
            "corpus has no well-formed fixtures; accuracy is undefined")
    return {
        "total": total,
        "parsed": parsed,
        "fallback": fallback,
        "accuracy": well_parsed / well_formed,
    }
