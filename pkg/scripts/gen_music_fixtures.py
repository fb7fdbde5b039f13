"""Regenerate the bundled music fixture WAVs.

Deterministic synthesis (sawtooth/triangle partials, pure float math), so
reruns reproduce the committed bytes exactly:

    python scripts/gen_music_fixtures.py
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from cineforge.audiolab import AudioBuffer, write_wav  # noqa: E402

RATE = 44100
OUT_DIR = Path(__file__).resolve().parents[1] / "src" / "cineforge" / "fixtures" / "music"


def saw(freq: float, n: int, amp: float, phase0: float = 0.0) -> np.ndarray:
    t = np.arange(n, dtype=np.float64) * (freq / RATE) + phase0
    frac = t - np.floor(t)
    return (2.0 * frac - 1.0) * amp


def tri(freq: float, n: int, amp: float) -> np.ndarray:
    t = np.arange(n, dtype=np.float64) * (freq / RATE)
    frac = t - np.floor(t)
    return (4.0 * np.abs(frac - 0.5) - 1.0) * amp


def envelope(n: int, attack: float = 0.08, release: float = 0.2) -> np.ndarray:
    env = np.ones(n)
    a = int(n * attack)
    r = int(n * release)
    if a:
        env[:a] = np.arange(a) / a
    if r:
        env[n - r:] = np.minimum(env[n - r:], (r - 1 - np.arange(r)) / r)
    return env


def stereo(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    return np.stack([left, right], axis=1).reshape(-1)


def build_cinematic() -> AudioBuffer:
    """4 s stereo: slow detuned fifth with a triangle shimmer."""
    n = 4 * RATE
    env = envelope(n)
    left = (saw(110.0, n, 0.22) + saw(164.81, n, 0.14) + tri(440.0, n, 0.05)) * env
    right = (saw(110.5, n, 0.22) + saw(165.3, n, 0.14) + tri(442.0, n, 0.05)) * env
    return AudioBuffer(RATE, 2, np.clip(stereo(left, right), -1.0, 1.0))


def build_epic() -> AudioBuffer:
    """3 s mono: low pulse train under a rising triad arpeggio."""
    n = 3 * RATE
    env = envelope(n, attack=0.05, release=0.25)
    pulse = saw(55.0, n, 0.3)
    beat = (np.arange(n) // (RATE // 2)) % 2  # half-second on/off gate
    arp = np.concatenate([
        tri(f, n // 3, 0.18) for f in (220.0, 277.18, 329.63)
    ])[:n]
    mono = (pulse * (0.6 + 0.4 * beat) + arp) * env
    return AudioBuffer(RATE, 1, np.clip(mono, -1.0, 1.0))


def build_suspense() -> AudioBuffer:
    """2.5 s stereo: close detuned pair that beats uneasily."""
    n = int(2.5 * RATE)
    env = envelope(n, attack=0.15, release=0.3)
    left = (saw(98.0, n, 0.25) + saw(99.5, n, 0.25)) * env
    right = (saw(98.0, n, 0.25, phase0=0.5) + saw(97.0, n, 0.25)) * env
    return AudioBuffer(RATE, 2, np.clip(stereo(left, right), -1.0, 1.0))


def main() -> None:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    for name, builder in (("cinematic", build_cinematic),
                          ("epic", build_epic),
                          ("suspense", build_suspense)):
        path = OUT_DIR / f"{name}.wav"
        write_wav(builder(), path)
        print(f"wrote {path} ({path.stat().st_size} bytes)")


if __name__ == "__main__":
    main()
