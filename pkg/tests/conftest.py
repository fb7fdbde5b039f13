from __future__ import annotations

import random
from pathlib import Path

import numpy as np
import pytest

from cineforge.imageproc import FrameBuffer

CORPUS_DIR = Path(__file__).parent / "corpus"


def solid_frame(width: int, height: int, rgb: tuple[int, int, int]) -> FrameBuffer:
    arr = np.zeros((height, width, 3), dtype=np.uint8)
    arr[:, :] = rgb
    return FrameBuffer.from_array(arr)


def random_frame(width: int, height: int, seed: int) -> FrameBuffer:
    rng = random.Random(seed)
    pixels = bytes(rng.randrange(256) for _ in range(width * height * 3))
    return FrameBuffer(width=width, height=height, pixels=pixels)


def random_frame_np(width: int, height: int, seed: int) -> FrameBuffer:
    rng = np.random.default_rng(seed)
    return FrameBuffer.from_array(
        rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8))


@pytest.fixture(scope="session")
def corpus_dir() -> Path:
    assert CORPUS_DIR.is_dir(), "tests/corpus must ship with the repo"
    return CORPUS_DIR
