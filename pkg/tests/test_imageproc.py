import numpy as np
import pytest

from cineforge.errors import InvalidInputError
from cineforge.imageproc import (FrameBuffer, PostProcessConfig,
                                 apply_brightness, apply_channel_gain,
                                 blank_frame, post_process_frames, resize,
                                 sharpen)

from conftest import random_frame, random_frame_np, solid_frame


def naive_round_clamp(x: float) -> int:
    import math
    return min(255, max(0, int(math.floor(x + 0.5))))


def naive_sharpen(frame: FrameBuffer) -> np.ndarray:
    src = frame.to_array().astype(int)
    h, w, _ = src.shape
    out = np.zeros_like(src)
    ring = [(dy, dx) for dy in (-1, 0, 1) for dx in (-1, 0, 1) if (dy, dx) != (0, 0)]
    for y in range(h):
        for x in range(w):
            for c in range(3):
                centre = src[y, x, c]
                s = 0
                for dy, dx in ring:
                    yy = min(max(y + dy, 0), h - 1)
                    xx = min(max(x + dx, 0), w - 1)
                    s += src[yy, xx, c]
                val = (32 * centre - 2 * s + 8) >> 4
                out[y, x, c] = min(255, max(0, val))
    return out.astype(np.uint8)


class TestFrameBuffer:
    def test_roundtrip(self):
        frame = random_frame(7, 5, seed=1)
        again = FrameBuffer.from_array(frame.to_array())
        assert again == frame

    def test_length_validation(self):
        with pytest.raises(InvalidInputError):
            FrameBuffer(width=4, height=4, pixels=b"\x00" * 47)

    def test_bad_dims(self):
        with pytest.raises(InvalidInputError):
            FrameBuffer(width=0, height=4, pixels=b"")

    def test_from_array_rejects_wrong_shape(self):
        with pytest.raises(InvalidInputError):
            FrameBuffer.from_array(np.zeros((4, 4), dtype=np.uint8))

    def test_blank_frame_is_black(self):
        frame = blank_frame(6, 3)
        assert frame.pixels == b"\x00" * (6 * 3 * 3)


class TestBrightness:
    def test_reference_value_100(self):
        out = apply_brightness(solid_frame(4, 4, (100, 100, 100)), 1.1)
        assert set(out.pixels) == {110}

    def test_rounds_half_up(self):
        # 5 * 1.1 = 5.5 which lands on the half
        out = apply_brightness(solid_frame(2, 2, (5, 5, 5)), 1.1)
        assert set(out.pixels) == {6}

    def test_clamps_to_255(self):
        out = apply_brightness(solid_frame(2, 2, (250, 250, 250)), 1.1)
        assert set(out.pixels) == {255}

    def test_matches_scalar_oracle(self):
        frame = random_frame(9, 6, seed=2)
        out = apply_brightness(frame, 1.1).to_array()
        for v_in, v_out in zip(frame.pixels, out.ravel()):
            assert v_out == naive_round_clamp(v_in * 1.1)

    def test_rejects_nonpositive_gain(self):
        with pytest.raises(InvalidInputError):
            apply_brightness(solid_frame(2, 2, (1, 1, 1)), 0.0)


class TestChannelGain:
    def test_blue_reference_value_200(self):
        out = apply_channel_gain(solid_frame(3, 3, (10, 20, 200)), "b", 1.05)
        arr = out.to_array()
        assert set(arr[:, :, 2].ravel()) == {210}
        # other channels untouched
        assert set(arr[:, :, 0].ravel()) == {10}
        assert set(arr[:, :, 1].ravel()) == {20}

    def test_red_channel_selector(self):
        out = apply_channel_gain(solid_frame(2, 2, (100, 100, 100)), "r", 1.1)
        arr = out.to_array()
        assert set(arr[:, :, 0].ravel()) == {110}
        assert set(arr[:, :, 1].ravel()) == {100}

    def test_rejects_unknown_channel(self):
        with pytest.raises(InvalidInputError):
            apply_channel_gain(solid_frame(2, 2, (0, 0, 0)), "x", 1.0)


class TestSharpen:
    def test_uniform_region_is_identity(self):
        for value in (0, 1, 37, 128, 254, 255):
            frame = solid_frame(5, 4, (value, value, value))
            assert sharpen(frame) == frame

    def test_hand_computed_centre(self):
        # centre 100, all eight neighbours 90 on a 3x3 grid
        arr = np.full((3, 3, 3), 90, dtype=np.uint8)
        arr[1, 1] = 100
        out = sharpen(FrameBuffer.from_array(arr)).to_array()
        # centre: (32*100 - 2*(8*90) + 8) >> 4 = (3200 - 1440 + 8) >> 4 = 110
        assert out[1, 1, 0] == 110

    def test_matches_naive_loop(self):
        frame = random_frame(8, 6, seed=3)
        assert np.array_equal(sharpen(frame).to_array(), naive_sharpen(frame))

    def test_single_pixel_is_identity(self):
        frame = solid_frame(1, 1, (77, 12, 200))
        assert sharpen(frame) == frame

    def test_overshoot_clamps(self):
        arr = np.zeros((3, 3, 3), dtype=np.uint8)
        arr[1, 1] = 255
        out = sharpen(FrameBuffer.from_array(arr)).to_array()
        assert out[1, 1, 0] == 255
        assert out[0, 1, 0] == 0


class TestPostProcessChain:
    def test_order_brightness_blue_sharpen(self):
        frame = random_frame(6, 5, seed=4)
        cfg = PostProcessConfig()
        manual = apply_brightness(frame, cfg.brightness_gain)
        manual = apply_channel_gain(manual, "b", cfg.blue_gain)
        manual = sharpen(manual)
        assert post_process_frames([frame], cfg) == [manual]

    def test_neutral_config_is_identity(self):
        frame = random_frame(4, 4, seed=5)
        cfg = PostProcessConfig(brightness_gain=1.0, blue_gain=1.0,
                                sharpen_enabled=False)
        assert post_process_frames([frame], cfg) == [frame]

    def test_empty_input(self):
        assert post_process_frames([], PostProcessConfig()) == []

    def test_rejects_mixed_dimensions(self):
        frames = [solid_frame(4, 4, (0, 0, 0)), solid_frame(5, 4, (0, 0, 0))]
        with pytest.raises(InvalidInputError):
            post_process_frames(frames, PostProcessConfig())

    def test_config_rejects_bad_gain(self):
        with pytest.raises(InvalidInputError):
            PostProcessConfig(brightness_gain=-1.0)


class TestResize:
    def test_same_size_identity(self):
        frame = random_frame(11, 7, seed=6)
        assert resize(frame, 11, 7) is frame

    def test_two_by_two_average(self):
        arr = np.zeros((2, 2, 3), dtype=np.uint8)
        arr[0, 0] = 10
        arr[0, 1] = 20
        arr[1, 0] = 30
        arr[1, 1] = 40
        out = resize(FrameBuffer.from_array(arr), 1, 1).to_array()
        # mean of the four texels is 25
        assert out[0, 0, 0] == 25

    def test_upscale_dims(self):
        out = resize(random_frame(3, 3, seed=7), 10, 8)
        assert (out.width, out.height) == (10, 8)

    def test_solid_color_stays_solid(self):
        out = resize(solid_frame(4, 4, (9, 130, 250)), 17, 5).to_array()
        assert set(out[:, :, 0].ravel()) == {9}
        assert set(out[:, :, 1].ravel()) == {130}
        assert set(out[:, :, 2].ravel()) == {250}

    def test_matches_naive_bilinear(self):
        frame = random_frame_np(6, 4, seed=8)
        dst_w, dst_h = 9, 7
        got = resize(frame, dst_w, dst_h).to_array()
        src = frame.to_array().astype(np.float64)

        def taps(dst, length):
            pos = (np.arange(dst) + 0.5) * (length / dst) - 0.5
            pos = np.clip(pos, 0.0, length - 1.0)
            lo = np.floor(pos).astype(int)
            hi = np.minimum(lo + 1, length - 1)
            return lo, hi, pos - lo

        xlo, xhi, xw = taps(dst_w, 6)
        ylo, yhi, yw = taps(dst_h, 4)
        for y in range(dst_h):
            for x in range(dst_w):
                for c in range(3):
                    top = src[ylo[y], xlo[x], c] * (1 - xw[x]) + \
                        src[ylo[y], xhi[x], c] * xw[x]
                    bot = src[yhi[y], xlo[x], c] * (1 - xw[x]) + \
                        src[yhi[y], xhi[x], c] * xw[x]
                    val = top * (1 - yw[y]) + bot * yw[y]
                    assert got[y, x, c] == naive_round_clamp(val)

    def test_rejects_bad_target(self):
        with pytest.raises(InvalidInputError):
            resize(solid_frame(2, 2, (0, 0, 0)), 0, 5)
