import math
import wave

import numpy as np
import pytest

from cineforge.audiolab import (AudioBuffer, MixPlan, build_music,
                                build_voiceover, fade, gain_db, mix,
                                normalize_duration, prepare_music,
                                prepare_voiceover, read_wav, silence,
                                write_wav)
from cineforge.backends import MockSpeechBackend, MoodCatalog, fetch_music
from cineforge.errors import InvalidInputError
from cineforge.storyboard import fallback_storyboard


def tone(rate: int, frames: int, channels: int = 1, amp: float = 0.5,
         freq: float = 220.0) -> AudioBuffer:
    t = np.arange(frames * channels, dtype=np.float64)
    return AudioBuffer(sample_rate=rate, channels=channels,
                       samples=amp * np.sin(t * freq / rate))


class TestAudioBuffer:
    def test_duration(self):
        buf = silence(1.0, sample_rate=8000, channels=2)
        assert buf.frames == 8000
        assert buf.duration_s == 1.0
        assert buf.samples.shape == (16000,)

    def test_rejects_non_finite(self):
        with pytest.raises(InvalidInputError):
            AudioBuffer(sample_rate=8000, channels=1,
                        samples=np.array([0.0, np.nan]))

    def test_rejects_ragged_interleave(self):
        with pytest.raises(InvalidInputError):
            AudioBuffer(sample_rate=8000, channels=2,
                        samples=np.zeros(5))

    def test_rejects_bad_channel_count(self):
        with pytest.raises(InvalidInputError):
            AudioBuffer(sample_rate=8000, channels=3, samples=np.zeros(6))

    def test_samples_are_immutable(self):
        buf = silence(0.01, sample_rate=8000)
        with pytest.raises(ValueError):
            buf.samples[0] = 1.0

    def test_constructor_copies_input(self):
        raw = np.zeros(8)
        buf = AudioBuffer(sample_rate=8000, channels=1, samples=raw)
        raw[0] = 0.7
        assert buf.samples[0] == 0.0


class TestNormalizeDuration:
    def test_truncates(self):
        buf = tone(8000, 8000)
        out = normalize_duration(buf, 0.5, mode="trim_or_loop")
        assert out.frames == 4000
        assert np.array_equal(out.samples, np.clip(buf.samples[:4000], -1, 1))

    def test_loops_by_tiling(self):
        buf = tone(8000, 3000)
        out = normalize_duration(buf, 1.0, mode="trim_or_loop")
        assert out.frames == 8000
        src = np.clip(buf.samples, -1.0, 1.0)
        for i in range(0, 8000, 997):
            assert out.samples[i] == src[i % 3000]

    def test_pads_with_zeros(self):
        buf = tone(8000, 3000)
        out = normalize_duration(buf, 1.0, mode="trim_or_pad")
        assert out.frames == 8000
        assert np.array_equal(out.samples[:3000], np.clip(buf.samples, -1, 1))
        assert not out.samples[3000:].any()

    def test_frame_count_rounds_half_up(self):
        # 1.5 s at 15 Hz is 22.5 frames, which rounds up
        buf = silence(1.0, sample_rate=15)
        out = normalize_duration(buf, 1.5, mode="trim_or_pad")
        assert out.frames == 23

    def test_loop_empty_source_rejected(self):
        empty = AudioBuffer(sample_rate=8000, channels=1, samples=np.zeros(0))
        with pytest.raises(InvalidInputError):
            normalize_duration(empty, 1.0, mode="trim_or_loop")

    def test_unknown_mode_rejected(self):
        with pytest.raises(InvalidInputError):
            normalize_duration(silence(0.1, 8000), 1.0, mode="stretch")

    def test_stereo_loop_keeps_frame_alignment(self):
        rng = np.random.default_rng(5)
        buf = AudioBuffer(sample_rate=8000, channels=2,
                          samples=rng.uniform(-1, 1, size=302))
        out = normalize_duration(buf, 0.1, mode="trim_or_loop")
        assert out.frames == 800
        assert out.channels == 2
        # frame 151 wraps to frame 0 of the source
        assert out.planar()[151, 0] == pytest.approx(buf.planar()[0, 0])


class TestFade:
    def test_fade_in_is_linear_ramp(self):
        buf = AudioBuffer(sample_rate=1000, channels=1, samples=np.ones(2000))
        out = fade(buf, fade_in_ms=1000, fade_out_ms=0)
        assert out.samples[0] == 0.0
        assert out.samples[500] == 0.5
        assert out.samples[999] == 0.999
        assert out.samples[1000] == 1.0

    def test_fade_out_ends_at_zero(self):
        buf = AudioBuffer(sample_rate=1000, channels=1, samples=np.ones(2000))
        out = fade(buf, fade_in_ms=0, fade_out_ms=1000)
        assert out.samples[-1] == 0.0
        assert out.samples[1000] == (1000 - 1) / 1000
        assert out.samples[999] == 1.0

    def test_stereo_envelope_applies_per_frame(self):
        buf = AudioBuffer(sample_rate=1000, channels=2, samples=np.ones(4000))
        out = fade(buf, fade_in_ms=500, fade_out_ms=500)
        planar = out.planar()
        assert planar[0, 0] == 0.0 and planar[0, 1] == 0.0
        assert planar[-1, 0] == 0.0 and planar[-1, 1] == 0.0
        assert planar[1000, 0] == 1.0

    def test_windows_must_fit(self):
        buf = silence(1.0, sample_rate=1000)
        with pytest.raises(InvalidInputError):
            fade(buf, fade_in_ms=600, fade_out_ms=600)
        # exactly filling the buffer is allowed
        fade(buf, fade_in_ms=500, fade_out_ms=500)

    def test_negative_window_rejected(self):
        with pytest.raises(InvalidInputError):
            fade(silence(1.0, 1000), fade_in_ms=-1, fade_out_ms=0)


class TestGain:
    def test_minus_ten_db_factor(self):
        buf = AudioBuffer(sample_rate=8000, channels=1, samples=np.full(8, 0.5))
        out = gain_db(buf, -10.0)
        assert abs(out.samples[0] - 0.5 * 0.316228) < 1e-6

    def test_positive_gain_clamps(self):
        buf = AudioBuffer(sample_rate=8000, channels=1, samples=np.full(8, 0.9))
        out = gain_db(buf, 6.0)
        assert np.all(out.samples == 1.0)

    def test_zero_db_identity(self):
        buf = tone(8000, 100)
        out = gain_db(buf, 0.0)
        assert np.array_equal(out.samples, np.clip(buf.samples, -1, 1))

    def test_rejects_non_finite(self):
        with pytest.raises(InvalidInputError):
            gain_db(silence(0.1, 8000), float("inf"))


class TestMix:
    def test_weighted_sum(self):
        a = AudioBuffer(sample_rate=8000, channels=1, samples=np.full(8, 0.4))
        b = AudioBuffer(sample_rate=8000, channels=1, samples=np.full(8, 0.4))
        out = mix(a, b, MixPlan())
        assert out.samples[0] == pytest.approx(0.4 * 1.0 + 0.4 * 0.3)

    def test_clamps_hot_mix(self):
        a = AudioBuffer(sample_rate=8000, channels=1, samples=np.full(8, 1.0))
        b = AudioBuffer(sample_rate=8000, channels=1, samples=np.full(8, 1.0))
        out = mix(a, b, MixPlan())
        assert np.all(out.samples == 1.0)
        neg = AudioBuffer(sample_rate=8000, channels=1, samples=np.full(8, -1.0))
        out = mix(neg, neg, MixPlan())
        assert np.all(out.samples == -1.0)

    def test_plan_rejects_negative_gain(self):
        with pytest.raises(InvalidInputError):
            MixPlan(voiceover_gain=-0.5)

    def test_mono_widens_to_stereo(self):
        mono = AudioBuffer(sample_rate=8000, channels=1,
                           samples=np.linspace(-0.5, 0.5, 16))
        stereo = AudioBuffer(sample_rate=8000, channels=2, samples=np.zeros(32))
        out = mix(mono, stereo, MixPlan())
        assert out.channels == 2
        planar = out.planar()
        assert np.array_equal(planar[:, 0], planar[:, 1])
        assert planar[3, 0] == pytest.approx(mono.samples[3] * 1.0)

    def test_rate_mismatch_rejected(self):
        a = silence(0.1, sample_rate=8000)
        b = silence(0.1, sample_rate=44100)
        with pytest.raises(InvalidInputError):
            mix(a, b, MixPlan())

    def test_length_mismatch_rejected(self):
        a = silence(0.1, sample_rate=8000)
        b = silence(0.2, sample_rate=8000)
        with pytest.raises(InvalidInputError):
            mix(a, b, MixPlan())


class TestWav:
    def test_roundtrip_is_exact_quantization(self, tmp_path):
        rng = np.random.default_rng(11)
        samples = rng.uniform(-1.0, 1.0, size=512)
        buf = AudioBuffer(sample_rate=8000, channels=2, samples=samples)
        path = tmp_path / "x.wav"
        write_wav(buf, path)
        back = read_wav(path)
        expected = np.clip(np.floor(samples * 32768.0 + 0.5),
                           -32768, 32767) / 32768.0
        assert back.sample_rate == 8000
        assert back.channels == 2
        assert np.array_equal(back.samples, expected)

    def test_second_pass_is_identity(self, tmp_path):
        rng = np.random.default_rng(12)
        buf = AudioBuffer(sample_rate=44100, channels=1,
                          samples=rng.uniform(-1, 1, size=256))
        p1, p2 = tmp_path / "a.wav", tmp_path / "b.wav"
        write_wav(buf, p1)
        first = read_wav(p1)
        write_wav(first, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_full_scale_negative_survives(self, tmp_path):
        buf = AudioBuffer(sample_rate=8000, channels=1,
                          samples=np.array([-1.0, 1.0, 0.0]))
        path = tmp_path / "fs.wav"
        write_wav(buf, path)
        back = read_wav(path)
        assert back.samples[0] == -1.0
        assert back.samples[1] == 32767 / 32768
        assert back.samples[2] == 0.0

    def test_reads_from_bytes(self, tmp_path):
        buf = silence(0.01, sample_rate=8000)
        path = tmp_path / "s.wav"
        write_wav(buf, path)
        back = read_wav(path.read_bytes())
        assert back.frames == buf.frames

    def test_rejects_eight_bit(self, tmp_path):
        path = tmp_path / "8bit.wav"
        with wave.open(str(path), "wb") as handle:
            handle.setnchannels(1)
            handle.setsampwidth(1)
            handle.setframerate(8000)
            handle.writeframes(b"\x80" * 64)
        with pytest.raises(InvalidInputError):
            read_wav(path)

    def test_rejects_garbage(self):
        with pytest.raises(InvalidInputError):
            read_wav(b"not a wav file at all")

    def test_rejects_truncated(self, tmp_path):
        buf = silence(0.1, sample_rate=8000)
        path = tmp_path / "t.wav"
        write_wav(buf, path)
        with pytest.raises(InvalidInputError):
            read_wav(path.read_bytes()[:20])


class TestTracks:
    def test_prepare_voiceover_contract(self):
        buf = tone(44100, 44100 * 5)
        out = prepare_voiceover(buf)
        assert out.frames == 60 * 44100
        assert out.samples[0] == 0.0
        assert out.samples[-1] == 0.0

    def test_prepare_music_contract(self):
        buf = tone(44100, 44100 * 4, amp=0.9)
        out = prepare_music(buf)
        assert out.frames == 60 * 44100
        assert out.samples[0] == 0.0
        assert out.samples[-1] == 0.0
        # -10 dB applied before the fades
        mid = out.samples[30 * 44100]
        src = np.clip(buf.samples, -1, 1)[(30 * 44100) % buf.frames]
        assert mid == pytest.approx(src * 10 ** (-0.5), abs=1e-12)

    def test_build_voiceover_from_storyboard(self):
        sb = fallback_storyboard("a lighthouse in a storm")
        events = []
        out = build_voiceover(sb, MockSpeechBackend(),
                              on_fallback=lambda s, r: events.append((s, r)))
        assert out.frames == 60 * 44100
        assert out.sample_rate == 44100
        assert events == []
        assert float(np.abs(out.samples).max()) > 0.0

    def test_build_voiceover_survives_backend_failure(self):
        from cineforge.errors import GenerationError

        class Failing:
            def synthesize(self, text, config):
                raise GenerationError("speech service down")

        sb = fallback_storyboard("quiet meadow")
        events = []
        out = build_voiceover(sb, Failing(),
                              on_fallback=lambda s, r: events.append((s, r)))
        assert out.frames == 60 * 44100
        assert not out.samples.any()
        assert events and events[0][0] == "voiceover"

    def test_build_music_from_catalog(self):
        source = fetch_music(MoodCatalog.default(), "cinematic")
        events = []
        out = build_music(source, on_fallback=lambda s, r: events.append(s))
        assert out.frames == 60 * 44100
        assert events == []
        assert float(np.abs(out.samples).max()) > 0.0

    def test_build_music_without_source_is_silence(self):
        events = []
        out = build_music(None, on_fallback=lambda s, r: events.append(s))
        assert out.frames == 60 * 44100
        assert not out.samples.any()
        assert events == ["music"]
