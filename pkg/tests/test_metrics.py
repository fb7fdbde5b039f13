import math
from fractions import Fraction

import numpy as np
import pytest

from cineforge.errors import InvalidInputError
from cineforge.metrics import (BleuParams, SsimParams, bleu, luma,
                               parsing_accuracy, ssim)

from conftest import random_frame_np, solid_frame


def naive_ssim(a, b, window=8, k1=0.01, k2=0.03, luma_range=255.0):
    """Independent SSIM: explicit double loop over windows."""
    ya = luma(a)
    yb = luma(b)
    c1 = (k1 * luma_range) ** 2
    c2 = (k2 * luma_range) ** 2
    h, w = ya.shape
    values = []
    for y in range(h - window + 1):
        for x in range(w - window + 1):
            pa = ya[y:y + window, x:x + window]
            pb = yb[y:y + window, x:x + window]
            mu_a = pa.mean()
            mu_b = pb.mean()
            var_a = ((pa - mu_a) ** 2).mean()
            var_b = ((pb - mu_b) ** 2).mean()
            cov = ((pa - mu_a) * (pb - mu_b)).mean()
            values.append(((2 * mu_a * mu_b + c1) * (2 * cov + c2)) /
                          ((mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2)))
    return float(np.mean(values))


class TestLuma:
    def test_weights(self):
        assert luma(solid_frame(1, 1, (255, 0, 0)))[0, 0] == \
            pytest.approx(0.299 * 255)
        assert luma(solid_frame(1, 1, (0, 255, 0)))[0, 0] == \
            pytest.approx(0.587 * 255)
        assert luma(solid_frame(1, 1, (0, 0, 255)))[0, 0] == \
            pytest.approx(0.114 * 255)

    def test_white(self):
        assert luma(solid_frame(2, 2, (255, 255, 255)))[0, 0] == \
            pytest.approx(255.0)


class TestSsim:
    def test_identity_is_exactly_one(self):
        for seed in range(5):
            frame = random_frame_np(16, 16, seed=seed)
            assert ssim(frame, frame) == 1.0

    def test_symmetry(self):
        a = random_frame_np(16, 16, seed=10)
        b = random_frame_np(16, 16, seed=11)
        assert ssim(a, b) == pytest.approx(ssim(b, a), abs=1e-12)

    def test_black_vs_white_closed_form(self):
        a = solid_frame(8, 8, (0, 0, 0))
        b = solid_frame(8, 8, (255, 255, 255))
        c1 = (0.01 * 255.0) ** 2
        # flat windows: variances and covariance vanish, c2 cancels
        expected = c1 / (255.0 ** 2 + c1)
        assert ssim(a, b) == pytest.approx(expected, abs=1e-12)

    def test_matches_naive_oracle(self):
        for seed in range(0, 40, 2):
            a = random_frame_np(16, 16, seed=seed)
            b = random_frame_np(16, 16, seed=seed + 1)
            assert ssim(a, b) == pytest.approx(naive_ssim(a, b), abs=1e-9)

    def test_similar_scores_higher_than_noise(self):
        base = random_frame_np(24, 24, seed=50)
        arr = base.to_array().astype(np.int16)
        nudged = np.clip(arr + 2, 0, 255).astype(np.uint8)
        from cineforge.imageproc import FrameBuffer
        near = FrameBuffer.from_array(nudged)
        far = random_frame_np(24, 24, seed=51)
        assert ssim(base, near) > ssim(base, far)

    def test_window_larger_than_image_rejected(self):
        a = solid_frame(4, 4, (0, 0, 0))
        with pytest.raises(InvalidInputError):
            ssim(a, a)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(InvalidInputError):
            ssim(solid_frame(16, 16, (0, 0, 0)), solid_frame(16, 8, (0, 0, 0)))

    def test_custom_window(self):
        a = random_frame_np(6, 6, seed=60)
        assert ssim(a, a, SsimParams(window=4)) == 1.0

    def test_params_validation(self):
        with pytest.raises(InvalidInputError):
            SsimParams(window=0)


class TestBleu:
    def test_identity_is_one(self):
        cand = "the quick brown fox jumps over the lazy dog near the river"
        assert bleu(cand, [cand]) == pytest.approx(1.0, abs=1e-12)

    def test_case_insensitive(self):
        assert bleu("The Quick Brown Fox Jumps",
                    ["the quick brown fox jumps"]) == pytest.approx(1.0)

    def test_short_candidate_skips_unformable_orders(self):
        # three tokens cannot form a 4-gram: order 4 is skipped, orders
        # 1..3 are saturated, so only the brevity penalty remains
        got = bleu("the quick brown", ["the quick brown fox"])
        assert got == math.exp(1.0 - 4.0 / 3.0)

    def test_zero_precision_is_zero_without_smoothing(self):
        # no unigram overlap at all -> hard zero under plain scoring
        assert bleu("w x y z", ["a b c d"]) == 0.0

    def test_brevity_penalty_worked_example(self):
        # candidate 3 tokens, reference 4, all trigram orders saturated
        cand = "the quick brown"
        score = bleu(cand, ["the quick brown fox"], BleuParams(max_n=3))
        assert score == math.exp(1.0 - 4.0 / 3.0)

    def test_no_penalty_when_candidate_longer(self):
        cand = "the quick brown fox leaps"
        score = bleu(cand, ["the quick brown fox"], BleuParams(max_n=1))
        assert score == pytest.approx((Fraction(4, 5)) ** 1.0)

    def test_clipping(self):
        score = bleu("the the the the", ["the cat"], BleuParams(max_n=1))
        # "the" appears once in the reference: clipped to 1 of 4, no brevity
        # penalty because the candidate is longer than the reference
        assert score == pytest.approx(0.25, abs=1e-12)

    def test_closest_reference_length_breaks_ties_short(self):
        cand = "a b c"
        refs_equal_distance = ["w x", "w x y z"]  # lengths 2 and 4
        score = bleu(cand, refs_equal_distance, BleuParams(max_n=1))
        # r = 2, c = 3, candidate longer: no penalty; p1 = 0 -> score 0
        assert score == 0.0
        score = bleu("a b x", ["x y", "p q r s"], BleuParams(max_n=1))
        # one unigram matches; r = 2 ties broken to shorter, c = 3 >= r
        assert score == pytest.approx(Fraction(1, 3))

    def test_multiple_references_union_clip(self):
        score = bleu("the cat sat", ["the cat", "sat quietly"],
                     BleuParams(max_n=1))
        assert score == pytest.approx(1.0)

    def test_add_one_smoothing(self):
        cand = "alpha beta gamma delta"
        plain = bleu(cand, ["alpha beta gamma epsilon"])
        smoothed = bleu(cand, ["alpha beta gamma epsilon"],
                        BleuParams(smoothing="add_one"))
        assert plain == 0.0
        assert smoothed > 0.0

    def test_empty_candidate(self):
        assert bleu("", ["anything"]) == 0.0
        assert bleu("   ", ["anything"]) == 0.0

    def test_requires_references(self):
        with pytest.raises(InvalidInputError):
            bleu("text", [])

    def test_geometric_mean_hand_case(self):
        cand = "a b c d"
        ref = "a b c x"
        score = bleu(cand, [ref], BleuParams(max_n=2))
        p1 = Fraction(3, 4)
        p2 = Fraction(2, 3)
        expected = math.exp((math.log(float(p1)) + math.log(float(p2))) / 2.0)
        assert score == pytest.approx(expected, abs=1e-12)

    def test_params_validation(self):
        with pytest.raises(InvalidInputError):
            BleuParams(max_n=0)
        with pytest.raises(InvalidInputError):
            BleuParams(smoothing="laplace")


class TestParsingAccuracy:
    def test_shipped_corpus_is_clean(self, corpus_dir):
        result = parsing_accuracy(corpus_dir)
        assert result["total"] == 35
        assert result["parsed"] == 25
        assert result["fallback"] == 10
        assert result["accuracy"] == 1.0

    def test_detects_regressions(self, tmp_path):
        (tmp_path / "good_ok.txt").write_text("one\n---\ntwo\n---\nthree")
        (tmp_path / "lies_ok.json").write_text("{not json")
        result = parsing_accuracy(tmp_path)
        assert result["total"] == 2
        assert result["parsed"] == 1
        assert result["accuracy"] == 0.5

    def test_malformed_counted(self, tmp_path):
        (tmp_path / "a_ok.txt").write_text("one\n---\ntwo")
        (tmp_path / "broken_bad.json").write_text("[1,2]")
        (tmp_path / "sneaky_bad.txt").write_text("plain prose parses fine")
        result = parsing_accuracy(tmp_path)
        # a malformed fixture that parses is not a fallback
        assert result["total"] == 3
        assert result["fallback"] == 1

    def test_untagged_files_ignored(self, tmp_path):
        (tmp_path / "a_ok.txt").write_text("one\n---\ntwo")
        (tmp_path / "README.md").write_text("docs")
        result = parsing_accuracy(tmp_path)
        assert result["total"] == 1

    def test_empty_corpus_rejected(self, tmp_path):
        with pytest.raises(InvalidInputError):
            parsing_accuracy(tmp_path)

    def test_needs_wellformed_files(self, tmp_path):
        (tmp_path / "x_bad.txt").write_text("")
        with pytest.raises(InvalidInputError):
            parsing_accuracy(tmp_path)

    def test_missing_directory_rejected(self, tmp_path):
        with pytest.raises(InvalidInputError):
            parsing_accuracy(tmp_path / "nope")
