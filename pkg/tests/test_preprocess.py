import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thermact.core import ThermalFrame, ThermalSequence
from thermact.preprocess import (
    BackgroundModel,
    add_background,
    estimate_background,
    resample_equal_interval,
    resample_indices,
    subtract_background,
)
from thermact.synth import SceneParams, blob_field, builtin_scripts, frame_times, render_sequence


def seq_of(values, stage="raw"):
    frames = tuple(ThermalFrame(pixels=np.full(64, v)) for v in values)
    return ThermalSequence(frames=frames, stage=stage)


class TestEstimateBackground:
    def test_constant_frames(self):
        bg = estimate_background(seq_of([21.0] * 5))
        assert np.all(bg.mean_pixels == 21.0)
        assert bg.source_frame_count == 5

    def test_alternating_frames(self):
        bg = estimate_background(seq_of([20.0, 22.0] * 3))
        assert np.allclose(bg.mean_pixels, 21.0)

    def test_single_frame_returns_its_pixels(self):
        rng = np.random.default_rng(0)
        pixels = rng.uniform(15.0, 25.0, 64)
        seq = ThermalSequence(frames=(ThermalFrame(pixels=pixels),))
        bg = estimate_background(seq)
        assert np.array_equal(bg.mean_pixels, pixels)

    def test_noisy_mean_matches_summation_oracle(self, rng):
        mu = rng.uniform(18.0, 24.0, 64)
        sigma = 0.3
        n = 100
        samples = rng.normal(mu, sigma, (n, 64)).clip(0.0, 80.0)
        seq = ThermalSequence(frames=tuple(ThermalFrame(pixels=row) for row in samples))
        bg = estimate_background(seq)
        # independent oracle: plain accumulation loop
        totals = np.zeros(64)
        for row in samples:
            totals += row
        assert np.allclose(bg.mean_pixels, totals / n, atol=1e-12)
        assert np.all(np.abs(bg.mean_pixels - mu) < 3.0 * sigma / np.sqrt(n) + 4 * sigma / np.sqrt(n))

    def test_rejects_subtracted_input(self):
        with pytest.raises(ValueError, match="raw"):
            estimate_background(seq_of([1.0], stage="subtracted"))


class TestSubtractBackground:
    def test_self_subtraction_zeros(self):
        seq = seq_of([21.0] * 4)
        bg = estimate_background(seq)
        out = subtract_background(seq, bg)
        assert out.stage == "subtracted"
        assert np.all(out.pixel_matrix() == 0.0)

    def test_constant_offset(self):
        seq = seq_of([25.0] * 3)
        bg = BackgroundModel(mean_pixels=np.full(64, 21.0), source_frame_count=1)
        out = subtract_background(seq, bg)
        assert np.all(out.pixel_matrix() == 4.0)

    def test_double_subtraction_rejected(self):
        seq = seq_of([25.0] * 3)
        bg = BackgroundModel(mean_pixels=np.full(64, 21.0), source_frame_count=1)
        out = subtract_background(seq, bg)
        with pytest.raises(ValueError, match="already"):
            subtract_background(out, bg)

    def test_metadata_preserved(self):
        frames = (ThermalFrame(pixels=np.full(64, 22.0), timestamp_ms=123),) * 2
        seq = ThermalSequence(frames=frames, label="fall", subject_id="s1", session_id="r1")
        out = subtract_background(seq, estimate_background(seq))
        assert (out.label, out.subject_id, out.session_id) == ("fall", "s1", "r1")
        assert out.frames[0].timestamp_ms == 123

    def test_round_trip_add_back(self):
        scene = SceneParams()
        seq = render_sequence(scene, builtin_scripts(np.random.default_rng(5))["fall"], seed=5)
        bg = BackgroundModel(
            mean_pixels=scene.ambient_mean + scene.ambient_pixel_offsets,
            source_frame_count=1,
        )
        restored = add_background(subtract_background(seq, bg), bg)
        assert np.allclose(restored.pixel_matrix(), seq.pixel_matrix(), atol=1e-12)

    def test_energy_concentrates_on_blob(self):
        # Oracle: the generator's noise-free blob field marks body pixels.
        scene = SceneParams(noise_std=0.05, quantize_step=0.0)
        script = builtin_scripts(np.random.default_rng(2))["sit_still"]
        seq = render_sequence(scene, script, seed=2)
        u = np.clip(frame_times(scene, script) / script.duration_s, 0, 1)
        blob = blob_field(script, u)
        on_mask = blob.max(axis=0) > 1.0
        off_mask = blob.max(axis=0) < 0.05
        assert on_mask.any() and off_mask.any()
        bg = BackgroundModel(
            mean_pixels=scene.ambient_mean + scene.ambient_pixel_offsets,
            source_frame_count=1,
        )
        residual = subtract_background(seq, bg).pixel_matrix()
        on_energy = np.mean(residual[:, on_mask] ** 2)
        off_energy = np.mean(residual[:, off_mask] ** 2)
        assert on_energy > 100 * off_energy


class TestResample:
    def test_identity_when_lengths_match(self):
        seq = seq_of(np.linspace(18, 24, 20))
        out = resample_equal_interval(seq, 20)
        assert out == seq

    def test_endpoints_kept(self):
        seq = seq_of([18.0, 20.0, 22.0])
        out = resample_equal_interval(seq, 2)
        assert np.all(out.frames[0].pixels == 18.0)
        assert np.all(out.frames[1].pixels == 22.0)

    def test_formula_enumeration_oracle(self):
        # brute-force the rounding formula for every output slot
        for length, target in [(100, 20), (30, 20), (10, 20), (7, 3), (5, 5), (9, 4)]:
            expected = []
            for j in range(target):
                exact = j * (length - 1) / (target - 1)
                expected.append(int(np.floor(exact + 0.5)))
            assert list(resample_indices(length, target)) == expected

    def test_hundred_to_twenty_starts_as_documented(self):
        idx = resample_indices(100, 20)
        assert idx[0] == 0 and idx[-1] == 99
        assert list(idx[:3]) == [0, 5, 10]

    def test_half_up_tie(self):
        # length 26 -> target 6: slot 1 lands exactly on 5.0? craft a real tie:
        # length 11, target 5: j=2 -> 2*10/4 = 5.0 (no tie); j with .5 ties:
        # length 6, target 11: j=1 -> 1*5/10 = 0.5 -> rounds up to 1.
        assert resample_indices(6, 11)[1] == 1

    def test_upsampling_duplicates(self):
        seq = seq_of([18.0, 20.0])
        out = resample_equal_interval(seq, 4)
        assert len(out) == 4
        values = [f.pixels[0] for f in out.frames]
        assert values == [18.0, 18.0, 20.0, 20.0]

    @settings(max_examples=60, deadline=None)
    @given(
        length=st.integers(min_value=1, max_value=200),
        target=st.integers(min_value=1, max_value=200),
    )
    def test_order_and_idempotence(self, length, target):
        idx = resample_indices(length, target)
        assert len(idx) == target
        assert np.all(idx >= 0) and np.all(idx < length)
        assert np.all(np.diff(idx) >= 0)
        if target <= length and target > 1:
            assert np.all(np.diff(idx) >= 1)
        # resampling a target-length result to the same target is the identity
        assert np.array_equal(resample_indices(target, target), np.arange(target))

    def test_rejects_bad_target(self):
        with pytest.raises(ValueError):
            resample_indices(10, 0)
