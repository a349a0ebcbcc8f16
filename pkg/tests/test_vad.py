import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FS, tone
from modepitch.audio import SampleBuffer, frame_signal
from modepitch.vad import VadConfig, detect_voiced, voiced_segments


class TestDetectVoiced:
    def test_pure_tone_all_voiced(self):
        mask = detect_voiced(tone(120.0, 1.0), VadConfig())
        assert mask.all()

    def test_quiet_noise_all_unvoiced(self, rng):
        # white noise at 1% of a loud tone's energy: fails both gates
        voice = tone(120.0, 0.5).samples
        noise = rng.standard_normal(len(voice))
        noise *= np.sqrt(0.01 * np.mean(voice ** 2) / np.mean(noise ** 2))
        buf = SampleBuffer(np.concatenate([voice, noise]), FS)
        mask = detect_voiced(buf, VadConfig())
        n_voice_frames = VadConfig().frame_spec().num_frames(len(voice), FS)
        assert not mask[n_voice_frames + 2:].any()

    def test_tone_silence_tone_boundaries(self):
        cfg = VadConfig()
        seg = tone(150.0, 0.4).samples
        gap = np.zeros(int(0.4 * FS))
        buf = SampleBuffer(np.concatenate([seg, gap, seg]), FS)
        mask = detect_voiced(buf, cfg)
        spec = cfg.frame_spec()
        hop = spec.hop(FS)
        flen = spec.frame_len(FS)
        truth = []
        for i in range(len(mask)):
            window = buf.samples[i * hop:i * hop + flen]
            truth.append(np.mean(window ** 2) > 0.01)
        truth = np.array(truth)
        disagreements = np.flatnonzero(mask != truth)
        # transitions may smear by the hangover, but no more than 2 frames
        for i in disagreements:
            boundary_dist = np.min(np.abs(
                np.flatnonzero(np.diff(truth.astype(int)) != 0) - i))
            assert boundary_dist <= 2

    def test_mask_length_matches_frame_count(self, rng):
        for n_ms in (300, 777, 1234):
            n = int(n_ms * FS / 1000)
            buf = SampleBuffer(rng.standard_normal(n), FS)
            cfg = VadConfig()
            mask = detect_voiced(buf, cfg)
            assert len(mask) == len(frame_signal(buf, cfg.frame_spec()))

    @settings(max_examples=30, deadline=None)
    @given(gain=st.floats(min_value=1e-4, max_value=1e4), seed=st.integers(0, 99))
    def test_amplitude_scale_invariance(self, gain, seed):
        gen = np.random.default_rng(seed)
        voice = tone(130.0, 0.3).samples
        noise = 0.02 * gen.standard_normal(int(0.3 * FS))
        base = np.concatenate([voice, noise])
        mask_1 = detect_voiced(SampleBuffer(base, FS), VadConfig())
        mask_g = detect_voiced(SampleBuffer(base * gain, FS), VadConfig())
        np.testing.assert_array_equal(mask_1, mask_g)

    def test_too_short_rejected(self):
        with pytest.raises(ValueError):
            detect_voiced(SampleBuffer(np.ones(10), FS), VadConfig())

    def test_all_zero_unvoiced(self):
        mask = detect_voiced(SampleBuffer(np.zeros(FS) + 0.0, FS), VadConfig())
        assert not mask.any()


class TestVoicedSegments:
    def test_runs_extracted(self):
        mask = np.array([0, 1, 1, 1, 0, 0, 1, 1, 0], dtype=bool)
        assert voiced_segments(mask) == [(1, 3), (6, 7)]

    def test_open_ended_run(self):
        mask = np.array([0, 0, 1, 1], dtype=bool)
        assert voiced_segments(mask) == [(2, 3)]

    def test_empty(self):
        assert voiced_segments(np.zeros(5, dtype=bool)) == []
