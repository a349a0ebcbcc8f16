import numpy as np
import pytest

from conftest import FS
from modepitch.audio import FrameSpec
from modepitch.corpus import (
    NOISE_KINDS,
    SynthUtteranceSpec,
    generate_corpus,
    load_manifest,
    make_noise,
    read_reference,
    synthesize_utterance,
    write_reference,
)
from modepitch.spectral import autocorrelation
from modepitch.track import FramePitchTrack


class TestSynthesize:
    def test_flat_contour_acf_period(self):
        spec = SynthUtteranceSpec(f0_contour=((0, 120.0), (600, 120.0)),
                                  duration_ms=600, jitter_pct=0.0, rng_seed=0)
        buf, _ = synthesize_utterance(spec)
        period = FS / 120.0
        r = autocorrelation(buf.samples, int(2.5 * period))
        lo, hi = int(period * 0.9), int(period * 1.1)
        peak = lo + int(np.argmax(r[lo:hi]))
        assert abs(peak - period) <= 1.5

    def test_linear_contour_truth_is_linear(self):
        spec = SynthUtteranceSpec(f0_contour=((0, 200.0), (600, 300.0)),
                                  duration_ms=600, jitter_pct=0.0, rng_seed=0)
        _, truth = synthesize_utterance(spec)
        t = truth.frame_times_ms + 45.0  # frame centers
        expected = 200.0 + (300.0 - 200.0) * t / 600.0
        np.testing.assert_allclose(truth.f0_hz, expected, rtol=1e-12)

    def test_jitter_bounded(self):
        spec = SynthUtteranceSpec(f0_contour=((0, 100.0), (1000, 100.0)),
                                  duration_ms=1000, jitter_pct=1.0, rng_seed=5)
        buf, _ = synthesize_utterance(spec)
        # measure pulse periods from the excitation peaks
        x = np.abs(np.diff(buf.samples, prepend=0.0))
        nominal = FS / 100.0
        peaks = []
        i = 0
        while i < len(x) - 1:
            j = i + int(0.5 * nominal) + int(np.argmax(x[i + int(0.5 * nominal):
                                                         i + int(1.5 * nominal)]))
            peaks.append(j)
            i = j
            if j + int(1.5 * nominal) >= len(x):
                break
        periods = np.diff(peaks)
        deviation = np.abs(periods - nominal) / nominal
        assert np.max(deviation) <= 0.03  # 1% sigma clipped at 3 sigma

    def test_truth_grid_matches_analysis_frames(self):
        spec = SynthUtteranceSpec(f0_contour=((0, 150.0), (500, 150.0)),
                                  duration_ms=500, rng_seed=1)
        buf, truth = synthesize_utterance(spec, FrameSpec())
        assert len(truth) == FrameSpec().num_frames(len(buf), FS)
        assert truth.voiced_mask.all()

    def test_contour_bounds_enforced(self):
        with pytest.raises(ValueError):
            SynthUtteranceSpec(f0_contour=((0, 450.0),), duration_ms=300)

    def test_min_duration_enforced(self):
        with pytest.raises(ValueError):
            SynthUtteranceSpec(f0_contour=((0, 100.0),), duration_ms=100)


class TestNoise:
    @pytest.mark.parametrize("kind", NOISE_KINDS)
    def test_unit_rms_and_deterministic(self, kind):
        a = make_noise(kind, 8000, FS, seed=3)
        b = make_noise(kind, 8000, FS, seed=3)
        assert np.array_equal(a.samples, b.samples)
        assert np.sqrt(np.mean(a.samples ** 2)) == pytest.approx(1.0, rel=1e-6)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError, match="unknown noise"):
            make_noise("ocean", 1000, FS)

    def test_pink_rolls_off(self):
        buf = make_noise("pink", 32768, FS, seed=1)
        spec = np.abs(np.fft.rfft(buf.samples)) ** 2
        freqs = np.fft.rfftfreq(len(buf), 1 / FS)
        low = spec[(freqs > 50) & (freqs < 200)].mean()
        high = spec[(freqs > 2000) & (freqs < 3500)].mean()
        assert low > 5 * high


class TestManifest:
    def test_reference_roundtrip(self, tmp_path):
        track = FramePitchTrack(
            frame_times_ms=np.array([0.0, 10.0, 20.0]),
            f0_hz=np.array([100.0, np.nan, 250.0]),
            voiced_mask=np.array([True, False, True]))
        path = tmp_path / "ref.f0"
        write_reference(path, track)
        loaded = read_reference(path)
        np.testing.assert_allclose(loaded.frame_times_ms, track.frame_times_ms)
        np.testing.assert_array_equal(loaded.voiced_mask, track.voiced_mask)
        assert loaded.f0_hz[0] == pytest.approx(100.0, abs=1e-3)
        assert np.isnan(loaded.f0_hz[1])

    def test_generate_and_load_corpus(self, tmp_path):
        manifest = generate_corpus(tmp_path / "corpus", count=4, seed=0,
                                   duration_ms=300.0)
        items = load_manifest(manifest)
        assert len(items) == 4
        low_items = [i for i in items if "low" in i.name]
        high_items = [i for i in items if "high" in i.name]
        assert len(low_items) == 2 and len(high_items) == 2
        for item in low_items:
            assert np.nanmax(item.truth.f0_hz) <= 200.0
        for item in high_items:
            assert np.nanmin(item.truth.f0_hz) > 200.0

    def test_empty_manifest_rejected(self, tmp_path):
        path = tmp_path / "empty.txt"
        path.write_text("")
        with pytest.raises(ValueError, match="no utterances"):
            load_manifest(path)
