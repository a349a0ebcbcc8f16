"""Synthetic voiced-speech corpus: utterance synthesis, noise generators,
and the manifest format that binds audio files to reference F0 tracks.

Stands in for licensed speech corpora at desk scale. Reference files hold
one "time_ms f0_hz" pair per line with 0 marking unvoiced frames.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .audio import FrameSpec, SampleBuffer, load_wav, save_wav
from .track import FramePitchTrack

DEFAULT_FORMANTS = ((500.0, 80.0), (1500.0, 120.0), (2500.0, 160.0))


@dataclass(frozen=True)
class SynthUtteranceSpec:
    """Recipe for one synthetic voiced utterance."""

    f0_contour: tuple[tuple[float, float], ...]  # (time_ms, f0_hz) knots
    duration_ms: float = 600.0
    formant_set: tuple[tuple[float, float], ...] = DEFAULT_FORMANTS
    jitter_pct: float = 0.5
    rng_seed: int = 0
    sample_rate_hz: int = 8000

    def __post_init__(self):
        if self.duration_ms < 200.0:
            raise ValueError("duration_ms must be at least 200 ms")
        if not self.f0_contour:
            raise ValueError("f0_contour needs at least one knot")
        for _, hz in self.f0_contour:
            if not 50.0 <= hz <= 400.0:
                raise ValueError("contour F0 values must lie in [50, 400] Hz")
        if len(self.formant_set) != 3:
            raise ValueError("formant_set must name three resonances")

    def contour_at(self, times_ms) -> np.ndarray:
        knots_t = np.array([t for t, _ in self.f0_contour])
        knots_f = np.array([f for _, f in self.f0_contour])
        return np.interp(np.asarray(times_ms, dtype=np.float64), knots_t, knots_f)


def _resonator_coeffs(freq_hz: float, bw_hz: float, fs: int):
    r = np.exp(-np.pi * bw_hz / fs)
    theta = 2.0 * np.pi * freq_hz / fs
    return [1.0], [1.0, -2.0 * r * np.cos(theta), r * r]


def synthesize_utterance(spec: SynthUtteranceSpec, frame: FrameSpec = FrameSpec()
                         ) -> tuple[SampleBuffer, FramePitchTrack]:
    """Glottal-pulse train following the contour, shaped by three formant
    resonators, with per-period jitter.

    The ground-truth track is sampled at the analysis grid (10 ms hop),
    each frame's value taken at the frame center; frames only exist where a
    full analysis window fits, matching what any frame-based estimator can
    score.
    """
    fs = spec.sample_rate_hz
    n = int(round(spec.duration_ms * fs / 1000.0))
    rng = np.random.default_rng(spec.rng_seed)

    pulses = np.zeros(n)
    t = 0.0
    while t < n:
        pulses[int(t)] += 1.0
        f0 = float(spec.contour_at(1000.0 * t / fs))
        period = fs / f0
        if spec.jitter_pct > 0:
            wobble = np.clip(rng.standard_normal(), -3.0, 3.0)
            period *= 1.0 + wobble * spec.jitter_pct / 100.0
        t += period

    # -6 dB/oct glottal tilt, then the formant cascade
    x = lfilter([1.0], [1.0, -0.95], pulses)
    for freq, bw in spec.formant_set:
        b, a = _resonator_coeffs(freq, bw, fs)
        x = lfilter(b, a, x)
    peak = np.max(np.abs(x))
    if peak > 0:
        x = 0.5 * x / peak
    buf = SampleBuffer(x, fs)

    n_frames = frame.num_frames(n, fs)
    times = np.arange(n_frames) * frame.hop_ms
    truth_f0 = spec.contour_at(times + frame.frame_len_ms / 2.0)
    truth = FramePitchTrack(frame_times_ms=times, f0_hz=truth_f0,
                            voiced_mask=np.ones(n_frames, dtype=bool))
    return buf, truth


# ---------------------------------------------------------------------------
# Synthetic noise generators
# ---------------------------------------------------------------------------

NOISE_KINDS = ("white", "pink", "babble", "hum", "bursts", "shaped")


def make_noise(kind: str, n_samples: int, sample_rate_hz: int, seed: int = 0
               ) -> SampleBuffer:
    """Deterministic synthetic noise of the named kind, unit RMS."""
    rng = np.random.default_rng(seed)
    fs = sample_rate_hz
    if kind == "white":
        x = rng.standard_normal(n_samples)
    elif kind == "pink":
        # -3 dB/oct via 1/sqrt(f) spectral shaping
        white = rng.standard_normal(n_samples)
        spec = np.fft.rfft(white)
        freqs = np.fft.rfftfreq(n_samples, 1.0 / fs)
        freqs[0] = freqs[1] if freqs.size > 1 else 1.0
        x = np.fft.irfft(spec / np.sqrt(freqs), n_samples)
    elif kind == "shaped":
        # speech-shaped: white rolled off -6 dB/oct above 500 Hz
        white = rng.standard_normal(n_samples)
        spec = np.fft.rfft(white)
        freqs = np.fft.rfftfreq(n_samples, 1.0 / fs)
        gain = 1.0 / np.sqrt(1.0 + (freqs / 500.0) ** 2)
        x = np.fft.irfft(spec * gain, n_samples)
    elif kind == "hum":
        # engine-like idle: strong low tonal stack plus rumble
        times = np.arange(n_samples) / fs
        x = np.zeros(n_samples)
        for h, amp in ((1, 1.0), (2, 0.7), (3, 0.45), (4, 0.3)):
            phase = rng.uniform(0, 2 * np.pi)
            x += amp * np.sin(2 * np.pi * 55.0 * h * times + phase)
        x += 0.3 * lfilter([1.0], [1.0, -0.98], rng.standard_normal(n_samples))
    elif kind == "bursts":
        # sparse wideband clatter over a quiet floor
        x = 0.1 * rng.standard_normal(n_samples)
        n_bursts = max(1, n_samples // (fs // 4))
        for _ in range(n_bursts):
            start = int(rng.integers(0, max(1, n_samples - fs // 20)))
            width = int(rng.integers(fs // 100, fs // 20))
            stop = min(n_samples, start + width)
            x[start:stop] += rng.standard_normal(stop - start) * np.hanning(stop - start)
    elif kind == "babble":
        # several competing synthetic voices talking over each other
        x = np.zeros(n_samples)
        duration_ms = 1000.0 * n_samples / fs
        for v in range(6):
            f0_base = float(rng.uniform(70, 320))
            knots = tuple(
                (t, float(np.clip(f0_base * rng.uniform(0.8, 1.25), 50, 400)))
                for t in np.linspace(0, duration_ms, 5)
            )
            voice_spec = SynthUtteranceSpec(
                f0_contour=knots,
                duration_ms=max(200.0, duration_ms),
                formant_set=tuple(
                    (float(rng.uniform(lo, hi)), float(rng.uniform(80, 200)))
                    for lo, hi in ((300, 900), (900, 1800), (1800, 3000))
                ),
                jitter_pct=1.0,
                rng_seed=int(rng.integers(0, 2 ** 31)),
                sample_rate_hz=fs,
            )
            voice, _ = synthesize_utterance(voice_spec)
            x[:len(voice)] += voice.samples[:n_samples]
    else:
        raise ValueError(f"unknown noise kind {kind!r}; expected one of {NOISE_KINDS}")
    rms = float(np.sqrt(np.mean(x ** 2)))
    return SampleBuffer(x / rms if rms > 0 else x, fs)


# ---------------------------------------------------------------------------
# Corpus items, reference files, and manifests
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CorpusItem:
    name: str
    audio: SampleBuffer
    truth: FramePitchTrack


def write_reference(path, track: FramePitchTrack) -> None:
    """One "time_ms f0_hz" pair per line; 0 marks unvoiced frames."""
    with open(path, "w") as fh:
        for t, f0, voiced in zip(track.frame_times_ms, track.f0_hz,
                                 track.voiced_mask):
            value = f0 if voiced and np.isfinite(f0) else 0.0
            fh.write(f"{t:.1f} {value:.4f}\n")


def read_reference(path) -> FramePitchTrack:
    times, f0s, voiced = [], [], []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            t_str, f_str = line.split()
            t, f0 = float(t_str), float(f_str)
            times.append(t)
            voiced.append(f0 > 0)
            f0s.append(f0 if f0 > 0 else np.nan)
    if not times:
        raise ValueError(f"empty reference file {path}")
    return FramePitchTrack(frame_times_ms=np.array(times), f0_hz=np.array(f0s),
                           voiced_mask=np.array(voiced, dtype=bool))


def write_manifest(path, entries: list[tuple[str, str]]) -> None:
    """Rows of "wav_path ref_path", relative to the manifest's directory."""
    with open(path, "w") as fh:
        for wav_path, ref_path in entries:
            fh.write(f"{wav_path} {ref_path}\n")


def load_manifest(path) -> list[CorpusItem]:
    base = os.path.dirname(os.path.abspath(path))
    items = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            wav_rel, ref_rel = line.split()
            wav_path = os.path.join(base, wav_rel)
            ref_path = os.path.join(base, ref_rel)
            name = os.path.splitext(os.path.basename(wav_rel))[0]
            items.append(CorpusItem(name=name, audio=load_wav(wav_path),
                                    truth=read_reference(ref_path)))
    if not items:
        raise ValueError(f"manifest {path} lists no utterances")
    return items


def generate_corpus(out_dir, count: int = 20, seed: int = 0,
                    duration_ms: float = 600.0, sample_rate_hz: int = 8000,
                    low_fraction: float = 0.5,
                    frame: FrameSpec = FrameSpec()) -> str:
    """Write WAVs, reference tracks, and a manifest; returns the manifest path.

    Half the contours (by low_fraction) stay at or below 200 Hz, the rest
    above, so separation experiments see both regions.
    """
    os.makedirs(out_dir, exist_ok=True)
    rng = np.random.default_rng(seed)
    entries = []
    n_low = int(round(count * low_fraction))
    for i in range(count):
        low = i < n_low
        if low:
            base = float(rng.uniform(90, 170))
            span = float(rng.uniform(0.85, 1.15))
            lo_bound, hi_bound = 55.0, 195.0
        else:
            base = float(rng.uniform(230, 340))
            span = float(rng.uniform(0.85, 1.15))
            lo_bound, hi_bound = 210.0, 395.0
        knots = tuple(
            (t, float(np.clip(base * span ** k, lo_bound, hi_bound)))
            for k, t in enumerate(np.linspace(0, duration_ms, 4))
        )
        formants = tuple(
            (float(rng.uniform(lo, hi)), float(rng.uniform(80, 180)))
            for lo, hi in ((450, 900), (1000, 1900), (2100, 3100))
        )
        spec = SynthUtteranceSpec(
            f0_contour=knots, duration_ms=duration_ms, formant_set=formants,
            jitter_pct=0.5, rng_seed=int(rng.integers(0, 2 ** 31)),
            sample_rate_hz=sample_rate_hz,
        )
        audio, truth = synthesize_utterance(spec, frame)
        tag = "low" if low else "high"
        wav_name = f"utt_{i:03d}_{tag}.wav"
        ref_name = f"utt_{i:03d}_{tag}.f0"
        save_wav(os.path.join(out_dir, wav_name), audio)
        write_reference(os.path.join(out_dir, ref_name), truth)
        entries.append((wav_name, ref_name))
    manifest_path = os.path.join(out_dir, "manifest.txt")
    write_manifest(manifest_path, entries)
    return manifest_path


def write_noise_set(out_dir, kinds=NOISE_KINDS, duration_ms: float = 3000.0,
                    sample_rate_hz: int = 8000, seed: int = 0) -> dict[str, str]:
    """Materialize one WAV per noise kind; returns kind -> path."""
    os.makedirs(out_dir, exist_ok=True)
    n = int(round(duration_ms * sample_rate_hz / 1000.0))
    paths = {}
    for k, kind in enumerate(kinds):
        buf = make_noise(kind, n, sample_rate_hz, seed=seed + k)
        path = os.path.join(out_dir, f"{kind}.wav")
        # unit-RMS noise exceeds 16-bit full scale; store at 0.2 RMS
        save_wav(path, SampleBuffer(buf.samples * 0.2, sample_rate_hz))
        paths[kind] = path
    return paths
