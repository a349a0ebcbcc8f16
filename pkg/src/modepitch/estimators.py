"""Frame-level F0 estimators: harmonic-summation (PEFAC-lite), SHR, SWIPE,
and envelope-ACF candidates from decomposition modes (HHT-Amp style).

PEFAC-lite implements the harmonic-summation comb filter on a log-frequency
power spectrum with a zero-mean normalization, not the full published PEFAC
front end.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .audio import Frame, FrameSpec, SampleBuffer
from .emd import ImfSet
from .spectral import (
    LogSpectrum,
    Spectrum,
    autocorrelation,
    envelope,
    magnitude_spectrum,
    next_pow2,
    power_spectrum,
    to_log_frequency,
)


@dataclass(frozen=True)
class EstimatorConfig:
    f_min: float = 50.0
    f_max: float = 400.0               # search ceiling for pefac/shr/hht
    swipe_f_max: float = 500.0         # swipe searches [f_min, 500] Hz
    shr_threshold: float = 0.4
    shr_max_harmonics: int = 8
    swipe_bins_per_octave: int = 48
    swipe_num_peaks: int = 5
    pefac_num_harmonics: int = 10
    pefac_compression: float = 0.5
    bins_per_octave: int = 48
    hht_num_imfs: int = 3
    window: str = "hann"

    def __post_init__(self):
        if not 0 < self.f_min < self.f_max:
            raise ValueError("need 0 < f_min < f_max")
        if self.swipe_f_max <= self.f_min:
            raise ValueError("swipe_f_max must exceed f_min")


@dataclass(frozen=True)
class PitchCandidate:
    f0_hz: float
    salience: float
    source: str  # "pefac", "shr", "swipe", or "hht_imf<k>"


@dataclass(frozen=True)
class FrameCandidates:
    """All candidates proposed for one analysis frame."""

    start_ms: float
    candidates: list[PitchCandidate]


def _check_frame(frame, cfg: EstimatorConfig) -> tuple[np.ndarray, int]:
    x = np.asarray(frame.samples, dtype=np.float64)
    fs = frame.sample_rate_hz
    if x.size / fs < 2.0 / cfg.f_min:
        raise ValueError(
            f"frame of {1000 * x.size / fs:.1f} ms is shorter than two pitch "
            f"periods at f_min={cfg.f_min} Hz")
    if not np.any(x):
        raise ValueError("degenerate frame (all zeros)")
    return x, fs


def _candidate_grid(f_min: float, f_max: float, bins_per_octave: int) -> np.ndarray:
    step = 1.0 / bins_per_octave
    n = int(np.floor((np.log2(f_max) - np.log2(f_min)) / step)) + 1
    return 2.0 ** (np.log2(f_min) + step * np.arange(n))


def _parabolic_refine(y: np.ndarray, i: int) -> float:
    """Fractional index of the peak around y[i], by parabola through 3 points."""
    if i <= 0 or i >= y.size - 1:
        return float(i)
    if not (np.isfinite(y[i - 1]) and np.isfinite(y[i]) and np.isfinite(y[i + 1])):
        return float(i)
    denom = y[i - 1] - 2.0 * y[i] + y[i + 1]
    if denom == 0.0:
        return float(i)
    return i + 0.5 * (y[i - 1] - y[i + 1]) / denom


# ---------------------------------------------------------------------------
# PEFAC-lite: harmonic-summation comb on the log-frequency power spectrum
# ---------------------------------------------------------------------------

def harmonic_summation_scores(logspec: LogSpectrum, cand_hz: np.ndarray,
                              num_harmonics: int = 10) -> np.ndarray:
    """Comb-filter response at each candidate F0.

    The filter places impulses of weight w_h = 1/sqrt(h) at log2(h) for
    h = 1..H and impulses of weight -w_h/2 at the flanking half-harmonic
    positions log2(h -+ 1/2), so its coefficients sum to zero and a flat
    noise spectrum scores exactly zero. The decaying weights resist
    halving errors; keeping them shallow (1/sqrt rather than 1/h) keeps
    bandlimited inputs, whose low harmonics are absent, scorable.
    Harmonics are truncated per candidate where (h + 1/2)*f0 would leave
    the spectrum's support.
    """
    top_log2 = logspec.grid_log2()[-1]
    scores = np.empty(cand_hz.size)
    for i, f0 in enumerate(cand_hz):
        base = math.log2(f0)
        h_max = min(num_harmonics, int(2.0 ** (top_log2 - base) - 0.5))
        if h_max < 1:
            scores[i] = -np.inf
            continue
        h = np.arange(1, h_max + 1)
        weights = 1.0 / np.sqrt(h)
        peaks = logspec.sample(base + np.log2(h))
        valleys_lo = logspec.sample(base + np.log2(h - 0.5))
        valleys_hi = logspec.sample(base + np.log2(h + 0.5))
        scores[i] = float(np.dot(weights, peaks - 0.5 * (valleys_lo + valleys_hi)))
    return scores


def pefac_scores(frame: Frame | SampleBuffer, cfg: EstimatorConfig = EstimatorConfig()
                 ) -> tuple[np.ndarray, np.ndarray]:
    """Candidate grid and comb response for one frame.

    The log-frequency power spectrum is amplitude-compressed
    (power**pefac_compression) before filtering so formant peaks cannot
    drown the harmonic pattern.
    """
    x, fs = _check_frame(frame, cfg)
    nfft = next_pow2(4 * x.size)
    spec = power_spectrum(x, fs, nfft, window=cfg.window)
    f_hi = min(fs / 2.0, cfg.f_max * (cfg.pefac_num_harmonics + 0.5))
    logspec = to_log_frequency(spec, cfg.f_min / 2.0, f_hi, cfg.bins_per_octave)
    compressed = LogSpectrum(values=logspec.values ** cfg.pefac_compression,
                             log2_f_start=logspec.log2_f_start,
                             step_log2=logspec.step_log2)
    cands = _candidate_grid(cfg.f_min, cfg.f_max, cfg.bins_per_octave)
    return cands, harmonic_summation_scores(compressed, cands,
                                            cfg.pefac_num_harmonics)


def pefac_estimate(frame: Frame | SampleBuffer, cfg: EstimatorConfig = EstimatorConfig()
                   ) -> PitchCandidate:
    """Pick the F0 maximizing the harmonic-summation response."""
    cands, scores = pefac_scores(frame, cfg)
    best = int(np.argmax(scores))
    refined = _parabolic_refine(scores, best)
    f0 = float(np.clip(cands[0] * 2.0 ** (refined / cfg.bins_per_octave),
                       cfg.f_min, cfg.f_max))
    return PitchCandidate(f0_hz=f0, salience=float(scores[best]), source="pefac")


# ---------------------------------------------------------------------------
# SHR: subharmonic-to-harmonic amplitude ratio
# ---------------------------------------------------------------------------

def subharmonic_ratio_curves(logspec: LogSpectrum, cand_hz: np.ndarray,
                             max_harmonics: int = 8
                             ) -> tuple[np.ndarray, np.ndarray]:
    """Harmonic sum SH(F0) and subharmonic sum SS(F0) per candidate.

    SH sums amplitudes at n*F0, SS at (n - 1/2)*F0, n = 1..N, both truncated
    where positions leave the spectrum support.
    """
    top_log2 = logspec.grid_log2()[-1]
    sh = np.empty(cand_hz.size)
    ss = np.empty(cand_hz.size)
    for i, f0 in enumerate(cand_hz):
        base = math.log2(f0)
        n_max = min(max_harmonics, int(2.0 ** (top_log2 - base)))
        n_max = max(n_max, 1)
        n = np.arange(1, n_max + 1)
        sh[i] = float(np.sum(logspec.sample(base + np.log2(n))))
        ss[i] = float(np.sum(logspec.sample(base + np.log2(n - 0.5))))
    return sh, ss


def shr_estimate(frame: Frame | SampleBuffer, cfg: EstimatorConfig = EstimatorConfig()
                 ) -> PitchCandidate:
    """Harmonic-sum peak, demoted one octave when the subharmonic-to-harmonic
    ratio exceeds the threshold."""
    x, fs = _check_frame(frame, cfg)
    nfft = next_pow2(4 * x.size)
    spec = magnitude_spectrum(x, fs, nfft, window=cfg.window)
    f_hi = min(fs / 2.0, cfg.f_max * (cfg.shr_max_harmonics + 0.5))
    logspec = to_log_frequency(spec, cfg.f_min / 2.0, f_hi, cfg.bins_per_octave)
    cands = _candidate_grid(cfg.f_min, cfg.f_max, cfg.bins_per_octave)
    sh, ss = subharmonic_ratio_curves(logspec, cands, cfg.shr_max_harmonics)
    best = int(np.argmax(sh))
    sh_best = float(sh[best])
    ss_best = float(ss[best])
    shr = ss_best / sh_best if sh_best > 0 else 0.0
    f0 = float(cands[best])
    if shr > cfg.shr_threshold and f0 / 2.0 >= cfg.f_min:
        f0 /= 2.0
    total = sh_best + ss_best
    salience = max(0.0, (sh_best - ss_best) / total) if total > 0 else 0.0
    return PitchCandidate(f0_hz=f0, salience=salience, source="shr")


# ---------------------------------------------------------------------------
# SWIPE: average peak-to-valley distance of a harmonic comb
# ---------------------------------------------------------------------------

def swipe_apvd(spec: Spectrum, cand_hz: np.ndarray, num_peaks: int = 5) -> np.ndarray:
    """Average peak-to-valley distance D(f) per candidate.

    d_n(f) = |X(nf)| - ([|X((n-1/2)f)| + |X((n+1/2)f)|]) / 2, averaged over
    the first num_peaks peaks; peaks whose upper valley leaves the spectrum
    are dropped and the average renormalized.
    """
    freqs = spec.frequencies()
    mags = spec.bins
    top = freqs[-1]
    scores = np.empty(cand_hz.size)
    for i, f0 in enumerate(cand_hz):
        p = min(num_peaks, int(top / f0 - 0.5))
        if p < 1:
            scores[i] = -np.inf
            continue
        n = np.arange(1, p + 1)
        peak = np.interp(n * f0, freqs, mags)
        val_lo = np.interp((n - 0.5) * f0, freqs, mags)
        val_hi = np.interp((n + 0.5) * f0, freqs, mags)
        scores[i] = float(np.mean(peak - 0.5 * (val_lo + val_hi)))
    return scores


def swipe_estimate(frame: Frame | SampleBuffer, cfg: EstimatorConfig = EstimatorConfig()
                   ) -> PitchCandidate:
    """F0 whose harmonic comb best matches the magnitude spectrum."""
    x, fs = _check_frame(frame, cfg)
    nfft = next_pow2(4 * x.size)
    spec = magnitude_spectrum(x, fs, nfft, window=cfg.window)
    cands = _candidate_grid(cfg.f_min, cfg.swipe_f_max, cfg.swipe_bins_per_octave)
    scores = swipe_apvd(spec, cands, cfg.swipe_num_peaks)
    best = int(np.argmax(scores))
    refined = _parabolic_refine(scores, best)
    f0 = float(np.clip(cands[0] * 2.0 ** (refined / cfg.swipe_bins_per_octave),
                       cfg.f_min, cfg.swipe_f_max))
    return PitchCandidate(f0_hz=f0, salience=float(scores[best]), source="swipe")


# ---------------------------------------------------------------------------
# HHT-Amp: candidates from the envelope ACF of each decomposition mode
# ---------------------------------------------------------------------------

def _first_acf_peak(r: np.ndarray, tau_min: int, tau_max: int) -> int | None:
    """Smallest lag in [tau_min, tau_max] that is a local maximum:
    r(t) > r(t-1) and r(t) >= r(t+1)."""
    hi = min(tau_max, r.size - 2)
    for tau in range(max(tau_min, 1), hi + 1):
        if r[tau] > r[tau - 1] and r[tau] >= r[tau + 1]:
            return tau
    return None


def hht_candidates(voiced_segment: SampleBuffer, imfs: ImfSet,
                   cfg: EstimatorConfig = EstimatorConfig(),
                   frame: FrameSpec = FrameSpec()) -> list[FrameCandidates]:
    """Per 10 ms interval, one candidate from each of the first modes.

    Mode k contributes f0 = fs / tau0 where tau0 is the smallest lag of a
    local ACF maximum of its instantaneous-amplitude envelope, searched in
    [fs/f_max, fs/f_min]. The envelope mean is removed per window before the
    ACF so the lag peak is not dragged by the raw envelope's DC pedestal;
    salience is the normalized peak r(tau0)/r(0). Modes with no peak in
    range contribute nothing for that interval.
    """
    if len(imfs) < cfg.hht_num_imfs:
        raise ValueError(
            f"need {cfg.hht_num_imfs} modes for candidate extraction, "
            f"got {len(imfs)}")
    fs = voiced_segment.sample_rate_hz
    tau_min = int(math.ceil(fs / cfg.f_max))
    tau_max = int(math.floor(fs / cfg.f_min))
    flen = frame.frame_len(fs)
    hop = frame.hop(fs)
    n = imfs.source_len
    if n < flen:
        return []
    envelopes = [envelope(imfs.imfs[k].samples) for k in range(cfg.hht_num_imfs)]

    out: list[FrameCandidates] = []
    n_frames = (n - flen) // hop + 1
    for i in range(n_frames):
        start = i * hop
        cands: list[PitchCandidate] = []
        for k, env in enumerate(envelopes):
            w = env[start:start + flen]
            mean = w.mean()
            w = w - mean
            # an unmodulated envelope carries no pitch cue; the depth floor
            # also rejects numerical ripple in the analytic envelope
            if w.std() <= 1e-4 * max(abs(mean), 1e-30):
                continue
            max_lag = min(tau_max + 1, flen - 1)
            r = autocorrelation(w, max_lag)
            if r[0] <= 0.0:
                continue
            tau0 = _first_acf_peak(r, tau_min, tau_max)
            if tau0 is None or r[tau0] <= 0.0:
                continue
            tau_ref = _parabolic_refine(r, tau0)
            f0 = float(np.clip(fs / tau_ref, cfg.f_min, cfg.f_max))
            cands.append(PitchCandidate(
                f0_hz=f0,
                salience=float(r[tau0] / r[0]),
                source=f"hht_imf{k + 1}",
            ))
        out.append(FrameCandidates(start_ms=1000.0 * start / fs, candidates=cands))
    return out


def hht_select(cands: list[PitchCandidate]) -> PitchCandidate | None:
    """Best candidate by salience; ties go to the lowest mode index.

    Returns None for an empty list (unvoiced / no estimate).
    """
    best = None
    for cand in cands:
        if best is None or cand.salience > best.salience:
            best = cand
    return best


FRAME_ESTIMATORS = {
    "pefac": pefac_estimate,
    "shr": shr_estimate,
    "swipe": swipe_estimate,
}


def estimate_frame(name: str, frame: Frame | SampleBuffer,
                   cfg: EstimatorConfig = EstimatorConfig()) -> PitchCandidate:
    """Dispatch a single-candidate estimator by name."""
    try:
        fn = FRAME_ESTIMATORS[name]
    except KeyError:
        raise ValueError(f"unknown estimator {name!r}; "
                         f"expected one of {sorted(FRAME_ESTIMATORS)} or 'hht'")
    return fn(frame, cfg)
