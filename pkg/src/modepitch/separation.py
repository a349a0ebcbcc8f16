"""Low/high frequency separation of voiced frames and octave-error correction.

Per frame, F0 is estimated independently on the first decomposition modes;
the two modes whose estimates vary least against the others are selected,
and their mean places the frame below or above the 200 Hz boundary. Pitch
candidates from a conventional estimator are then folded into the band the
frame belongs to ([50, 200] Hz for low, (200, 400] Hz for high) by octave
shifts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .audio import FrameSpec, SampleBuffer, frame_signal
from .emd import EmdConfig, ImfSet, eemd_decompose
from .estimators import (
    EstimatorConfig,
    FrameCandidates,
    PitchCandidate,
    estimate_frame,
    hht_candidates,
    hht_select,
    pefac_scores,
)
from .track import NO_ESTIMATE, FramePitchTrack
from .vad import VadConfig, detect_voiced, voiced_segments

LOW = "low"
HIGH = "high"
OUT_OF_MODEL_HZ = 50.0  # candidates below this pass through uncorrected


@dataclass(frozen=True)
class ProConfig:
    gamma_hz: float = 200.0
    k_imfs: int = 4
    inner_estimator: str = "pefac"
    pair_rule: str = "row_sum"  # or "min_pair": pair with smallest mutual distance
    smooth_frames: int = 5      # moving average of inner score curves; <=1 disables

    def __post_init__(self):
        if not 50.0 < self.gamma_hz < 400.0:
            raise ValueError("gamma_hz must lie in (50, 400)")
        if self.k_imfs < 2:
            raise ValueError("k_imfs must be at least 2")
        if self.pair_rule not in ("row_sum", "min_pair"):
            raise ValueError(f"unknown pair_rule {self.pair_rule!r}")
        if self.smooth_frames < 0:
            raise ValueError("smooth_frames must be non-negative")


@dataclass(frozen=True)
class ImfPitchVector:
    """Per-frame F0 estimated on each of the first modes; NaN marks a
    mode whose inner estimate failed."""

    frame_index: int
    start_ms: float
    f0_per_imf: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.f0_per_imf, dtype=np.float64)
        if v.size < 2:
            raise ValueError("need at least two mode estimates")
        if np.any(np.isfinite(v) & (v <= 0)):
            raise ValueError("mode F0 entries must be positive or NaN")
        object.__setattr__(self, "f0_per_imf", v)


@dataclass(frozen=True)
class FrequencyRegion:
    """Low/high decision for one frame, with the evidence behind it.

    mean_f0 is NaN and selected_imfs is None when the frame inherited its
    region from the previous frame (too few usable mode estimates).
    """

    frame_index: int
    region: str
    mean_f0: float
    selected_imfs: tuple[int, int] | None

    def __post_init__(self):
        if self.region not in (LOW, HIGH):
            raise ValueError(f"unknown region {self.region!r}")
        if self.selected_imfs is not None:
            a, b = self.selected_imfs
            if a == b or a < 1 or b < 1:
                raise ValueError("selected modes must be distinct 1-based indices")


def distance_matrix(f0_vector: np.ndarray) -> np.ndarray:
    """Normalized pairwise distances |(a - b) / (a + b)|.

    Symmetric with zero diagonal; every value lies in [0, 1).
    """
    v = np.asarray(f0_vector, dtype=np.float64)
    if np.any(~np.isfinite(v)) or np.any(v <= 0):
        raise ValueError("distance matrix requires strictly positive F0 entries")
    diff = np.abs(v[:, None] - v[None, :])
    total = v[:, None] + v[None, :]
    return diff / total


def select_imf_pair(d: np.ndarray,
                    pair_rule: str = "row_sum") -> tuple[tuple[int, int], np.ndarray]:
    """Pick the two modes with the smallest variation against the rest.

    Row sums of the distance matrix score each mode's variation; the two
    smallest win, ties toward the smaller index. Returns 1-based indices in
    ascending order plus the row-sum scores. pair_rule="min_pair" instead
    picks the pair with the smallest mutual distance.
    """
    d = np.asarray(d, dtype=np.float64)
    k = d.shape[0]
    if d.shape != (k, k) or k < 2:
        raise ValueError("need a square matrix of size >= 2")
    scores = d.sum(axis=1)
    if pair_rule == "row_sum":
        order = np.argsort(scores, kind="stable")
        pair = sorted((int(order[0]) + 1, int(order[1]) + 1))
    elif pair_rule == "min_pair":
        best = None
        for i in range(k):
            for j in range(i + 1, k):
                if best is None or d[i, j] < d[best[0] - 1, best[1] - 1]:
                    best = (i + 1, j + 1)
        pair = list(best)
    else:
        raise ValueError(f"unknown pair_rule {pair_rule!r}")
    return (pair[0], pair[1]), scores


def classify_region(v: ImfPitchVector, cfg: ProConfig = ProConfig()) -> FrequencyRegion:
    """Mean F0 of the selected mode pair against the gamma threshold;
    exactly gamma counts as low.

    Modes with missing estimates are excluded before pair selection; fewer
    than two usable modes raises ValueError (callers fall back to the
    previous frame's region).
    """
    valid = np.flatnonzero(np.isfinite(v.f0_per_imf) & (v.f0_per_imf > 0))
    if valid.size < 2:
        raise ValueError(
            f"frame {v.frame_index}: only {valid.size} usable mode estimates")
    sub = v.f0_per_imf[valid]
    d = distance_matrix(sub)
    (a, b), _ = select_imf_pair(d, cfg.pair_rule)
    imf_a = int(valid[a - 1]) + 1
    imf_b = int(valid[b - 1]) + 1
    mean_f0 = float(0.5 * (sub[a - 1] + sub[b - 1]))
    region = LOW if mean_f0 <= cfg.gamma_hz else HIGH
    return FrequencyRegion(frame_index=v.frame_index, region=region,
                           mean_f0=mean_f0, selected_imfs=(imf_a, imf_b))


def classify_frames(vectors: list[ImfPitchVector], cfg: ProConfig = ProConfig(),
                    initial_region: str = LOW) -> list[FrequencyRegion]:
    """Classify a frame sequence; frames without enough evidence inherit
    the previous frame's region (the first frame defaults to low)."""
    regions: list[FrequencyRegion] = []
    last = initial_region
    for v in vectors:
        try:
            region = classify_region(v, cfg)
        except ValueError:
            region = FrequencyRegion(frame_index=v.frame_index, region=last,
                                     mean_f0=math.nan, selected_imfs=None)
        regions.append(region)
        last = region.region
    return regions


def _smoothed_argmax_track(cands: np.ndarray, scores: np.ndarray,
                           valid: np.ndarray, window: int) -> np.ndarray:
    """Per-frame argmax over score curves averaged across neighbor frames.

    Pools pitch evidence over time the way a tracking back end would, which
    stabilizes estimates on noisy bandlimited modes. Frames whose window
    holds no valid curves come out NaN.
    """
    n = scores.shape[0]
    estimates = np.full(n, np.nan)
    half = max(0, window // 2)
    for i in range(n):
        lo, hi = max(0, i - half), min(n, i + half + 1)
        mask = valid[lo:hi]
        if not mask.any():
            continue
        curve = scores[lo:hi][mask].mean(axis=0)
        estimates[i] = cands[int(np.argmax(curve))]
    return estimates


def imf_pitch_vector(imfs: ImfSet, spec: FrameSpec = FrameSpec(),
                     cfg: ProConfig = ProConfig(),
                     est_cfg: EstimatorConfig = EstimatorConfig()
                     ) -> list[ImfPitchVector]:
    """Frame-by-frame inner-estimator F0 on each of the first k_imfs modes.

    Frames are aligned across modes by start time (all modes share the
    source length, so the framing is identical). With the default pefac
    inner estimator, the comb score curves are averaged over smooth_frames
    neighboring frames before the argmax. A mode frame the inner estimator
    cannot handle yields NaN for that entry.
    """
    if len(imfs) < cfg.k_imfs:
        raise ValueError(
            f"separation needs {cfg.k_imfs} modes, decomposition produced "
            f"{len(imfs)}")
    per_mode = []
    for k in range(cfg.k_imfs):
        frames = frame_signal(imfs.imfs[k], spec)
        if cfg.inner_estimator == "pefac":
            cands = None
            score_rows = []
            valid = np.zeros(len(frames), dtype=bool)
            for i, frame in enumerate(frames):
                try:
                    cands, row = pefac_scores(frame, est_cfg)
                    score_rows.append(row)
                    valid[i] = True
                except ValueError:
                    score_rows.append(None)
            if cands is None:
                estimates = np.full(len(frames), np.nan)
            else:
                blank = np.full(cands.size, -np.inf)
                matrix = np.stack([r if r is not None else blank
                                   for r in score_rows])
                estimates = _smoothed_argmax_track(cands, matrix, valid,
                                                   cfg.smooth_frames)
        else:
            estimates = np.full(len(frames), np.nan)
            for i, frame in enumerate(frames):
                try:
                    estimates[i] = estimate_frame(cfg.inner_estimator, frame,
                                                  est_cfg).f0_hz
                except ValueError:
                    pass
        per_mode.append((frames, estimates))
    n_frames = len(per_mode[0][0])
    vectors = []
    for q in range(n_frames):
        vectors.append(ImfPitchVector(
            frame_index=q,
            start_ms=per_mode[0][0][q].start_ms,
            f0_per_imf=np.array([per_mode[k][1][q] for k in range(cfg.k_imfs)]),
        ))
    return vectors


def correct_candidate(f_cand: float, region: str) -> float:
    """Fold a pitch candidate into its frame's frequency band.

    Low frames map onto [50, 200] Hz: identity there, halve on (200, 400],
    quarter above 400. High frames map onto (200, 400]: quadruple on
    [50, 100], double on (100, 200], identity on (200, 400], halve above
    400. Candidates below 50 Hz pass through unchanged (out of the model's
    range; callers flag them in diagnostics).
    """
    if f_cand <= 0:
        raise ValueError("candidate frequency must be positive")
    if region == LOW:
        if f_cand < 50.0:
            return f_cand
        if f_cand <= 200.0:
            return f_cand
        if f_cand <= 400.0:
            return 0.5 * f_cand
        return 0.25 * f_cand
    if region == HIGH:
        if f_cand < 50.0:
            return f_cand
        if f_cand <= 100.0:
            return 4.0 * f_cand
        if f_cand <= 200.0:
            return 2.0 * f_cand
        if f_cand <= 400.0:
            return f_cand
        return 0.5 * f_cand
    raise ValueError(f"unknown region {region!r}")


def is_out_of_model(f_cand: float) -> bool:
    return f_cand < OUT_OF_MODEL_HZ


# ---------------------------------------------------------------------------
# End-to-end pipeline
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AnalysisConfig:
    frame: FrameSpec = FrameSpec()
    emd: EmdConfig = EmdConfig()
    estimator: EstimatorConfig = EstimatorConfig()
    pro: ProConfig = ProConfig()
    vad: VadConfig = VadConfig()


@dataclass(frozen=True)
class FrameDiagnostic:
    """Per-frame audit record for the separate-and-correct path."""

    frame_index: int
    start_ms: float
    region: str | None
    mean_f0: float
    selected_imfs: tuple[int, int] | None
    raw_f0s: tuple[float, ...]
    corrected_f0s: tuple[float, ...]
    out_of_model: bool


@dataclass(frozen=True)
class MethodResult:
    track: FramePitchTrack
    regions: list[FrequencyRegion]
    diagnostics: list[FrameDiagnostic]


def _segment_sample_span(first_frame: int, last_frame: int, vad_cfg: VadConfig,
                         sample_rate_hz: int, n_samples: int) -> tuple[int, int]:
    hop = int(round(vad_cfg.hop_ms * sample_rate_hz / 1000.0))
    flen = int(round(vad_cfg.frame_ms * sample_rate_hz / 1000.0))
    start = first_frame * hop
    stop = min(n_samples, last_frame * hop + flen)
    return start, stop


def _segment_candidates(seg: SampleBuffer, estimator: str, decomposition: ImfSet | None,
                        cfg: AnalysisConfig) -> list[FrameCandidates]:
    """Candidate sets per frame of one voiced segment."""
    if estimator == "hht":
        if decomposition is None or len(decomposition) < cfg.estimator.hht_num_imfs:
            n = cfg.frame.num_frames(len(seg), seg.sample_rate_hz)
            hop_ms = cfg.frame.hop_ms
            return [FrameCandidates(start_ms=i * hop_ms, candidates=[])
                    for i in range(n)]
        return hht_candidates(seg, decomposition, cfg.estimator, cfg.frame)
    out = []
    for frame in frame_signal(seg, cfg.frame):
        try:
            cand = estimate_frame(estimator, frame, cfg.estimator)
            cands = [cand]
        except ValueError:
            cands = []
        out.append(FrameCandidates(start_ms=frame.start_ms, candidates=cands))
    return out


def analyze_utterance(buf: SampleBuffer, estimators: list[str],
                      methods: list[str], cfg: AnalysisConfig = AnalysisConfig()
                      ) -> dict[tuple[str, str], MethodResult]:
    """Run the requested estimator/method combinations over one utterance.

    The decomposition of each voiced segment is computed once and shared by
    every consumer (mode candidates and region classification), which also
    keeps raw-versus-corrected comparisons paired.
    """
    for m in methods:
        if m not in ("raw", "pro"):
            raise ValueError(f"unknown method {m!r}")
    fs = buf.sample_rate_hz
    hop_ms = cfg.frame.hop_ms
    if cfg.vad.hop_ms != hop_ms:
        raise ValueError("vad hop and analysis hop must match for frame alignment")
    n_track = cfg.frame.num_frames(len(buf), fs)
    if n_track == 0:
        raise ValueError("buffer shorter than one analysis frame")
    times = np.arange(n_track) * hop_ms

    vad_mask = detect_voiced(buf, cfg.vad)
    segments = voiced_segments(vad_mask)

    need_emd = "pro" in methods or "hht" in estimators
    results: dict[tuple[str, str], dict] = {
        (est, meth): {"f0": np.full(n_track, NO_ESTIMATE),
                      "voiced": np.zeros(n_track, dtype=bool),
                      "regions": [], "diags": []}
        for est in estimators for meth in methods
    }

    last_region = LOW
    for first, last_f in segments:
        start, stop = _segment_sample_span(first, last_f, cfg.vad, fs, len(buf))
        seg_samples = buf.samples[start:stop]
        flen = cfg.frame.frame_len(fs)
        if seg_samples.size < flen:
            continue
        seg = SampleBuffer(seg_samples, fs)
        n_seg_frames = cfg.frame.num_frames(len(seg), fs)

        decomposition = eemd_decompose(seg, cfg.emd) if need_emd else None

        regions = None
        if "pro" in methods:
            if decomposition is not None and len(decomposition) >= cfg.pro.k_imfs:
                vectors = imf_pitch_vector(decomposition, cfg.frame, cfg.pro,
                                           cfg.estimator)
            else:
                vectors = [ImfPitchVector(frame_index=i, start_ms=i * hop_ms,
                                          f0_per_imf=np.full(max(2, cfg.pro.k_imfs),
                                                             np.nan))
                           for i in range(n_seg_frames)]
            regions = classify_frames(vectors, cfg.pro, initial_region=last_region)
            if regions:
                last_region = regions[-1].region

        for est in estimators:
            per_frame = _segment_candidates(seg, est, decomposition, cfg)
            for local_i, fc in enumerate(per_frame):
                global_i = first + local_i
                if global_i >= n_track:
                    break
                for meth in methods:
                    slot = results[(est, meth)]
                    slot["voiced"][global_i] = True
                    cands = fc.candidates
                    if meth == "pro" and regions is not None:
                        region = regions[local_i]
                        raw_f0s = tuple(c.f0_hz for c in cands)
                        corrected = [
                            PitchCandidate(
                                f0_hz=correct_candidate(c.f0_hz, region.region),
                                salience=c.salience, source=c.source)
                            for c in cands
                        ]
                        slot["diags"].append(FrameDiagnostic(
                            frame_index=global_i,
                            start_ms=float(times[global_i]),
                            region=region.region,
                            mean_f0=region.mean_f0,
                            selected_imfs=region.selected_imfs,
                            raw_f0s=raw_f0s,
                            corrected_f0s=tuple(c.f0_hz for c in corrected),
                            out_of_model=any(is_out_of_model(f) for f in raw_f0s),
                        ))
                        slot["regions"].append(FrequencyRegion(
                            frame_index=global_i, region=region.region,
                            mean_f0=region.mean_f0,
                            selected_imfs=region.selected_imfs))
                        cands = corrected
                    chosen = hht_select(cands)
                    if chosen is not None:
                        slot["f0"][global_i] = chosen.f0_hz

    out: dict[tuple[str, str], MethodResult] = {}
    for key, slot in results.items():
        track = FramePitchTrack(frame_times_ms=times.copy(), f0_hz=slot["f0"],
                                voiced_mask=slot["voiced"])
        out[key] = MethodResult(track=track, regions=slot["regions"],
                                diagnostics=slot["diags"])
    return out


def pro_pipeline(noisy: SampleBuffer, base_estimator: str,
                 cfg: AnalysisConfig = AnalysisConfig()) -> FramePitchTrack:
    """Full separate-and-correct pitch track for one noisy utterance."""
    result = analyze_utterance(noisy, [base_estimator], ["pro"], cfg)
    return result[(base_estimator, "pro")].track


def raw_pipeline(noisy: SampleBuffer, base_estimator: str,
                 cfg: AnalysisConfig = AnalysisConfig()) -> FramePitchTrack:
    """Baseline pitch track with no separation-based correction."""
    result = analyze_utterance(noisy, [base_estimator], ["raw"], cfg)
    return result[(base_estimator, "raw")].track
