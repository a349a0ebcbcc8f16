"""Scoring (gross error, MAE, separation error) and batch benchmarking."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .audio import NoisyMix, SampleBuffer, mix_at_snr
from .corpus import CorpusItem
from .separation import AnalysisConfig, FrequencyRegion, analyze_utterance
from .track import FramePitchTrack, has_estimate, tracks_aligned

GE_DEVIATION_THRESHOLD = 0.20
CSV_SCHEMA = "noise,snr_db,estimator,method,ge_percent,mae_hz,sep_error_percent,frames"
CSV_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class EvalReport:
    """Scores for one (noise, SNR, estimator, method) cell."""

    noise: str
    snr_db: float
    estimator: str
    method: str
    ge_percent: float
    mae_hz: float
    sep_error_percent: float  # NaN for methods without region predictions
    frames_scored: int

    def __post_init__(self):
        if not 0.0 <= self.ge_percent <= 100.0:
            raise ValueError("ge_percent must lie in [0, 100]")
        if not (math.isnan(self.mae_hz) or self.mae_hz >= 0.0):
            raise ValueError("mae_hz must be non-negative")
        if self.frames_scored <= 0:
            raise ValueError("a reportable cell needs frames_scored > 0")

    def csv_row(self) -> str:
        sep = "" if math.isnan(self.sep_error_percent) else \
            f"{self.sep_error_percent:.4f}"
        return (f"{self.noise},{self.snr_db:g},{self.estimator},{self.method},"
                f"{self.ge_percent:.4f},{self.mae_hz:.4f},{sep},{self.frames_scored}")


@dataclass(frozen=True)
class BenchFailure:
    noise: str
    snr_db: float
    estimator: str
    method: str
    reason: str


def _gate_mask(est: FramePitchTrack, ref: FramePitchTrack, gate: str) -> np.ndarray:
    if gate == "ref_voiced":
        return ref.voiced_mask.copy()
    if gate == "detected_voiced":
        return est.voiced_mask.copy()
    raise ValueError(f"unknown gate {gate!r}")


def gross_error(est: FramePitchTrack, ref: FramePitchTrack,
                gate: str = "ref_voiced") -> float:
    """Percent of gated voiced frames whose estimate misses the reference
    by more than 20%, or is missing entirely.

    Gated frames without a usable reference value (possible under the
    detected_voiced gate) count as errors: a voicing false alarm has no
    correct pitch.
    """
    if not tracks_aligned(est, ref):
        raise ValueError("tracks are not on the same frame grid")
    gated = _gate_mask(est, ref, gate)
    total = int(gated.sum())
    if total == 0:
        raise ValueError("no gated voiced frames to score")
    est_ok = est.estimated_mask()
    ref_ok = has_estimate(ref.f0_hz)
    scorable = gated & est_ok & ref_ok
    with np.errstate(invalid="ignore"):
        deviation = np.abs(est.f0_hz - ref.f0_hz) / ref.f0_hz
    errors = int(np.sum(scorable & (deviation > GE_DEVIATION_THRESHOLD)))
    errors += int(np.sum(gated & ~(est_ok & ref_ok)))
    return 100.0 * errors / total


def mean_absolute_error(est: FramePitchTrack, ref: FramePitchTrack) -> float:
    """Mean |estimate - reference| in Hz over reference-voiced frames where
    both tracks carry an estimate."""
    if not tracks_aligned(est, ref):
        raise ValueError("tracks are not on the same frame grid")
    scorable = ref.voiced_mask & est.estimated_mask() & has_estimate(ref.f0_hz)
    if not scorable.any():
        raise ValueError("no frames with estimates to score")
    return float(np.mean(np.abs(est.f0_hz[scorable] - ref.f0_hz[scorable])))


def separation_error(pred_regions: list[FrequencyRegion], ref: FramePitchTrack,
                     gamma_hz: float = 200.0) -> float:
    """Percent of voiced frames whose predicted region disagrees with the
    region implied by the reference F0 (reference at gamma counts as low)."""
    scored = 0
    wrong = 0
    ref_ok = has_estimate(ref.f0_hz)
    for region in pred_regions:
        i = region.frame_index
        if i >= len(ref) or not ref.voiced_mask[i] or not ref_ok[i]:
            continue
        truth = "low" if ref.f0_hz[i] <= gamma_hz else "high"
        scored += 1
        if region.region != truth:
            wrong += 1
    if scored == 0:
        raise ValueError("no voiced frames with region predictions to score")
    return 100.0 * wrong / scored


# ---------------------------------------------------------------------------
# Benchmark orchestration
# ---------------------------------------------------------------------------

def mix_seed(base_seed: int, noise_idx: int, snr_idx: int, utt_idx: int) -> int:
    """Deterministic per-utterance mixing seed; also used by the CLI when
    materializing the mixed signals it benchmarks."""
    seq = np.random.SeedSequence((base_seed, noise_idx, snr_idx, utt_idx))
    return int(seq.generate_state(1)[0])


def _bench_utterance(args):
    """One utterance under one (noise, snr): mix, analyze, score all keys.

    Module-level so a process pool can pickle it. Returns
    (utt_idx, {key: (ge, mae, sep, frames)}) or (utt_idx, error string).
    """
    (item, noise, snr_db, estimators, methods, cfg, seed, gate, gamma) = args
    try:
        mixed = mix_at_snr(NoisyMix(clean=item.audio, noise=noise,
                                    snr_db=snr_db, seed=seed))
        analysis = analyze_utterance(mixed, estimators, methods, cfg)
        scores = {}
        for key, result in analysis.items():
            ge = gross_error(result.track, item.truth, gate)
            mae = mean_absolute_error(result.track, item.truth) \
                if (result.track.estimated_mask() & item.truth.voiced_mask).any() \
                else math.nan
            if key[1] == "pro" and result.regions:
                sep = separation_error(result.regions, item.truth, gamma)
            else:
                sep = math.nan
            frames = int(item.truth.voiced_mask.sum())
            scores[key] = (ge, mae, sep, frames)
        return scores
    except Exception as exc:  # noqa: BLE001 - cell failures are recorded, not fatal
        return f"{type(exc).__name__}: {exc}"


def run_benchmark(corpus: list[CorpusItem], noises: list[tuple[str, SampleBuffer]],
                  snrs: list[float], estimators: list[str], methods: list[str],
                  cfg: AnalysisConfig = AnalysisConfig(), seed: int = 0,
                  gate: str = "ref_voiced", jobs: int = 1
                  ) -> tuple[list[EvalReport], list[BenchFailure]]:
    """Evaluate the full (noise x SNR x estimator x method) grid.

    Each mixed utterance is analyzed once for all estimator/method keys, so
    method comparisons within a cell are paired on identical noisy audio.
    Reports average per-utterance scores; utterances that fail are recorded
    per affected cell and skipped. Deterministic for a fixed seed: mixing
    seeds derive from (seed, noise, snr, utterance) indices only.
    """
    if not corpus or not noises or not snrs or not estimators or not methods:
        raise ValueError("benchmark grids must be non-empty")
    gamma = cfg.pro.gamma_hz
    reports: list[EvalReport] = []
    failures: list[BenchFailure] = []
    pool = ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        for n_i, (noise_name, noise_buf) in enumerate(noises):
            for s_i, snr in enumerate(snrs):
                tasks = [
                    (item, noise_buf, snr, estimators, methods, cfg,
                     mix_seed(seed, n_i, s_i, u_i), gate, gamma)
                    for u_i, item in enumerate(corpus)
                ]
                if pool is not None:
                    outcomes = list(pool.map(_bench_utterance, tasks))
                else:
                    outcomes = [_bench_utterance(t) for t in tasks]
                utt_errors = [o for o in outcomes if isinstance(o, str)]
                per_utt = [o for o in outcomes if not isinstance(o, str)]
                for est in estimators:
                    for meth in methods:
                        key = (est, meth)
                        cell = [u[key] for u in per_utt if key in u]
                        if not cell:
                            reason = utt_errors[0] if utt_errors else "no scores"
                            failures.append(BenchFailure(noise_name, snr, est,
                                                         meth, reason))
                            continue
                        ges = [c[0] for c in cell]
                        maes = [c[1] for c in cell if not math.isnan(c[1])]
                        seps = [c[2] for c in cell if not math.isnan(c[2])]
                        frames = sum(c[3] for c in cell)
                        reports.append(EvalReport(
                            noise=noise_name, snr_db=snr, estimator=est,
                            method=meth,
                            ge_percent=float(np.mean(ges)),
                            mae_hz=float(np.mean(maes)) if maes else math.nan,
                            sep_error_percent=float(np.mean(seps)) if seps
                            else math.nan,
                            frames_scored=frames,
                        ))
    finally:
        if pool is not None:
            pool.shutdown()
    return reports, failures


def write_report_csv(path, reports: list[EvalReport]) -> None:
    with open(path, "w") as fh:
        fh.write(CSV_SCHEMA + "\n")
        for report in reports:
            fh.write(report.csv_row() + "\n")
