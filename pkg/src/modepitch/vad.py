"""Voiced/unvoiced detection from zero-crossing rate and short-time energy.

Both features are utterance-relative, so the mask is invariant to global
gain and needs no re-tuning across SNR conditions.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio import FrameSpec, SampleBuffer, frame_signal


@dataclass(frozen=True)
class VadConfig:
    frame_ms: float = 25.0
    hop_ms: float = 10.0
    # sign flips per sample transition; broadband noise sits near 0.5, so the
    # ceiling is set just under that to keep voiced frames at low SNR
    zcr_max: float = 0.48
    energy_min_ratio: float = 0.1      # fraction of utterance mean frame energy
    hangover_frames: int = 2

    def __post_init__(self):
        if self.frame_ms <= 0 or self.hop_ms <= 0:
            raise ValueError("frame_ms and hop_ms must be positive")
        if not 0 < self.zcr_max < 1:
            raise ValueError("zcr_max must lie in (0, 1)")
        if self.energy_min_ratio <= 0:
            raise ValueError("energy_min_ratio must be positive")
        if self.hangover_frames < 0:
            raise ValueError("hangover_frames must be non-negative")

    def frame_spec(self) -> FrameSpec:
        return FrameSpec(frame_len_ms=self.frame_ms, hop_ms=self.hop_ms,
                         window="rectangular")


def _zcr(x: np.ndarray) -> float:
    signs = np.sign(x)
    signs[signs == 0] = -1.0
    flips = signs[1:] * signs[:-1] < 0
    return float(flips.mean()) if flips.size else 0.0


def _majority_hold(mask: np.ndarray, hangover: int) -> np.ndarray:
    """Majority vote over a (2*hangover+1)-frame window, clipped at the ends."""
    if hangover == 0 or mask.size == 0:
        return mask
    n = mask.size
    padded = np.concatenate([[0], np.cumsum(mask.astype(np.int64))])
    out = np.empty(n, dtype=bool)
    for i in range(n):
        lo = max(0, i - hangover)
        hi = min(n - 1, i + hangover)
        votes = padded[hi + 1] - padded[lo]
        out[i] = votes * 2 > (hi - lo + 1)
    return out


def detect_voiced(buf: SampleBuffer, cfg: VadConfig = VadConfig()) -> np.ndarray:
    """Per-frame voiced mask: low zero-crossing rate AND energy above a
    fraction of the utterance mean, then hangover-smoothed."""
    frames = frame_signal(buf, cfg.frame_spec())
    energies = np.array([float(np.mean(f.samples ** 2)) for f in frames])
    zcrs = np.array([_zcr(f.samples) for f in frames])
    mean_energy = float(energies.mean())
    if mean_energy == 0.0:
        return np.zeros(len(frames), dtype=bool)
    raw = (zcrs < cfg.zcr_max) & (energies > cfg.energy_min_ratio * mean_energy)
    return _majority_hold(raw, cfg.hangover_frames)


def voiced_segments(mask: np.ndarray) -> list[tuple[int, int]]:
    """Contiguous voiced runs as (first_frame, last_frame) inclusive pairs."""
    out = []
    start = None
    for i, v in enumerate(mask):
        if v and start is None:
            start = i
        elif not v and start is not None:
            out.append((start, i - 1))
            start = None
    if start is not None:
        out.append((start, len(mask) - 1))
    return out
