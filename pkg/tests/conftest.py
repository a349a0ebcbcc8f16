import numpy as np
import pytest
from scipy.signal import lfilter

from modepitch.audio import SampleBuffer

FS = 8000


def tone(freq_hz, duration_s=1.0, fs=FS, amp=0.5, phase=0.0):
    t = np.arange(int(duration_s * fs)) / fs
    return SampleBuffer(amp * np.sin(2 * np.pi * freq_hz * t + phase), fs)


def glottal_pulse_train(f0_hz, duration_s=1.0, fs=FS, tilt=True):
    """Impulse train at f0 with a -6 dB/oct glottal tilt."""
    n = int(duration_s * fs)
    x = np.zeros(n)
    t = 0.0
    while t < n:
        x[int(t)] = 1.0
        t += fs / f0_hz
    if tilt:
        x = lfilter([1.0], [1.0, -0.95], x)
    return SampleBuffer(0.5 * x / np.max(np.abs(x)), fs)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
