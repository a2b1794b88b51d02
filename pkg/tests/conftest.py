import numpy as np
import pytest

from crysift import dsp
from crysift.synthesis import CrySpec, synth_cry

FS = 16000.0


def synth_frame(f0_hz, index=10, frame_len=256, hop=128, **kwargs):
    """One Hamming-windowed frame from a constant-F0 synthetic cry."""
    audio, _ = synth_cry(CrySpec.constant(f0_hz, **kwargs))
    return dsp.frame_signal(audio, frame_len, hop, "hamming")[index].samples


def ar_signal(coeffs, n, rng, burn=500):
    """Noise-driven AR process x[n] = sum_k a_k x[n-k] + w[n], simulated by direct recursion."""
    coeffs = np.asarray(coeffs, dtype=float)
    w = rng.standard_normal(n + burn)
    x = np.zeros(n + burn)
    for i in range(n + burn):
        acc = w[i]
        for k, a in enumerate(coeffs, 1):
            if i - k >= 0:
                acc += a * x[i - k]
        x[i] = acc
    return x[burn:]


def stable_ar4(rng):
    """Random AR(4) coefficients from two resonances with radius in [0.7, 0.95]."""
    poles = []
    for _ in range(2):
        r = rng.uniform(0.7, 0.95)
        theta = rng.uniform(0.1, 3.0)
        poles += [r * np.exp(1j * theta), r * np.exp(-1j * theta)]
    poly = np.real(np.poly(poles))
    return -poly[1:]


@pytest.fixture(scope="session")
def cry_380():
    return synth_cry(CrySpec.constant(380.0, seed=3))


@pytest.fixture(scope="session")
def cry_1250():
    return synth_cry(CrySpec.constant(1250.0, seed=4))
