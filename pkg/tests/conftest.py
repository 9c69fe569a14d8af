import numpy as np
import pytest

from deepkey import dsp, synthgen


@pytest.fixture(scope="session")
def profiles():
    return synthgen.make_profiles(7, 42)


@pytest.fixture(scope="session")
def delta_filter():
    return dsp.design_bandpass(3, 0.5, 3.5, 128)


def random_recording(rng, n=256, channels=dsp.EEG_CHANNELS, modality=dsp.Modality.EEG,
                     fs=dsp.EEG_RATE, subject=None):
    return dsp.Recording(data=rng.standard_normal((n, channels)),
                         sample_rate=fs, modality=modality, subject_id=subject)


def toy_samples(rng, n_subjects=3, per_subject=40, d=4, noise=0.05):
    """Well-separated toy windows: subject-specific constant channel patterns."""
    out = []
    patterns = rng.uniform(-1.0, 1.0, (n_subjects, d))
    for s in range(n_subjects):
        for _ in range(per_subject):
            data = patterns[s] + noise * rng.standard_normal((dsp.WINDOW, d))
            out.append(dsp.Sample(data=data, modality=dsp.Modality.EEG, subject_id=s))
    return out
