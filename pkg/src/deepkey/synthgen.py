"""Deterministic synthetic subjects: EEG-like and gait-like recordings.

Each EEG band is a shared narrowband resonator source broadcast to the 14
channels through a per-subject amplitude vector, then passed through a
near-identity channel-mixing matrix. The low-frequency (delta) sources carry
subject-specific peak frequencies and amplitude patterns, while the alpha
source uses a template shared across subjects, so the delta band is the most
discriminative one. Subjects also have per-channel baseline offsets (sensor
placement); these survive in the raw signal the gatekeeper sees but vanish
under the delta band-pass. Gait channels are quasi-periodic harmonic series at
a subject-specific stride frequency. Sessions rotate the mixing / shift the
phases and scale the noise.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import signal as sps

from .dsp import (EEG_CHANNELS, EEG_RATE, GAIT_CHANNELS, GAIT_RATE, Modality,
                  Recording, save_recording, load_recording)
from .errors import ParameterError

BANDS = ("delta", "theta", "alpha", "beta", "gamma")

# sources generated per recording; delta gets two for a richer subject subspace
_SOURCES = ("delta", "delta2", "theta", "alpha", "beta", "gamma")

# (amplitude scale, resonator pole radius)
_SOURCE_SHAPE = {
    "delta": (1.0, 0.97),
    "delta2": (0.7, 0.97),
    "theta": (0.25, 0.90),
    "alpha": (0.45, 0.95),
    "beta": (0.20, 0.88),
    "gamma": (0.12, 0.85),
}

_N_HARMONICS = 3
_HARMONIC_BASE = np.array([1.0, 0.35, 0.15])


@dataclass(frozen=True)
class SubjectProfile:
    subject_id: int
    seed: int
    mixing: np.ndarray                 # [14, 14] channel mixing
    band_amps: dict                    # source -> per-channel amplitudes [14]
    band_freqs: dict                   # source -> resonator center frequency (Hz)
    offsets: np.ndarray                # [14] per-channel baseline (sensor placement)
    ar_coeffs: np.ndarray              # [14, 2] AR(2) noise coloring per channel
    stride_hz: float
    gait_amps: np.ndarray              # [27, 3] harmonic amplitudes
    gait_phases: np.ndarray            # [27, 3]
    noise_sigma: float = 0.08


@dataclass(frozen=True)
class SessionConfig:
    index: int = 0
    rotation_angle: float = 0.0  # radians applied to the channel mixing / gait phases
    noise_mult: float = 1.0

    @classmethod
    def for_index(cls, i: int) -> "SessionConfig":
        return cls(index=i, rotation_angle=0.05 * i, noise_mult=1.0 + 0.15 * i)


def make_profiles(K: int, seed: int) -> list[SubjectProfile]:
    """K subjects with pairwise-distinct signatures, deterministic in seed."""
    if K < 1:
        raise ParameterError("K must be >= 1")
    shared = np.random.default_rng([seed, 104729])
    alpha_template = np.exp(shared.uniform(np.log(0.7), np.log(1.3), EEG_CHANNELS))
    profiles = []
    for k in range(K):
        rng = np.random.default_rng([seed, 7919, k])
        mixing = np.eye(EEG_CHANNELS) + 0.10 * rng.standard_normal((EEG_CHANNELS,) * 2)
        band_amps = {}
        band_freqs = {}
        for source in _SOURCES:
            scale, _ = _SOURCE_SHAPE[source]
            if source in ("delta", "delta2"):
                amps = np.exp(rng.uniform(np.log(0.3), np.log(3.0), EEG_CHANNELS))
                base = rng.uniform(1.0, 2.4)
                freq = base if source == "delta" else min(3.4, 1.4 * base)
            elif source == "alpha":
                amps = alpha_template * (1.0 + 0.03 * rng.standard_normal(EEG_CHANNELS))
                freq = 10.0
            else:
                amps = np.exp(rng.uniform(np.log(0.8), np.log(1.2), EEG_CHANNELS))
                freq = {"theta": rng.uniform(5.0, 7.0),
                        "beta": rng.uniform(18.0, 22.0),
                        "gamma": rng.uniform(32.0, 38.0)}[source]
            band_amps[source] = scale * amps
            band_freqs[source] = float(freq)
        offsets = rng.uniform(-8.0, 8.0, EEG_CHANNELS)
        radius = rng.uniform(0.3, 0.7, EEG_CHANNELS)
        angle = rng.uniform(0.0, np.pi, EEG_CHANNELS)
        ar = np.column_stack([2.0 * radius * np.cos(angle), -radius ** 2])
        stride = float(rng.uniform(0.6, 1.4))
        gait_amps = _HARMONIC_BASE * np.exp(
            rng.uniform(np.log(0.5), np.log(1.5), (GAIT_CHANNELS, _N_HARMONICS)))
        gait_phases = rng.uniform(0.0, 2.0 * np.pi, (GAIT_CHANNELS, _N_HARMONICS))
        profiles.append(SubjectProfile(
            subject_id=k, seed=seed, mixing=mixing, band_amps=band_amps,
            band_freqs=band_freqs, offsets=offsets, ar_coeffs=ar,
            stride_hz=stride, gait_amps=gait_amps, gait_phases=gait_phases))
    return profiles


def _pairwise_rotation(n: int, theta: float) -> np.ndarray:
    """Block-diagonal Givens rotations over consecutive channel pairs."""
    R = np.eye(n)
    c, s = np.cos(theta), np.sin(theta)
    for i in range(0, n - 1, 2):
        R[i, i] = c
        R[i + 1, i + 1] = c
        R[i, i + 1] = -s
        R[i + 1, i] = s
    return R


def _resonator(freq_hz: float, radius: float, fs: float,
               n: int, n_ch: int, rng: np.random.Generator) -> np.ndarray:
    """Noise-driven AR(2) resonator per channel, unit variance output."""
    w = 2.0 * np.pi * freq_hz / fs
    a = [1.0, -2.0 * radius * np.cos(w), radius ** 2]
    burn = 256
    x = sps.lfilter([1.0], a, rng.standard_normal((n + burn, n_ch)), axis=0)[burn:]
    return x / x.std(axis=0)


def generate_eeg(p: SubjectProfile, s: SessionConfig, seconds: float) -> Recording:
    """14-channel, 128 Hz recording for one subject/session."""
    n = int(round(seconds * EEG_RATE))
    rng = np.random.default_rng([p.seed, p.subject_id, s.index, 1])
    channels = np.zeros((n, EEG_CHANNELS))
    for source in _SOURCES:
        _, radius = _SOURCE_SHAPE[source]
        x = _resonator(p.band_freqs[source], radius, EEG_RATE, n, 1, rng)
        channels += x * p.band_amps[source]  # shared source, per-channel weights
    mixing = _pairwise_rotation(EEG_CHANNELS, s.rotation_angle) @ p.mixing
    data = channels @ mixing.T + p.offsets
    # AR(2)-colored noise per channel
    noise = np.empty((n, EEG_CHANNELS))
    white = rng.standard_normal((n + 64, EEG_CHANNELS))
    for c in range(EEG_CHANNELS):
        a1, a2 = p.ar_coeffs[c]
        col = sps.lfilter([1.0], [1.0, -a1, -a2], white[:, c])[64:]
        noise[:, c] = col / col.std()
    data = data + p.noise_sigma * s.noise_mult * noise
    return Recording(data=data, sample_rate=EEG_RATE, modality=Modality.EEG,
                     subject_id=p.subject_id)


def generate_gait(p: SubjectProfile, s: SessionConfig, seconds: float) -> Recording:
    """27-channel, 80 Hz quasi-periodic recording for one subject/session."""
    n = int(round(seconds * GAIT_RATE))
    rng = np.random.default_rng([p.seed, p.subject_id, s.index, 2])
    t = np.arange(n) / GAIT_RATE
    h = np.arange(1, _N_HARMONICS + 1)
    # phase argument [n, 27, H]
    arg = (2.0 * np.pi * p.stride_hz * t[:, None, None] * h[None, None, :]
           + p.gait_phases[None, :, :] + s.rotation_angle)
    data = np.sum(p.gait_amps[None, :, :] * np.sin(arg), axis=2)
    if p.noise_sigma > 0.0:
        data = data + p.noise_sigma * s.noise_mult * rng.standard_normal((n, GAIT_CHANNELS))
    return Recording(data=data, sample_rate=GAIT_RATE, modality=Modality.GAIT,
                     subject_id=p.subject_id)


# ---------------------------------------------------------------------------
# Dataset emission: CSV recordings + manifest
# ---------------------------------------------------------------------------

def recording_filename(subject: int, session: int, modality: Modality) -> str:
    return f"s{subject:02d}_sess{session}_{modality.value}.csv"


def write_dataset(out_dir: str | Path, subjects: int, sessions: int,
                  seconds: float, seed: int,
                  eeg_seconds: float | None = None,
                  gait_seconds: float | None = None) -> dict:
    """Generate and save the full cohort; returns the manifest."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    profiles = make_profiles(subjects, seed)
    files = []
    for p in profiles:
        for si in range(sessions):
            sess = SessionConfig.for_index(si)
            for modality, gen, secs in (
                    (Modality.EEG, generate_eeg, eeg_seconds or seconds),
                    (Modality.GAIT, generate_gait, gait_seconds or seconds)):
                rec = gen(p, sess, secs)
                name = recording_filename(p.subject_id, si, modality)
                save_recording(rec, out_dir / name)
                files.append({"file": name, "subject": p.subject_id,
                              "session": si, "modality": modality.value,
                              "seconds": secs})
    manifest = {"seed": seed, "subjects": subjects, "sessions": sessions,
                "seconds": seconds, "files": files}
    with open(out_dir / "manifest.json", "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    return manifest


def load_dataset(data_dir: str | Path) -> tuple[list[Recording], dict]:
    data_dir = Path(data_dir)
    with open(data_dir / "manifest.json") as f:
        manifest = json.load(f)
    recs = [load_recording(data_dir / entry["file"]) for entry in manifest["files"]]
    return recs, manifest
