"""Filter design/application and recording segmentation for EEG and gait signals."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np
from scipy import signal as sps

from .errors import DataError, NumericError, ParameterError

EEG_CHANNELS = 14
GAIT_CHANNELS = 27
EEG_RATE = 128.0
GAIT_RATE = 80.0

DELTA_BAND = (0.5, 3.5)  # Hz

WINDOW = 10        # instances per identification sample
GATE_BLOCK = 200   # instances per gatekeeper block


class Modality(str, Enum):
    EEG = "eeg"
    GAIT = "gait"

    @property
    def n_channels(self) -> int:
        return EEG_CHANNELS if self is Modality.EEG else GAIT_CHANNELS

    @property
    def sample_rate(self) -> float:
        return EEG_RATE if self is Modality.EEG else GAIT_RATE


@dataclass(frozen=True)
class Recording:
    """Multichannel time series, shape [n_instances, n_channels]."""

    data: np.ndarray
    sample_rate: float
    modality: Modality
    subject_id: int | None = None

    def __post_init__(self):
        d = np.asarray(self.data, dtype=np.float64)
        if d.ndim != 2 or d.shape[0] < 1:
            raise DataError(f"recording data must be [n>=1, D], got shape {d.shape}")
        if not np.all(np.isfinite(d)):
            raise DataError("recording contains non-finite values")
        if self.sample_rate <= 0:
            raise ParameterError("sample_rate must be positive")
        object.__setattr__(self, "data", d)

    @property
    def n_instances(self) -> int:
        return self.data.shape[0]

    @property
    def n_channels(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class Sample:
    """One fixed-length window of a recording, shape [WINDOW, D]."""

    data: np.ndarray
    modality: Modality
    subject_id: int | None = None

    def __post_init__(self):
        d = np.asarray(self.data, dtype=np.float64)
        if d.ndim != 2:
            raise DataError(f"sample must be 2-D, got shape {d.shape}")
        object.__setattr__(self, "data", d)


@dataclass(frozen=True)
class FilterCoefficients:
    """Digital IIR transfer function b(z)/a(z), a[0] = 1.

    The filter is realized as cascaded second-order sections (sos); the
    expanded (b, a) polynomials of the order-6 transfer function are kept for
    inspection but are too ill-conditioned to filter with directly.
    """

    b: np.ndarray
    a: np.ndarray
    sos: np.ndarray
    low_hz: float
    high_hz: float
    fs: float

    def magnitude(self, freqs_hz) -> np.ndarray:
        """|H| evaluated at the given frequencies in Hz."""
        _, h = sps.sosfreqz(self.sos, worN=np.atleast_1d(freqs_hz), fs=self.fs)
        return np.abs(h)

    @property
    def pole_magnitudes(self) -> np.ndarray:
        return np.abs(np.concatenate([np.roots(sec[3:]) for sec in self.sos]))


def design_bandpass(order: int, low_hz: float, high_hz: float, fs: float) -> FilterCoefficients:
    """Design a digital Butterworth band-pass filter (bilinear transform with pre-warping)."""
    if order < 1:
        raise ParameterError("filter order must be >= 1")
    if not (0.0 < low_hz < high_hz < fs / 2.0):
        raise ParameterError(
            f"band edges must satisfy 0 < low < high < fs/2, got ({low_hz}, {high_hz}) at fs={fs}"
        )
    sos = sps.butter(order, [low_hz, high_hz], btype="bandpass", fs=fs, output="sos")
    b, a = sps.sos2tf(sos)
    coeffs = FilterCoefficients(b=np.asarray(b), a=np.asarray(a), sos=sos,
                                low_hz=low_hz, high_hz=high_hz, fs=fs)
    if np.any(coeffs.pole_magnitudes >= 1.0):  # pragma: no cover - defensive
        raise NumericError(
            f"unstable filter for order={order}, band=({low_hz},{high_hz}), fs={fs}")
    return coeffs


def apply_filter(coeffs: FilterCoefficients, rec: Recording) -> Recording:
    """Run the IIR filter over each channel independently, zero initial state."""
    if not np.all(np.isfinite(rec.data)):
        raise DataError("cannot filter non-finite data")
    out = sps.sosfilt(coeffs.sos, rec.data, axis=0)
    return Recording(data=out, sample_rate=rec.sample_rate,
                     modality=rec.modality, subject_id=rec.subject_id)


def segment(rec: Recording, window: int = WINDOW, overlap: int = 0) -> list[Sample]:
    """Cut a recording into consecutive windows; trailing remainder is dropped."""
    if window < 1:
        raise ParameterError("window must be >= 1")
    if not (0 <= overlap < window):
        raise ParameterError("overlap must satisfy 0 <= overlap < window")
    stride = window - overlap
    out = []
    start = 0
    while start + window <= rec.n_instances:
        out.append(Sample(data=rec.data[start:start + window],
                          modality=rec.modality, subject_id=rec.subject_id))
        start += stride
    return out


def segment_block(rec: Recording, block: int = GATE_BLOCK) -> list[np.ndarray]:
    """Non-overlapping [block, D] chunks for the gatekeeper; remainder dropped."""
    if block < 1:
        raise ParameterError("block must be >= 1")
    n = rec.n_instances // block
    return [rec.data[i * block:(i + 1) * block] for i in range(n)]


# ---------------------------------------------------------------------------
# Recording file format: CSV with header `subject,modality,ch0..ch{D-1}`,
# sample rate in a sidecar key-value .meta file.
# ---------------------------------------------------------------------------

def _meta_path(csv_path: Path) -> Path:
    return csv_path.with_suffix(".meta")


def save_recording(rec: Recording, csv_path: str | Path) -> None:
    csv_path = Path(csv_path)
    d = rec.data
    subj = "" if rec.subject_id is None else str(rec.subject_id)
    header = "subject,modality," + ",".join(f"ch{i}" for i in range(rec.n_channels))
    with open(csv_path, "w") as f:
        f.write(header + "\n")
        for row in d:
            f.write(subj + "," + rec.modality.value + ","
                    + ",".join(format(v, ".17g") for v in row) + "\n")
    with open(_meta_path(csv_path), "w") as f:
        f.write(f"sample_rate = {format(rec.sample_rate, '.17g')}\n")


def load_recording(csv_path: str | Path) -> Recording:
    csv_path = Path(csv_path)
    with open(csv_path) as f:
        header = f.readline().strip().split(",")
        if header[:2] != ["subject", "modality"]:
            raise DataError(f"bad recording header in {csv_path}")
        rows = []
        subject: int | None = None
        modality: Modality | None = None
        for line in f:
            parts = line.rstrip("\n").split(",")
            subject = int(parts[0]) if parts[0] != "" else None
            modality = Modality(parts[1])
            rows.append([float(v) for v in parts[2:]])
    if modality is None:
        raise DataError(f"empty recording file {csv_path}")
    meta = {}
    with open(_meta_path(csv_path)) as f:
        for line in f:
            if "=" in line:
                k, v = line.split("=", 1)
                meta[k.strip()] = v.strip()
    return Recording(data=np.array(rows, dtype=np.float64),
                     sample_rate=float(meta["sample_rate"]),
                     modality=modality, subject_id=subject)
