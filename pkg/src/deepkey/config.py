"""Flat key-value configuration with validation and round-trip dump."""
from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ConfigError

ENV_CONFIG = "DEEPKEY_CONFIG"


@dataclass
class Config:
    # delta band-pass filter
    band_low: float = 0.5
    band_high: float = 3.5
    filter_order: int = 3
    # attention-RNN training
    hidden: int = 64
    lr: float = 0.001
    l2: float = 0.001
    n_iter_eeg: int = 1000
    n_iter_gait: int = 1000
    batch_size: int = 256  # 0 = full batch
    # KNN
    knn_k: int = 3
    knn_metric: str = "euclidean"
    # gatekeeper
    nu: float = 0.15
    gamma: float = 0.0  # 0 = scaled-gamma heuristic
    gate_block: int = 200
    gate_max_train: int = 2000
    gate_input_filtered: bool = False
    # segmentation / split / rng
    window: int = 10
    train_split: float = 0.875
    seed: int = 42

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not (0.0 < self.band_low < self.band_high):
            raise ConfigError("band edges must satisfy 0 < band_low < band_high")
        if self.filter_order < 1:
            raise ConfigError("filter_order must be >= 1")
        if self.hidden < 1 or self.window < 1 or self.gate_block < 1:
            raise ConfigError("hidden, window and gate_block must be positive")
        if self.lr <= 0 or self.l2 < 0:
            raise ConfigError("lr must be positive and l2 non-negative")
        if self.n_iter_eeg < 1 or self.n_iter_gait < 1:
            raise ConfigError("iteration counts must be >= 1")
        if self.batch_size < 0:
            raise ConfigError("batch_size must be >= 0 (0 = full batch)")
        if self.knn_k < 1:
            raise ConfigError("knn_k must be >= 1")
        if self.knn_metric not in ("euclidean", "manhattan"):
            raise ConfigError(f"unknown knn_metric {self.knn_metric!r}")
        if not (0.0 < self.nu < 1.0):
            raise ConfigError("nu must lie in (0, 1)")
        if self.gamma < 0:
            raise ConfigError("gamma must be >= 0 (0 = heuristic)")
        if self.gate_max_train < 10:
            raise ConfigError("gate_max_train must be >= 10")
        if not (0.0 < self.train_split < 1.0):
            raise ConfigError("train_split must lie in (0, 1)")

    # -- flat `key = value` text format ------------------------------------

    @classmethod
    def load(cls, path: str | Path) -> "Config":
        values: dict[str, str] = {}
        with open(path) as f:
            for lineno, line in enumerate(f, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected `key = value`")
                k, v = (part.strip() for part in line.split("=", 1))
                values[k] = v
        return cls.from_dict(values)

    @classmethod
    def from_dict(cls, values: dict) -> "Config":
        types = {f.name: f.type for f in fields(cls)}
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = {}
        for k, v in values.items():
            if isinstance(v, str):
                kwargs[k] = _coerce(k, v, types[k])
            else:
                kwargs[k] = v
        return cls(**kwargs)

    def dump(self, path: str | Path) -> None:
        with open(path, "w") as f:
            for fld in fields(self):
                v = getattr(self, fld.name)
                if isinstance(v, bool):
                    v = "true" if v else "false"
                f.write(f"{fld.name} = {v}\n")


def _coerce(key: str, raw: str, type_name: str):
    if type_name == "bool":
        low = raw.lower()
        if low in ("true", "1", "yes"):
            return True
        if low in ("false", "0", "no"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
    try:
        if type_name == "int":
            return int(raw)
        if type_name == "float":
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from exc
    return raw
