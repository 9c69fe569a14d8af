"""Dual-biometric authentication: delta-band EEG + gait, gatekeeper + attention-RNN."""

from .config import Config
from .dsp import Modality, Recording, Sample
from .pipeline import (AuthDecision, AuthRequest, DeepkeySystem, Reason, Verdict,
                       authenticate, compose_frr, load_system, save_system,
                       train_system)

__all__ = [
    "AuthDecision", "AuthRequest", "Config", "DeepkeySystem", "Modality",
    "Reason", "Recording", "Sample", "Verdict", "authenticate", "compose_frr",
    "load_system", "save_system", "train_system",
]

__version__ = "0.1.0"
