"""Rule-based regime labels from diagnostics."""

import math
from dataclasses import dataclass

from .diagnostics import Regime


@dataclass(frozen=True)
class ClassifierThresholds:
    negativity: float = 0.02
    sparsity_localized: float = 0.10
    sparsity_chaotic: float = 0.30
    # nats; about half the maximum entropy of a 128 x 128 coefficient set
    entropy_chaotic: float = 5.0
    stationarity: float = 1e-4
    window: int = 10


def is_stationary(record, history, thresholds):
    """True if the last ``window`` records (current included) all change slower than the bound."""
    recent = list(history)[-(thresholds.window - 1):] + [record] if thresholds.window > 1 else [record]
    if len(recent) < thresholds.window:
        return False
    rates = [r.change_rate for r in recent]
    if any(math.isnan(x) for x in rates):
        return False
    return max(rates) <= thresholds.stationarity


def classify_state(record, history=(), thresholds=ClassifierThresholds()):
    """Regime of ``record`` given earlier records (oldest first)."""
    if record.negativity_volume > thresholds.negativity:
        return Regime.ENTANGLED_LIKE
    sparse = record.sparsity <= thresholds.sparsity_localized
    if sparse and is_stationary(record, history, thresholds):
        return Regime.WAVELETON
    if sparse:
        return Regime.LOCALIZED
    if record.sparsity > thresholds.sparsity_chaotic and record.shannon_entropy > thresholds.entropy_chaotic:
        return Regime.CHAOTIC_LIKE
    return Regime.UNCLASSIFIED
