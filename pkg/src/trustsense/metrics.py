"""Per-run metrics and the normalized accuracy/path/energy trade-off score."""

from __future__ import annotations

from dataclasses import dataclass


class NoBenevolentTrafficError(RuntimeError):
    """Accuracy is undefined: no benevolent sensor originated any packet."""


class NormalizationBoundError(ValueError):
    """A metric exceeded its normalization maximum (normalization bound
    exceeded)."""


@dataclass(frozen=True)
class MetricsRecord:
    """Aggregate outcome of one run. Accuracy is the fraction of
    benevolent-origin data packets that reached their own cluster head intact
    and were accepted; path length averages over those deliveries."""
    accuracy: float
    avg_path_length: float
    energy: float
    blacklist_true_positives: int
    blacklist_false_positives: int


@dataclass(frozen=True)
class ScoreWeights:
    """Weights and normalization bounds for the trade-off score. The weights
    must total 100 so a perfect run scores 100."""
    w_accuracy: float = 40.0
    w_path: float = 20.0
    w_energy: float = 40.0
    a_max: float = 1.0
    p_max: float = 100.0
    e_max_rounding: float = 100000.0

    def __post_init__(self):
        if abs(self.w_accuracy + self.w_path + self.w_energy - 100.0) > 1e-9:
            raise ValueError("score weights must sum to 100")
        if self.a_max <= 0 or self.p_max <= 0 or self.e_max_rounding <= 0:
            raise ValueError("normalization bounds must be positive")


def compute_accuracy(satisfactory: int, benevolent_emitted: int) -> float:
    """Fraction of benevolent-origin packets delivered satisfactorily; a
    packet delivered with an altered value is not satisfactory."""
    if benevolent_emitted == 0:
        raise NoBenevolentTrafficError("no benevolent traffic")
    return satisfactory / benevolent_emitted


def tradeoff_score(record: MetricsRecord, weights: ScoreWeights,
                   e_max: float) -> float:
    """Percentage score: accuracy normalized up, path length and energy
    normalized down, combined with the configured weights."""
    if e_max < record.energy or weights.p_max < record.avg_path_length:
        raise NormalizationBoundError(
            f"normalization bound exceeded: energy {record.energy} vs "
            f"{e_max}, path {record.avg_path_length} vs {weights.p_max}")
    a_n = record.accuracy / weights.a_max
    p_n = 1.0 - record.avg_path_length / weights.p_max
    e_n = 1.0 - (record.energy / e_max if e_max > 0 else 0.0)
    return (weights.w_accuracy * a_n + weights.w_path * p_n
            + weights.w_energy * e_n)
