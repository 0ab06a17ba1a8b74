"""Threshold-profile classifier over integrity metrics.

This is the LLM-free detection path: each pair delta is compared against
a per-metric threshold, the exceed fractions are blended by weight, and
the blended score is thresholded into a real/fake label. It exists so
the whole pipeline can run and be tested closed-loop with no endpoint;
it is not meant to rival the reasoning path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import NoPairs, SchemaError
from .metrics import DELTA_METRICS, IntegrityMetrics

# Defaults calibrated on the synthetic smooth/discontinuous corpus used by
# the acceptance suite: comfortably above smooth-motion deltas, well below
# injected-artifact deltas.
DEFAULT_THRESHOLDS = {
    "delta_blur": 40.0,
    "delta_color": 2.0,
    "delta_texture": 0.2,
    "delta_boundary": 3.0,
}


@dataclass
class ThresholdProfile:
    thresholds: dict[str, float]
    weights: dict[str, float] = field(
        default_factory=lambda: {name: 0.25 for name in DELTA_METRICS}
    )

    def __post_init__(self) -> None:
        for mapping, label in ((self.thresholds, "thresholds"), (self.weights, "weights")):
            if set(mapping) != set(DELTA_METRICS):
                raise SchemaError(f"{label} must cover exactly {sorted(DELTA_METRICS)}")
            for name, value in mapping.items():
                if value < 0:
                    raise SchemaError(f"{label}[{name}] must be >= 0")
        total = sum(self.weights.values())
        if abs(total - 1.0) > 1e-9:
            raise SchemaError(f"weights must sum to 1, got {total}")


def default_profile() -> ThresholdProfile:
    return ThresholdProfile(thresholds=dict(DEFAULT_THRESHOLDS))


def load_profile(path: str | Path) -> ThresholdProfile:
    """Read a profile JSON: {metric: {exceed_threshold, weight}, ...}."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read threshold profile: {exc}") from exc
    if not isinstance(raw, dict):
        raise SchemaError("threshold profile must be a JSON object")
    thresholds: dict[str, float] = {}
    weights: dict[str, float] = {}
    for name, entry in raw.items():
        if not isinstance(entry, dict) or "exceed_threshold" not in entry or "weight" not in entry:
            raise SchemaError(
                f"profile entry '{name}' needs 'exceed_threshold' and 'weight'"
            )
        thresholds[name] = float(entry["exceed_threshold"])
        weights[name] = float(entry["weight"])
    return ThresholdProfile(thresholds=thresholds, weights=weights)


def anomaly_score(metrics: IntegrityMetrics, profile: ThresholdProfile) -> float:
    """Weighted fraction of pairs whose deltas exceed their thresholds."""
    pairs = metrics.per_pair
    if not pairs:
        raise NoPairs("anomaly scoring needs at least one consecutive pair")
    score = 0.0
    for name in DELTA_METRICS:
        threshold = profile.thresholds[name]
        exceed = sum(1 for p in pairs if getattr(p, name) > threshold)
        score += profile.weights[name] * (exceed / len(pairs))
    return score


def classify(score: float, threshold: float = 0.5) -> str:
    """Label a score: fake at or above the threshold, real below."""
    if not 0.0 <= score <= 1.0:
        raise ValueError(f"score must lie in [0, 1], got {score}")
    return "fake" if score >= threshold else "real"
