"""fef: facial evidence forensics.

Deterministic deepfake-video evidence extraction (clip sampling, 3x3
temporal grids, face-crop integrity metrics), canonical JSON evidence,
two-stage reasoning orchestration against a chat endpoint, a threshold
heuristic for endpoint-free operation, reasoning-corpus construction,
and detection/rationale evaluation metrics.
"""

from . import (
    dataset,
    evalmetrics,
    evidence,
    errors,
    facetrack,
    frames,
    heuristic,
    metrics,
    objectives,
    pipeline,
    reasoning,
)

__version__ = "0.1.0"

__all__ = [
    "dataset",
    "evalmetrics",
    "evidence",
    "errors",
    "facetrack",
    "frames",
    "heuristic",
    "metrics",
    "objectives",
    "pipeline",
    "reasoning",
    "__version__",
]
