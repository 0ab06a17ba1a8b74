"""Reference training objectives as pure functions over probabilities.

These mirror the staged optimization targets: a token-level rationale
negative log likelihood, a label classification loss, a KL penalty that
keeps the two branches emphasizing the same evidence, and their weighted
composite. Natural log throughout. No gradient machinery lives here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import DivergentSupport, DomainError


@dataclass
class LossWeights:
    lambda1: float = 0.8
    lambda2: float = 1.0
    lambda3: float = 0.1

    def __post_init__(self) -> None:
        if min(self.lambda1, self.lambda2, self.lambda3) < 0:
            raise ValueError("loss weights must be >= 0")


def rationale_nll(probs: Sequence[float]) -> float:
    """Negative log likelihood of the ground-truth rationale tokens."""
    if not probs:
        raise DomainError("token probability sequence must be nonempty")
    total = 0.0
    for p in probs:
        if p <= 0.0 or p > 1.0:
            raise DomainError(f"token probability {p} outside (0, 1]")
        total -= math.log(p)
    return total


def answer_nll(p_true: float) -> float:
    """Negative log likelihood of the correct label."""
    if p_true <= 0.0 or p_true > 1.0:
        raise DomainError(f"label probability {p_true} outside (0, 1]")
    return -math.log(p_true)


def evidence_kl(p: Mapping[str, float], q: Mapping[str, float]) -> float:
    """KL(p || q) over a shared evidence-key support, with 0 log 0 = 0."""
    _check_distribution(p, "p")
    _check_distribution(q, "q")
    if set(p) != set(q):
        raise DivergentSupport("distributions must share one evidence key set")
    total = 0.0
    for key, p_e in p.items():
        if p_e == 0.0:
            continue
        q_e = q[key]
        if q_e == 0.0:
            raise DivergentSupport(f"q('{key}') = 0 where p has mass")
        total += p_e * math.log(p_e / q_e)
    return total


def _check_distribution(dist: Mapping[str, float], name: str) -> None:
    if any(v < 0 for v in dist.values()):
        raise DomainError(f"{name} contains a negative mass")
    total = sum(dist.values())
    if abs(total - 1.0) > 1e-9:
        raise DomainError(f"{name} must sum to 1, got {total}")


def composite_loss(l_rle: float, l_ans: float, l_cons: float, w: LossWeights | None = None) -> float:
    """Weighted sum of the three component losses."""
    w = w or LossWeights()
    for value in (l_rle, l_ans, l_cons):
        if not math.isfinite(value):
            raise DomainError(f"loss component must be finite, got {value}")
    return w.lambda1 * l_rle + w.lambda2 * l_ans + w.lambda3 * l_cons
