"""Reasoning-corpus construction: masks, region scores, and quadruples.

Forged and pristine frames are compared pixel-by-pixel into binary
masks, landmark-derived regions (mouth, nose, eyes, whole face) are
scored by mask coverage, and each sample becomes one JSONL row holding
a question built from a per-forgery-type template, the video reference,
a rationale, and the real/fake answer. Rationales are deterministic
templated text built from the structured label; a caller may swap in an
endpoint-backed generator when one is configured.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import (
    DimensionMismatch,
    MissingLandmark,
    SchemaError,
    TemplateError,
    ZeroRegion,
)
from .facetrack import FaceBox, FaceTrack, _round_half_up
from .frames import FrameSequence

REGION_NAMES = ("mouth", "nose", "eyes", "face")


class ForgeryType(str, Enum):
    DEEPFAKE = "DeepFake"
    FACE2FACE = "Face2Face"
    FACESWAP = "FaceSwap"
    FACESHIFTER = "FaceShifter"
    NEURALTEXTURE = "NeuralTexture"
    REAL = "Real"

    @classmethod
    def parse(cls, value: str) -> "ForgeryType":
        for member in cls:
            if member.value == value:
                return member
        raise TemplateError(f"unknown forgery type: {value!r}")


DEFAULT_TEMPLATES: dict[ForgeryType, str] = {
    ForgeryType.DEEPFAKE: (
        "This clip may contain a full-face identity replacement ({forgery_type}). "
        "Check the blending boundary around the face, doubled or smeared facial "
        "elements, and the measured region scores {region_scores}. Is the video "
        "real or fake, and why?"
    ),
    ForgeryType.FACE2FACE: (
        "This clip may contain an expression reenactment ({forgery_type}). Check "
        "whether mouth and brow motion stays consistent with the rest of the face, "
        "using the region scores {region_scores}. Is the video real or fake, and why?"
    ),
    ForgeryType.FACESWAP: (
        "This clip may contain a graphics-based face swap ({forgery_type}). Check "
        "jawline geometry and landmark alignment against the region scores "
        "{region_scores}. Is the video real or fake, and why?"
    ),
    ForgeryType.FACESHIFTER: (
        "This clip may contain an occlusion-aware face swap ({forgery_type}). "
        "Check hairline halos and occluded-region handling together with the "
        "region scores {region_scores}. Is the video real or fake, and why?"
    ),
    ForgeryType.NEURALTEXTURE: (
        "This clip may contain a neural texture reenactment ({forgery_type}). "
        "Check for edge artifacts, resolution anomalies, and lighting "
        "inconsistencies near the mouth, guided by the region scores "
        "{region_scores}. Is the video real or fake, and why?"
    ),
    ForgeryType.REAL: (
        "Verify the authenticity of this clip ({forgery_type} candidate). The "
        "measured region scores are {region_scores}. Is the video real or fake, "
        "and why?"
    ),
}


@dataclass
class RegionMask:
    bitmap: np.ndarray
    threshold_used: float


@dataclass
class RegionScore:
    degrees: dict[str, float]

    def __post_init__(self) -> None:
        for name, value in self.degrees.items():
            if not 0.0 <= value <= 1.0:
                raise SchemaError(f"region degree '{name}' outside [0, 1]: {value}")


@dataclass
class StructuredLabel:
    forgery_type: ForgeryType
    region_scores: RegionScore
    evidence_summary: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.forgery_type is ForgeryType.REAL:
            if any(v != 0.0 for v in self.region_scores.degrees.values()):
                raise SchemaError("Real samples must carry all-zero region scores")


@dataclass
class ReasoningQuadruple:
    question: str
    video_ref: str
    rationale: str
    answer: str

    def __post_init__(self) -> None:
        for name in ("question", "video_ref", "rationale", "answer"):
            if not getattr(self, name):
                raise SchemaError(f"quadruple field '{name}' must be nonempty")


def diff_mask(real_frame: np.ndarray, fake_frame: np.ndarray, tau: float = 25.0) -> RegionMask:
    """Pixels whose max-channel absolute difference exceeds tau (8-bit scale)."""
    real_frame = np.asarray(real_frame)
    fake_frame = np.asarray(fake_frame)
    if real_frame.shape != fake_frame.shape:
        raise DimensionMismatch(
            f"frame shapes differ: {real_frame.shape} vs {fake_frame.shape}"
        )
    diff = np.abs(real_frame.astype(np.int16) - fake_frame.astype(np.int16))
    bitmap = diff.max(axis=2) > tau
    return RegionMask(bitmap=bitmap, threshold_used=float(tau))


def partition_regions(
    points: dict[str, tuple[float, float]],
    face_box: FaceBox,
    dims: tuple[int, int],
) -> dict[str, FaceBox]:
    """Landmark-derived region boxes, each padded by 10% of the face size."""
    h, w = dims
    pad_x = 0.10 * (face_box.x1 - face_box.x0)
    pad_y = 0.10 * (face_box.y1 - face_box.y0)

    def box_around(names: tuple[str, ...]) -> FaceBox:
        pts = []
        for name in names:
            if name not in points:
                raise MissingLandmark(f"keypoint '{name}' is required")
            pts.append(points[name])
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        x0 = max(0, _round_half_up(min(xs) - pad_x))
        y0 = max(0, _round_half_up(min(ys) - pad_y))
        x1 = min(w, _round_half_up(max(xs) + pad_x))
        y1 = min(h, _round_half_up(max(ys) + pad_y))
        return FaceBox(x0, y0, max(x1, x0), max(y1, y0))

    return {
        "mouth": box_around(("mouth_left", "mouth_right")),
        "nose": box_around(("nose",)),
        "eyes": box_around(("left_eye", "right_eye")),
        "face": face_box,
    }


def region_forgery_degree(mask: RegionMask, regions: dict[str, FaceBox]) -> RegionScore:
    """Per-region fraction of masked pixels."""
    degrees: dict[str, float] = {}
    for name, box in regions.items():
        area = box.area()
        if area <= 0:
            raise ZeroRegion(f"region '{name}' has zero area")
        window = mask.bitmap[box.y0 : box.y1, box.x0 : box.x1]
        degrees[name] = float(window.sum() / area)
    return RegionScore(degrees=degrees)


def score_video_regions(
    real_seq: FrameSequence,
    fake_seq: FrameSequence,
    track: FaceTrack,
    tau: float = 25.0,
) -> RegionScore:
    """Average per-frame region coverage over all tracked frames."""
    if len(real_seq) != len(fake_seq):
        raise DimensionMismatch("real and fake sequences differ in length")
    if not track.entries:
        raise MissingLandmark("no tracked frames to score")
    sums = {name: 0.0 for name in REGION_NAMES}
    for entry in track.entries:
        mask = diff_mask(real_seq.frames[entry.frame_index], fake_seq.frames[entry.frame_index], tau)
        regions = partition_regions(entry.landmarks, entry.refined_box, real_seq.dims)
        degrees = region_forgery_degree(mask, regions).degrees
        for name in REGION_NAMES:
            sums[name] += degrees[name]
    count = len(track.entries)
    return RegionScore(degrees={name: sums[name] / count for name in REGION_NAMES})


def zero_region_score() -> RegionScore:
    return RegionScore(degrees={name: 0.0 for name in REGION_NAMES})


def build_rationale(label: StructuredLabel) -> str:
    """Deterministic rationale text derived from the structured label."""
    scores = label.region_scores.degrees
    ranked = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    listing = "; ".join(f"{name} coverage {value:.3f}" for name, value in ranked)
    if label.forgery_type is ForgeryType.REAL:
        return (
            "Pixel comparison produced no manipulated regions "
            f"({listing}), and the facial integrity deltas stay within "
            "smooth-motion bounds, so the clip behaves like an unedited recording."
        )
    top_name, top_value = ranked[0]
    return (
        f"Pixel comparison against the pristine source marks the {top_name} "
        f"region most strongly ({top_value:.3f} coverage; full ranking: {listing}). "
        f"This spatial pattern matches {label.forgery_type.value} manipulation, "
        "so the clip is treated as forged."
    )


def format_region_scores(scores: RegionScore) -> str:
    return json.dumps(
        {name: round(value, 6) for name, value in sorted(scores.degrees.items())},
        sort_keys=True,
    )


def assemble_quadruple(
    video_ref: str,
    label: StructuredLabel,
    templates: dict[ForgeryType, str],
    rationale_text: str,
) -> ReasoningQuadruple:
    """Render the per-type question template and attach the rationale."""
    template = templates.get(label.forgery_type)
    if template is None:
        raise TemplateError(f"no template for forgery type {label.forgery_type.value}")
    question = template.format(
        region_scores=format_region_scores(label.region_scores),
        forgery_type=label.forgery_type.value,
    )
    answer = "real" if label.forgery_type is ForgeryType.REAL else "fake"
    return ReasoningQuadruple(
        question=question, video_ref=video_ref, rationale=rationale_text, answer=answer
    )


def corpus_row(quad: ReasoningQuadruple, label: StructuredLabel) -> dict:
    return {
        "question": quad.question,
        "video_ref": quad.video_ref,
        "rationale": quad.rationale,
        "answer": quad.answer,
        "forgery_type": label.forgery_type.value,
        "region_scores": {k: v for k, v in sorted(label.region_scores.degrees.items())},
    }


def write_corpus(rows: list[dict], path: str | Path) -> None:
    """One compact JSON object per line, in input order."""
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True, separators=(",", ":")))
            fh.write("\n")


def read_corpus(path: str | Path) -> list[dict]:
    rows: list[dict] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"line {lineno}: invalid JSON: {exc}") from exc
            for key in ("question", "video_ref", "rationale", "answer"):
                if not row.get(key):
                    raise SchemaError(f"line {lineno}: missing or empty '{key}'")
            rows.append(row)
    return rows


def load_templates(directory: str | Path) -> dict[ForgeryType, str]:
    """Read <TypeName>.txt files; types without a file are simply absent."""
    directory = Path(directory)
    templates: dict[ForgeryType, str] = {}
    for member in ForgeryType:
        candidate = directory / f"{member.value}.txt"
        if candidate.exists():
            templates[member] = candidate.read_text(encoding="utf-8").strip()
    return templates


def corpus_stats(rows: list[dict]) -> dict:
    """Counts and fractions by answer and by forgery type."""
    fake = sum(1 for r in rows if r.get("answer") == "fake")
    real = sum(1 for r in rows if r.get("answer") == "real")
    total = len(rows)
    per_type: dict[str, int] = {}
    for row in rows:
        name = row.get("forgery_type", "unknown")
        per_type[name] = per_type.get(name, 0) + 1
    return {
        "total": total,
        "fake_count": fake,
        "real_count": real,
        "fake_fraction": fake / total if total else 0.0,
        "real_fraction": real / total if total else 0.0,
        "per_type": dict(sorted(per_type.items())),
    }
