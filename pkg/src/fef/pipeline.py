"""End-to-end composition of the deterministic inference steps.

``extract_evidence`` runs sampling, grid composition, face tracking, and
the integrity metrics in one call and returns everything the detection
and audit paths need. ``heuristic_detect`` is the no-endpoint verdict.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .evidence import FacialEvidence, serialize_evidence
from .facetrack import FaceTrack, build_face_track, ingest_landmarks
from .frames import ClipSet, FrameGrid, FrameSequence, compose_grid, load_frames, sample_clips
from .heuristic import ThresholdProfile, anomaly_score, classify, default_profile
from .metrics import DELTA_METRICS, IntegrityMetrics, compute_integrity
from .reasoning import map_concurrent


@dataclass
class ExtractionResult:
    clips: ClipSet
    grids: list[FrameGrid]
    track: FaceTrack
    metrics: IntegrityMetrics
    evidence: FacialEvidence
    evidence_bytes: bytes


def extract_evidence(
    frames: str | Path | FrameSequence,
    landmarks: str | Path | list,
    n_clips: int = 8,
    frames_per_clip: int = 9,
    cell_size: tuple[int, int] = (224, 224),
    expand_factor: float = 0.30,
    decode_config: str | None = None,
    max_workers: int = 1,
) -> ExtractionResult:
    """frames + landmarks -> clips, grids, face track, metrics, evidence."""
    seq = frames if isinstance(frames, FrameSequence) else load_frames(frames, decode_config)
    landmark_frames = landmarks if isinstance(landmarks, list) else ingest_landmarks(landmarks)
    clips = sample_clips(seq, n_clips=n_clips, frames_per_clip=frames_per_clip)
    grids = map_concurrent(
        lambda item: compose_grid(seq, item[1], cell_size, clip_index=item[0]),
        list(enumerate(clips.clips)),
        max_workers,
    )
    track = build_face_track(landmark_frames, seq.dims, factor=expand_factor)
    metrics = compute_integrity(seq, clips, track, max_workers=max_workers)
    evidence, evidence_bytes = serialize_evidence(track, metrics)
    return ExtractionResult(
        clips=clips,
        grids=grids,
        track=track,
        metrics=metrics,
        evidence=evidence,
        evidence_bytes=evidence_bytes,
    )


@dataclass
class HeuristicVerdict:
    label: str
    score: float
    explanation: str


def heuristic_detect(
    metrics: IntegrityMetrics,
    profile: ThresholdProfile | None = None,
    threshold: float = 0.5,
) -> HeuristicVerdict:
    """Score the pair deltas against a threshold profile and label the clip."""
    profile = profile or default_profile()
    score = anomaly_score(metrics, profile)
    label = classify(score, threshold)
    pairs = len(metrics.per_pair)
    fractions = []
    for name in DELTA_METRICS:
        exceed = sum(1 for p in metrics.per_pair if getattr(p, name) > profile.thresholds[name])
        fractions.append(f"{name} exceeds its threshold on {exceed}/{pairs} pairs")
    explanation = (
        f"Threshold-profile anomaly score {score:.6f} (decision threshold "
        f"{threshold:g}): " + "; ".join(fractions) + f". Label: {label}."
    )
    return HeuristicVerdict(label=label, score=score, explanation=explanation)
