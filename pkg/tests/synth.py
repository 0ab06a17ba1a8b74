"""Synthetic videos, faces, and landmark files for the test suite.

Real-style videos drift a textured face gently (integer-pixel roll plus
a one-count brightness breathing), fake-style videos additionally blur
and brighten the face interior on alternating frames, which spikes all
four pair-delta metrics.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from fef.frames import FrameSequence

HEIGHT, WIDTH = 96, 96
FACE_BOX = (28, 24, 68, 72)  # x0, y0, x1, y1
POINTS = {
    "left_eye": [40.0, 40.0],
    "right_eye": [56.0, 40.0],
    "nose": [48.0, 52.0],
    "mouth_left": [42.0, 62.0],
    "mouth_right": [54.0, 62.0],
}


def base_frame(seed: int) -> np.ndarray:
    """Gradient background plus a textured face patch."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:HEIGHT, 0:WIDTH]
    frame = np.zeros((HEIGHT, WIDTH, 3), dtype=np.float64)
    frame[..., 0] = 60 + 0.6 * xx
    frame[..., 1] = 70 + 0.5 * yy
    frame[..., 2] = 90 + 0.3 * (xx + yy) / 2
    x0, y0, x1, y1 = FACE_BOX
    texture = rng.integers(-35, 36, size=(y1 - y0, x1 - x0, 3)).astype(np.float64)
    face = np.array([188.0, 150.0, 122.0]) + texture
    frame[y0:y1, x0:x1] = face
    return np.clip(frame, 0, 255).astype(np.uint8)


def _box_blur3(region: np.ndarray) -> np.ndarray:
    padded = np.pad(region.astype(np.float64), ((1, 1), (1, 1), (0, 0)), mode="edge")
    acc = np.zeros_like(region, dtype=np.float64)
    for dy in range(3):
        for dx in range(3):
            acc += padded[dy : dy + region.shape[0], dx : dx + region.shape[1]]
    return np.clip(acc / 9.0, 0, 255).astype(np.uint8)


def make_video(kind: str, n_frames: int = 72, seed: int = 0) -> FrameSequence:
    """'real' drifts smoothly; 'fake' injects alternating-frame artifacts."""
    base = base_frame(seed)
    frames = []
    for t in range(n_frames):
        frame = np.roll(base, shift=t % 3, axis=1).copy()
        frame = np.clip(frame.astype(np.int16) + (t % 2), 0, 255).astype(np.uint8)
        if kind == "fake" and t % 2 == 0:
            x0, y0, x1, y1 = FACE_BOX
            region = frame[y0:y1, x0:x1]
            region = _box_blur3(region)
            region = np.clip(region.astype(np.int16) + 20, 0, 255).astype(np.uint8)
            frame[y0:y1, x0:x1] = region
        frames.append(frame)
    return FrameSequence(frames=frames, source_id=f"synthetic-{kind}-{seed}")


def constant_video(n_frames: int = 9, seed: int = 0) -> FrameSequence:
    """Byte-identical frames (the zero-law input)."""
    base = base_frame(seed)
    return FrameSequence(frames=[base.copy() for _ in range(n_frames)],
                         source_id=f"synthetic-constant-{seed}")


def landmark_payload(n_frames: int, box=FACE_BOX, confidence: float = 0.98) -> dict:
    x0, y0, x1, y1 = box
    return {
        "frames": [
            {
                "frame_index": t,
                "faces": [
                    {
                        "box": [x0, y0, x1, y1],
                        "confidence": confidence,
                        "points": {k: list(v) for k, v in POINTS.items()},
                    }
                ],
            }
            for t in range(n_frames)
        ]
    }


def write_landmarks(path: Path, n_frames: int, **kwargs) -> Path:
    path.write_text(json.dumps(landmark_payload(n_frames, **kwargs)), encoding="utf-8")
    return path


def write_frames_dir(seq: FrameSequence, directory: Path) -> Path:
    from fef.frames import write_png

    directory.mkdir(parents=True, exist_ok=True)
    width = max(3, len(str(len(seq) - 1)))
    for i, frame in enumerate(seq.frames):
        write_png(frame, directory / f"{i:0{width}d}.png")
    return directory


def track_from_payload(payload: dict, dims: tuple[int, int]):
    """Build a FaceTrack from an in-memory landmark payload."""
    from fef.facetrack import FaceBox, FaceRecord, LandmarkFrame, build_face_track

    frames = []
    for entry in payload["frames"]:
        faces = [
            FaceRecord(
                box=FaceBox(*face["box"]),
                points={k: tuple(v) for k, v in face["points"].items()},
                confidence=face["confidence"],
            )
            for face in entry["faces"]
        ]
        frames.append(LandmarkFrame(frame_index=entry["frame_index"], faces=faces))
    return build_face_track(frames, dims)
