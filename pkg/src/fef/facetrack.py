"""Face tracking from externally supplied landmark detections.

Landmarks arrive as a JSON file (one record per frame, any number of
candidate faces each). Per frame we keep only the largest face box,
grow it by a configurable fraction of its own size, clamp to the frame,
and collect the result into a FaceTrack; frames without any face are
recorded as gaps instead of aborting the run.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DegenerateBox, RangeError, SchemaError

REQUIRED_POINTS = ("left_eye", "right_eye", "nose", "mouth_left", "mouth_right")


@dataclass(frozen=True)
class FaceBox:
    """Integer pixel box, half-open on the right and bottom edges."""

    x0: int
    y0: int
    x1: int
    y1: int

    def area(self) -> int:
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    def as_list(self) -> list[int]:
        return [self.x0, self.y0, self.x1, self.y1]


@dataclass
class FaceRecord:
    """One detected face: box, named keypoints, confidence."""

    box: FaceBox
    points: dict[str, tuple[float, float]]
    confidence: float
    points68: list[tuple[float, float]] | None = None


@dataclass
class LandmarkFrame:
    """All candidate faces detected in one frame."""

    frame_index: int
    faces: list[FaceRecord]


@dataclass
class TrackEntry:
    frame_index: int
    refined_box: FaceBox
    landmarks: dict[str, tuple[float, float]]
    confidence: float


@dataclass
class FaceTrack:
    """Per-frame primary-face evidence; ``gaps`` lists faceless frames."""

    entries: list[TrackEntry] = field(default_factory=list)
    gaps: list[int] = field(default_factory=list)

    def entry_for(self, frame_index: int) -> TrackEntry | None:
        for e in self.entries:
            if e.frame_index == frame_index:
                return e
        return None


def ingest_landmarks(path: str | Path) -> list[LandmarkFrame]:
    """Parse and validate the landmark JSON file.

    Raises SchemaError (with a JSON path) on structural problems and
    RangeError when a confidence falls outside [0, 1].
    """
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read landmark file: {exc}") from exc
    if not isinstance(raw, dict) or "frames" not in raw:
        raise SchemaError("expected a top-level object with a 'frames' array")
    if not isinstance(raw["frames"], list):
        raise SchemaError("'frames' must be an array", "$.frames")

    frames: list[LandmarkFrame] = []
    for fi, frame in enumerate(raw["frames"]):
        fpath = f"$.frames[{fi}]"
        if not isinstance(frame, dict):
            raise SchemaError("frame must be an object", fpath)
        idx = frame.get("frame_index")
        if not isinstance(idx, int) or idx < 0:
            raise SchemaError("'frame_index' must be a nonnegative int", fpath)
        faces_raw = frame.get("faces")
        if not isinstance(faces_raw, list):
            raise SchemaError("'faces' must be an array", fpath)
        faces = [_parse_face(face, f"{fpath}.faces[{j}]") for j, face in enumerate(faces_raw)]
        frames.append(LandmarkFrame(frame_index=idx, faces=faces))
    return frames


def _parse_face(face: object, path: str) -> FaceRecord:
    if not isinstance(face, dict):
        raise SchemaError("face must be an object", path)
    box_raw = face.get("box")
    if not (isinstance(box_raw, list) and len(box_raw) == 4):
        raise SchemaError("'box' must be [x0, y0, x1, y1]", f"{path}.box")
    x0, y0, x1, y1 = (_number(v, f"{path}.box[{k}]") for k, v in enumerate(box_raw))
    if not (x0 < x1 and y0 < y1):
        raise SchemaError("box must satisfy x0 < x1 and y0 < y1", f"{path}.box")

    conf = _number(face.get("confidence"), f"{path}.confidence")
    if not 0.0 <= conf <= 1.0:
        raise RangeError(f"confidence {conf} outside [0, 1] at {path}.confidence")

    points_raw = face.get("points")
    if not isinstance(points_raw, dict):
        raise SchemaError("'points' must be an object", f"{path}.points")
    points: dict[str, tuple[float, float]] = {}
    for name in REQUIRED_POINTS:
        pt = points_raw.get(name)
        if not (isinstance(pt, list) and len(pt) == 2):
            raise SchemaError(f"point '{name}' must be [x, y]", f"{path}.points.{name}")
        points[name] = (_number(pt[0], f"{path}.points.{name}[0]"),
                        _number(pt[1], f"{path}.points.{name}[1]"))

    points68 = None
    if "points68" in face:
        raw68 = face["points68"]
        if not (isinstance(raw68, list) and len(raw68) == 68):
            raise SchemaError("'points68' must hold exactly 68 points", f"{path}.points68")
        points68 = [
            (_number(p[0], f"{path}.points68[{k}]"), _number(p[1], f"{path}.points68[{k}]"))
            for k, p in enumerate(raw68)
        ]

    return FaceRecord(
        box=FaceBox(int(x0), int(y0), int(x1), int(y1)),
        points=points,
        confidence=float(conf),
        points68=points68,
    )


def _number(value: object, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError("expected a number", path)
    return float(value)


def select_primary_face(faces: list[FaceRecord]) -> FaceRecord | None:
    """Largest box wins; ties break toward the smallest (x0, y0)."""
    if not faces:
        return None
    return min(faces, key=lambda f: (-f.box.area(), f.box.x0, f.box.y0))


def expand_box(box: FaceBox, factor: float = 0.30, frame_dims: tuple[int, int] = (0, 0)) -> FaceBox:
    """Grow a box by ``factor`` of its own size (factor/2 per side), clamped.

    ``frame_dims`` is (height, width); rounding is half-up to the nearest
    integer. A box that collapses to zero area after clamping raises
    DegenerateBox.
    """
    if factor < 0:
        raise ValueError("factor must be >= 0")
    h, w = frame_dims
    pad_x = factor / 2.0 * (box.x1 - box.x0)
    pad_y = factor / 2.0 * (box.y1 - box.y0)
    x0 = max(0, _round_half_up(box.x0 - pad_x))
    y0 = max(0, _round_half_up(box.y0 - pad_y))
    x1 = min(w, _round_half_up(box.x1 + pad_x))
    y1 = min(h, _round_half_up(box.y1 + pad_y))
    if x0 >= x1 or y0 >= y1:
        raise DegenerateBox(f"box {box.as_list()} collapsed to zero area after clamping")
    return FaceBox(x0, y0, x1, y1)


def _round_half_up(v: float) -> int:
    return int(math.floor(v + 0.5))


def build_face_track(
    landmark_frames: list[LandmarkFrame],
    frame_dims: tuple[int, int],
    factor: float = 0.30,
) -> FaceTrack:
    """Select, refine, and clamp the primary face of every frame."""
    h, w = frame_dims
    ordered = sorted(landmark_frames, key=lambda f: f.frame_index)
    seen: set[int] = set()
    track = FaceTrack()
    for frame in ordered:
        if frame.frame_index in seen:
            raise SchemaError(f"duplicate frame_index {frame.frame_index}")
        seen.add(frame.frame_index)
        primary = select_primary_face(frame.faces)
        if primary is None:
            track.gaps.append(frame.frame_index)
            continue
        refined = expand_box(primary.box, factor, frame_dims)
        clamped_points = {
            name: (min(max(x, 0.0), float(w)), min(max(y, 0.0), float(h)))
            for name, (x, y) in primary.points.items()
        }
        track.entries.append(
            TrackEntry(
                frame_index=frame.frame_index,
                refined_box=refined,
                landmarks=clamped_points,
                confidence=primary.confidence,
            )
        )
    return track
