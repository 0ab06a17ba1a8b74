"""Frame ingestion, uniform clip sampling, and 3x3 temporal grid composition.

A video enters the pipeline either as a directory of numbered PNG/BMP
frames (the canonical form) or as a raw video file handed to a
user-supplied external decoder command. Sampling divides the timeline
into contiguous near-equal segments and picks evenly spaced indices
inside each, so the result is fully deterministic; short inputs repeat
indices instead of failing.
"""

from __future__ import annotations

import shlex
import subprocess
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import ArityError, DecodeFailure, DimensionMismatch, EmptyInput
from .imageops import resize_bilinear

_FRAME_SUFFIXES = {".png", ".bmp"}


@dataclass
class FrameSequence:
    """Ordered RGB frames sharing one resolution."""

    frames: list[np.ndarray]
    frame_rate: float | None = None
    source_id: str = ""

    def __post_init__(self) -> None:
        if not self.frames:
            raise EmptyInput("frame sequence must contain at least one frame")
        first = self.frames[0].shape
        for i, f in enumerate(self.frames):
            if f.ndim != 3 or f.shape[2] != 3:
                raise DimensionMismatch(f"frame {i} is not HxWx3")
            if f.shape != first:
                raise DimensionMismatch(
                    f"frame {i} has shape {f.shape[:2]}, expected {first[:2]}"
                )

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def dims(self) -> tuple[int, int]:
        """(height, width) of every frame."""
        h, w = self.frames[0].shape[:2]
        return h, w


@dataclass
class ClipSet:
    """Clip-index lists into a parent FrameSequence."""

    clips: list[list[int]]
    n_clips: int
    frames_per_clip: int


@dataclass
class FrameGrid:
    """3x3 composite rendering one clip, row-major cell order."""

    image: np.ndarray
    clip_index: int
    cell_map: list[int] = field(default_factory=list)


def load_frames(source_path: str | Path, decode_config: str | None = None) -> FrameSequence:
    """Load a frame directory, or decode a video file through an external command.

    ``decode_config`` is a command template with ``{input}`` and ``{outdir}``
    placeholders; the decoder must emit numbered PNG/BMP frames into outdir.
    """
    source_path = Path(source_path)
    if source_path.is_dir():
        return _load_frame_dir(source_path)
    if not source_path.exists():
        raise EmptyInput(f"no such path: {source_path}")
    if decode_config is None:
        raise DecodeFailure(
            f"{source_path} is a file but no decoder command template is configured"
        )
    with tempfile.TemporaryDirectory(prefix="fef-decode-") as outdir:
        # Replace only the two known placeholders so decoder commands may
        # contain arbitrary brace characters of their own.
        cmd = [
            part.replace("{input}", str(source_path)).replace("{outdir}", outdir)
            for part in shlex.split(decode_config)
        ]
        proc = subprocess.run(cmd, capture_output=True, text=True)
        if proc.returncode != 0:
            raise DecodeFailure(
                f"decoder exited {proc.returncode}: {proc.stderr.strip()[:400]}"
            )
        seq = _load_frame_dir(Path(outdir))
        seq.source_id = str(source_path)
        return seq


def _load_frame_dir(directory: Path) -> FrameSequence:
    paths = [p for p in directory.iterdir() if p.suffix.lower() in _FRAME_SUFFIXES]
    if not paths:
        raise EmptyInput(f"no PNG/BMP frames in {directory}")
    if all(p.stem.lstrip("-").isdigit() for p in paths):
        paths.sort(key=lambda p: int(p.stem))
    else:
        paths.sort(key=lambda p: p.name)
    frames = []
    for p in paths:
        with Image.open(p) as img:
            frames.append(np.asarray(img.convert("RGB"), dtype=np.uint8))
    return FrameSequence(frames=frames, source_id=str(directory))


def write_png(image: np.ndarray, path: str | Path) -> None:
    """Write an HxWx3 uint8 array as PNG."""
    Image.fromarray(np.asarray(image, dtype=np.uint8), mode="RGB").save(str(path), format="PNG")


def sample_clips(seq: FrameSequence, n_clips: int = 8, frames_per_clip: int = 9) -> ClipSet:
    """Uniformly sample ``n_clips`` clips of ``frames_per_clip`` indices.

    The timeline [0, t) is split into n_clips contiguous segments,
    segment i spanning [floor(i*t/N), floor((i+1)*t/N)). Within a segment
    of length L starting at s, clip position j maps to s + floor(j*L/d).
    Segments shorter than d therefore repeat indices (non-decreasing) and
    never leave their segment.
    """
    if len(seq) == 0:
        raise EmptyInput("cannot sample an empty sequence")
    if n_clips < 1 or frames_per_clip < 1:
        raise ValueError("n_clips and frames_per_clip must be >= 1")
    t = len(seq)
    clips: list[list[int]] = []
    for i in range(n_clips):
        start = (i * t) // n_clips
        end = ((i + 1) * t) // n_clips
        length = end - start
        clips.append([start + (j * length) // frames_per_clip for j in range(frames_per_clip)])
    return ClipSet(clips=clips, n_clips=n_clips, frames_per_clip=frames_per_clip)


def compose_grid(
    seq: FrameSequence,
    clip: list[int],
    cell_size: tuple[int, int] = (224, 224),
    clip_index: int = 0,
) -> FrameGrid:
    """Render 9 clip frames into a 3x3 composite, row-major.

    Cell (r, c) holds clip frame 3r+c resized to cell_size with bilinear
    interpolation; the composite is exactly (3H', 3W', 3).
    """
    if len(clip) != 9:
        raise ArityError(f"grid composition needs exactly 9 indices, got {len(clip)}")
    cell_h, cell_w = cell_size
    if cell_h <= 0 or cell_w <= 0:
        raise ValueError("cell_size must be positive")
    composite = np.zeros((3 * cell_h, 3 * cell_w, 3), dtype=np.uint8)
    for pos, frame_idx in enumerate(clip):
        r, c = divmod(pos, 3)
        cell = resize_bilinear(seq.frames[frame_idx], cell_h, cell_w)
        composite[r * cell_h : (r + 1) * cell_h, c * cell_w : (c + 1) * cell_w] = cell
    return FrameGrid(image=composite, clip_index=clip_index, cell_map=list(clip))
