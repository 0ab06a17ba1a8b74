"""Facial integrity metrics over refined face crops.

Per frame we measure blur (mean squared Laplacian response), LAB
lightness statistics, GLCM texture contrast, Sobel gradient intensity,
Canny edge density, and the high-frequency share of the DFT spectrum.
Consecutive in-clip frame pairs are then compared: blur, color, and
texture changes are absolute differences, and the boundary-artifact
change sums the gradient, edge-density, and frequency-ratio shifts.

Parameter choices that the measurements do not dictate are pinned here
for reproducibility:

* grayscale crops use floor(0.299R + 0.587G + 0.114B)
* GLCM: 16 levels (value // 16), offset (dx=1, dy=0), symmetric, normalized
* Canny: 5x5 Gaussian sigma=1.0, Sobel + L2 magnitude, 4-sector
  non-maximum suppression, 50/150 hysteresis on the raw 8-bit magnitude
  scale, 8-connected weak-edge promotion
* high-frequency bins: radial distance from the centered DC bin greater
  than 0.25 * min(H, W)
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyRegion, NoFaceDetected
from .facetrack import FaceTrack
from .frames import ClipSet, FrameSequence
from .imageops import (
    LAPLACIAN_KERNEL,
    convolve2d_replicate,
    gaussian_kernel,
    sobel_gradients,
    srgb_to_lab_l,
    to_grayscale,
)

DELTA_METRICS = ("delta_blur", "delta_color", "delta_texture", "delta_boundary")


@dataclass
class FrameMetrics:
    frame_index: int
    blur_sigma: float
    lab_mu: float
    lab_sigma: float
    glcm_contrast: float
    gradient_mean: float
    edge_density: float
    freq_ratio: float


@dataclass
class PairDeltas:
    pair: tuple[int, int]
    delta_blur: float
    delta_color: float
    delta_texture: float
    delta_boundary: float


@dataclass
class IntegrityMetrics:
    per_frame: list[FrameMetrics] = field(default_factory=list)
    per_pair: list[PairDeltas] = field(default_factory=list)
    summary: dict[str, dict[str, float]] = field(default_factory=dict)


# --- per-frame measurements ---------------------------------------------


def laplacian_blur(crop: np.ndarray) -> float:
    """Mean squared response of the 4-neighbor Laplacian (no mean subtraction)."""
    crop = _require_nonempty(crop)
    response = convolve2d_replicate(crop, LAPLACIAN_KERNEL)
    return float(np.mean(response**2))


def lab_stats(crop: np.ndarray) -> tuple[float, float]:
    """Mean and population standard deviation of the CIELAB L* channel."""
    if crop.size == 0:
        raise EmptyRegion("empty crop")
    lightness = srgb_to_lab_l(crop)
    return float(np.mean(lightness)), float(np.std(lightness))


def glcm_contrast(crop: np.ndarray) -> float:
    """Texture contrast from a symmetric, normalized co-occurrence matrix."""
    crop = _require_nonempty(crop)
    if crop.shape[1] < 2:
        raise EmptyRegion("co-occurrence at offset (1, 0) needs width >= 2")
    levels = np.clip(crop.astype(np.int64) // 16, 0, 15)
    left = levels[:, :-1].ravel()
    right = levels[:, 1:].ravel()
    glcm = np.zeros((16, 16), dtype=np.float64)
    np.add.at(glcm, (left, right), 1.0)
    np.add.at(glcm, (right, left), 1.0)
    glcm /= glcm.sum()
    n = np.arange(16, dtype=np.float64)
    weights = (n[:, None] - n[None, :]) ** 2
    return float(np.sum(weights * glcm))


def gradient_mean(crop: np.ndarray) -> float:
    """Mean L2 magnitude of the 3x3 Sobel gradient field."""
    crop = _require_nonempty(crop)
    if crop.shape[0] < 3 or crop.shape[1] < 3:
        raise EmptyRegion("Sobel gradients need a crop of at least 3x3")
    gx, gy = sobel_gradients(crop)
    return float(np.mean(np.hypot(gx, gy)))


def edge_density(crop: np.ndarray, low: float = 50.0, high: float = 150.0) -> float:
    """Fraction of pixels the pinned Canny detector marks as edges."""
    crop = _require_nonempty(crop)
    if crop.shape[0] < 3 or crop.shape[1] < 3:
        raise EmptyRegion("edge detection needs a crop of at least 3x3")
    mask = canny_edge_mask(crop, low=low, high=high)
    return float(mask.mean())


def canny_edge_mask(
    gray: np.ndarray, low: float = 50.0, high: float = 150.0, sigma: float = 1.0
) -> np.ndarray:
    """Boolean edge mask: Gaussian smooth, Sobel, NMS, hysteresis."""
    smoothed = convolve2d_replicate(np.asarray(gray, dtype=np.float64), gaussian_kernel(5, sigma))
    gx, gy = sobel_gradients(smoothed)
    mag = np.hypot(gx, gy)
    h, w = mag.shape

    # Quantize gradient direction into 4 sectors and compare against the
    # two neighbors along it; out-of-bounds neighbors count as zero.
    angle = np.degrees(np.arctan2(gy, gx)) % 180.0
    padded = np.zeros((h + 2, w + 2), dtype=np.float64)
    padded[1:-1, 1:-1] = mag

    def shifted(dy: int, dx: int) -> np.ndarray:
        return padded[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w]

    sector0 = (angle < 22.5) | (angle >= 157.5)
    sector45 = (angle >= 22.5) & (angle < 67.5)
    sector90 = (angle >= 67.5) & (angle < 112.5)
    sector135 = (angle >= 112.5) & (angle < 157.5)

    n1 = np.zeros_like(mag)
    n2 = np.zeros_like(mag)
    for mask, (dy1, dx1), (dy2, dx2) in (
        (sector0, (0, 1), (0, -1)),
        (sector45, (-1, 1), (1, -1)),
        (sector90, (-1, 0), (1, 0)),
        (sector135, (-1, -1), (1, 1)),
    ):
        n1 = np.where(mask, shifted(*(dy1, dx1)), n1)
        n2 = np.where(mask, shifted(*(dy2, dx2)), n2)

    nms = np.where((mag >= n1) & (mag >= n2), mag, 0.0)

    strong = nms >= high
    weak = nms >= low
    edges = strong.copy()
    while True:
        grown = weak & _dilate8(edges)
        new = edges | grown
        if np.array_equal(new, edges):
            return edges
        edges = new


def _dilate8(mask: np.ndarray) -> np.ndarray:
    h, w = mask.shape
    padded = np.zeros((h + 2, w + 2), dtype=bool)
    padded[1:-1, 1:-1] = mask
    out = np.zeros_like(mask)
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            out |= padded[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w]
    return out


def freq_ratio(crop: np.ndarray, radius_fraction: float = 0.25) -> float:
    """Share of DFT magnitude further than radius_fraction*min(H,W) from DC."""
    crop = _require_nonempty(crop)
    spectrum = np.abs(np.fft.fftshift(np.fft.fft2(crop)))
    total = spectrum.sum()
    if total == 0.0:
        return 0.0
    h, w = crop.shape
    cy, cx = h // 2, w // 2
    yy, xx = np.ogrid[:h, :w]
    distance = np.sqrt((yy - cy) ** 2 + (xx - cx) ** 2)
    high = distance > radius_fraction * min(h, w)
    return float(spectrum[high].sum() / total)


def _require_nonempty(crop: np.ndarray) -> np.ndarray:
    crop = np.asarray(crop, dtype=np.float64)
    if crop.size == 0:
        raise EmptyRegion("empty crop")
    return crop


# --- pair deltas -----------------------------------------------------------


def delta_blur(a: float, b: float) -> float:
    return abs(a - b)


def delta_color(stats_t: tuple[float, float], stats_t1: tuple[float, float]) -> float:
    return abs(stats_t[0] - stats_t1[0]) + abs(stats_t[1] - stats_t1[1])


def delta_texture(a: float, b: float) -> float:
    return abs(a - b)


def boundary_artifact(metrics_t: FrameMetrics, metrics_t1: FrameMetrics) -> float:
    """Sum of gradient, edge-density, and frequency-ratio shifts (raw scales)."""
    return (
        abs(metrics_t.gradient_mean - metrics_t1.gradient_mean)
        + abs(metrics_t.edge_density - metrics_t1.edge_density)
        + abs(metrics_t.freq_ratio - metrics_t1.freq_ratio)
    )


# --- clip-level aggregation ---------------------------------------------


def frame_metrics(rgb_crop: np.ndarray, frame_index: int) -> FrameMetrics:
    """All per-frame measurements for one refined face crop."""
    gray = to_grayscale(rgb_crop)
    mu, sigma = lab_stats(rgb_crop)
    return FrameMetrics(
        frame_index=frame_index,
        blur_sigma=laplacian_blur(gray),
        lab_mu=mu,
        lab_sigma=sigma,
        glcm_contrast=glcm_contrast(gray),
        gradient_mean=gradient_mean(gray),
        edge_density=edge_density(gray),
        freq_ratio=freq_ratio(gray),
    )


def compute_integrity(
    seq: FrameSequence,
    clips: ClipSet,
    track: FaceTrack,
    max_workers: int = 1,
) -> IntegrityMetrics:
    """Per-frame metrics plus consecutive in-clip pair deltas.

    Pairs never span clip boundaries, and a pair is skipped when either
    side is a tracking gap. Work may fan out over ``max_workers`` threads;
    results are joined in frame order so the output is identical for any
    worker count.
    """
    entries = {e.frame_index: e for e in track.entries}
    tracked = sorted(
        {idx for clip in clips.clips for idx in clip if idx in entries}
    )
    if not tracked:
        raise NoFaceDetected("no clip frame carries a tracked face")

    def measure(frame_index: int) -> FrameMetrics:
        box = entries[frame_index].refined_box
        crop = seq.frames[frame_index][box.y0 : box.y1, box.x0 : box.x1]
        return frame_metrics(crop, frame_index)

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            per_frame = list(pool.map(measure, tracked))
    else:
        per_frame = [measure(i) for i in tracked]
    by_index = {m.frame_index: m for m in per_frame}

    per_pair: list[PairDeltas] = []
    for clip in clips.clips:
        for a, b in zip(clip, clip[1:]):
            if a not in by_index or b not in by_index:
                continue
            ma, mb = by_index[a], by_index[b]
            per_pair.append(
                PairDeltas(
                    pair=(a, b),
                    delta_blur=delta_blur(ma.blur_sigma, mb.blur_sigma),
                    delta_color=delta_color((ma.lab_mu, ma.lab_sigma), (mb.lab_mu, mb.lab_sigma)),
                    delta_texture=delta_texture(ma.glcm_contrast, mb.glcm_contrast),
                    delta_boundary=boundary_artifact(ma, mb),
                )
            )

    summary = {}
    for name in DELTA_METRICS:
        values = [getattr(p, name) for p in per_pair]
        summary[name] = {
            "mean": float(np.mean(values)) if values else 0.0,
            "max": float(np.max(values)) if values else 0.0,
        }
    return IntegrityMetrics(per_frame=per_frame, per_pair=per_pair, summary=summary)
