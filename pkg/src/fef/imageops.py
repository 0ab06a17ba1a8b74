"""Low-level image primitives used by the frame and metric layers.

Everything here is plain numpy so results are bit-reproducible across
platforms and thread counts. Kernels and conventions are pinned:

* grayscale: floor(0.299 R + 0.587 G + 0.114 B) per pixel
* borders: replicate (edge padding) for all convolutions
* resize: bilinear with half-pixel centers (corner alignment off)
"""

from __future__ import annotations

import numpy as np

LAPLACIAN_KERNEL = np.array([[0, 1, 0], [1, -4, 1], [0, 1, 0]], dtype=np.float64)
SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
SOBEL_Y = np.array([[-1, -2, -1], [0, 0, 0], [1, 2, 1]], dtype=np.float64)

# sRGB -> XYZ (D65 reference white), IEC 61966-2-1
_SRGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7152751, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ],
    dtype=np.float64,
)
_D65_WHITE = np.array([0.95047, 1.0, 1.08883], dtype=np.float64)


def to_grayscale(rgb: np.ndarray) -> np.ndarray:
    """Convert an HxWx3 8-bit RGB image to floored luma, float64 HxW."""
    rgb = np.asarray(rgb, dtype=np.float64)
    luma = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
    return np.floor(luma)


def convolve2d_replicate(image: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Correlate a 2D image with a small odd-sized kernel, edges replicated."""
    image = np.asarray(image, dtype=np.float64)
    kh, kw = kernel.shape
    ph, pw = kh // 2, kw // 2
    padded = np.pad(image, ((ph, ph), (pw, pw)), mode="edge")
    out = np.zeros_like(image)
    for dy in range(kh):
        for dx in range(kw):
            out += kernel[dy, dx] * padded[dy : dy + image.shape[0], dx : dx + image.shape[1]]
    return out


def sobel_gradients(gray: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Horizontal and vertical Sobel responses with replicated borders."""
    return convolve2d_replicate(gray, SOBEL_X), convolve2d_replicate(gray, SOBEL_Y)


def gaussian_kernel(size: int = 5, sigma: float = 1.0) -> np.ndarray:
    """Normalized 2D Gaussian sampled at integer offsets from the center."""
    half = size // 2
    ax = np.arange(-half, half + 1, dtype=np.float64)
    g1 = np.exp(-(ax**2) / (2.0 * sigma**2))
    kernel = np.outer(g1, g1)
    return kernel / kernel.sum()


def resize_bilinear(image: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Resize HxW[,C] to out_h x out_w with half-pixel-center bilinear sampling.

    Source coordinate for destination pixel i is (i + 0.5) * scale - 0.5,
    clamped to the valid range; output dtype matches the input via rounding
    for integer inputs.
    """
    image = np.asarray(image)
    if out_h <= 0 or out_w <= 0:
        raise ValueError("resize target must be positive")
    in_h, in_w = image.shape[:2]
    src = image.astype(np.float64)

    ys = (np.arange(out_h, dtype=np.float64) + 0.5) * (in_h / out_h) - 0.5
    xs = (np.arange(out_w, dtype=np.float64) + 0.5) * (in_w / out_w) - 0.5
    ys = np.clip(ys, 0.0, in_h - 1.0)
    xs = np.clip(xs, 0.0, in_w - 1.0)

    y0 = np.floor(ys).astype(np.int64)
    x0 = np.floor(xs).astype(np.int64)
    y1 = np.minimum(y0 + 1, in_h - 1)
    x1 = np.minimum(x0 + 1, in_w - 1)
    wy = (ys - y0)[:, None]
    wx = (xs - x0)[None, :]
    if image.ndim == 3:
        wy = wy[..., None]
        wx = wx[..., None]

    top = src[y0][:, x0] * (1 - wx) + src[y0][:, x1] * wx
    bottom = src[y1][:, x0] * (1 - wx) + src[y1][:, x1] * wx
    out = top * (1 - wy) + bottom * wy

    if np.issubdtype(image.dtype, np.integer):
        info = np.iinfo(image.dtype)
        return np.clip(np.rint(out), info.min, info.max).astype(image.dtype)
    return out.astype(image.dtype)


def srgb_to_lab_l(rgb: np.ndarray) -> np.ndarray:
    """CIELAB L* channel of an 8-bit sRGB image (D65 white), float64 HxW."""
    c = np.asarray(rgb, dtype=np.float64) / 255.0
    linear = np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)
    y = linear @ _SRGB_TO_XYZ[1]  # only Y is needed for L*
    t = y / _D65_WHITE[1]
    delta = 6.0 / 29.0
    f = np.where(t > delta**3, np.cbrt(t), t / (3.0 * delta**2) + 4.0 / 29.0)
    return 116.0 * f - 16.0
