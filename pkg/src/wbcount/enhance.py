"""Edge sharpening of the acquired color image, one channel at a time.

The sharpening step convolves each channel with a discrete Laplacian and
subtracts the response from the original channel (``out = f - lap(f)``
for a center-negative kernel), which boosts edges while leaving flat
areas untouched. Borders are handled by edge replication so the image
rim does not pick up dark halos that would later seed false contours.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .raster import GrayImage, RgbImage


@dataclass(frozen=True, eq=False)
class LaplacianKernel:
    """A 3x3 kernel whose coefficients sum to zero (annihilates constants)."""

    taps: np.ndarray

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=np.float64)
        if taps.shape != (3, 3):
            raise ValueError("kernel must be 3x3")
        if abs(taps.sum()) > 1e-9:
            raise ValueError("kernel coefficients must sum to zero")
        taps = np.ascontiguousarray(taps)
        taps.flags.writeable = False
        object.__setattr__(self, "taps", taps)


FOUR_NEIGHBOR_KERNEL = LaplacianKernel(np.array([[0, 1, 0], [1, -4, 1], [0, 1, 0]]))
EIGHT_NEIGHBOR_KERNEL = LaplacianKernel(np.array([[1, 1, 1], [1, -8, 1], [1, 1, 1]]))


def kernel_by_name(name: str) -> LaplacianKernel:
    if name == "four":
        return FOUR_NEIGHBOR_KERNEL
    if name == "eight":
        return EIGHT_NEIGHBOR_KERNEL
    raise ValueError(f"unknown kernel {name!r} (expected 'four' or 'eight')")


def _convolve3x3(v: np.ndarray, taps: np.ndarray) -> np.ndarray:
    padded = np.pad(v, 1, mode="edge")
    h, w = v.shape
    out = np.zeros_like(v)
    for dy in range(3):
        for dx in range(3):
            t = taps[dy, dx]
            if t != 0.0:
                out += t * padded[dy : dy + h, dx : dx + w]
    return out


def laplacian(img: GrayImage, kernel: LaplacianKernel = FOUR_NEIGHBOR_KERNEL) -> GrayImage:
    """Kernel-weighted neighborhood sum at every pixel, unclamped output."""
    return GrayImage(_convolve3x3(img.v, kernel.taps))


def sharpen(img: RgbImage, kernel: LaplacianKernel = FOUR_NEIGHBOR_KERNEL) -> RgbImage:
    """Sharpen each channel independently; output clamped back to [0, 255]."""
    planes = []
    for plane in (img.r, img.g, img.b):
        lap = _convolve3x3(plane, kernel.taps)
        planes.append(np.clip(plane - lap, 0.0, 255.0))
    return RgbImage(*planes)
