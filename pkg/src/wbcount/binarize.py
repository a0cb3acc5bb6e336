"""Hue cutoff filtering and the iterative global threshold.

The stained nuclei are the high-hue (blue) content of the field, while
the reddish background sits at low hue, so foreground extraction is a
value cutoff on the hue plane rather than a spatial filter. Pixels that
survive the cutoff keep their hue, min-max rescaled to span [0, 255];
everything else becomes zero. The resulting gray image is binarized with
the classic two-means iteration: split at T, average each side, move T to
the midpoint of the two averages, repeat to a fixed point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .colorspace import HsiImage
from .raster import BinaryMask, GrayImage


@dataclass(frozen=True)
class ThresholdParams:
    """Convergence tolerance (gray levels) and iteration cap."""

    t0: float = 0.5
    max_iters: int = 100

    def __post_init__(self):
        if not self.t0 > 0:
            raise ValueError("t0 must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


def hue_highpass(hsi: HsiImage, cutoff: float, s_min: float = 0.15) -> GrayImage:
    """Keep pixels whose hue is at least ``cutoff`` and saturation at least
    ``s_min``; rescale the retained hues so they span [0, 255].

    The saturation gate exists because hue carries no information for
    near-gray pixels; without it, noise with an accidental high hue would
    pollute the contours. Retained values keep the order of the
    underlying hues (the rescale is affine); if all retained hues are
    equal they map to 255.
    """
    if not 0.0 < cutoff < 360.0:
        raise ValueError("cutoff must lie in (0, 360)")
    keep = (hsi.h >= cutoff) & (hsi.s >= s_min)
    out = np.zeros(hsi.shape, dtype=np.float64)
    if keep.any():
        vals = hsi.h[keep]
        lo = vals.min()
        hi = vals.max()
        if hi > lo:
            out[keep] = (hsi.h[keep] - lo) * (255.0 / (hi - lo))
        else:
            out[keep] = 255.0
    return GrayImage(out)


def isodata_threshold(img: GrayImage, params: ThresholdParams = ThresholdParams()) -> float:
    """Fixed point of ``T <- (mean(>T) + mean(<=T)) / 2`` starting from the
    global mean.

    A constant image returns that constant (the caller then sees an empty
    foreground, since binarization keeps strictly-greater pixels only).
    If one side of the split empties out during iteration, its mean is
    frozen at the current T so the other side still pulls.
    """
    v = img.v.ravel()
    t = float(v.mean())
    for _ in range(params.max_iters):
        above = v > t
        mu1 = float(v[above].mean()) if above.any() else t
        mu2 = float(v[~above].mean()) if not above.all() else t
        t_next = 0.5 * (mu1 + mu2)
        if abs(t_next - t) < params.t0:
            return t_next
        t = t_next
    return t


def to_binary(img: GrayImage, t: float) -> BinaryMask:
    """Mask of pixels strictly greater than ``t``."""
    return BinaryMask(img.v > t)
