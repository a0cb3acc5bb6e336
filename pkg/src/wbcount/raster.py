"""Core image containers and pixel-level primitives shared by every stage.

Conventions used throughout the package:

* coordinates are ``(x, y)`` with ``x`` the column and ``y`` the row,
  origin at the top-left corner;
* pixel planes are stored as 2-D numpy arrays indexed ``[y, x]``;
* channel planes are kept as real-valued float64 internally and only
  quantized back to 8-bit integers at I/O boundaries, so that filtering
  stages may produce out-of-range values before an explicit clamp.

All containers are immutable after construction (their arrays are marked
non-writeable), which makes every operation in this package a pure
function that is safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError


class ImageReadError(Exception):
    """Raised when an input image file cannot be decoded."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class RgbImage:
    """An RGB raster with one float64 plane per channel, values in [0, 255]."""

    r: np.ndarray
    g: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        planes = []
        for name in ("r", "g", "b"):
            p = np.asarray(getattr(self, name), dtype=np.float64)
            if p.ndim != 2 or p.size == 0:
                raise ValueError(f"channel {name!r} must be a non-empty 2-D array")
            planes.append(p)
        if not (planes[0].shape == planes[1].shape == planes[2].shape):
            raise ValueError("channel planes must share one shape")
        stacked = np.stack(planes)
        if not np.all(np.isfinite(stacked)):
            raise ValueError("channel values must be finite")
        if stacked.min() < 0.0 or stacked.max() > 255.0:
            raise ValueError("channel values must lie in [0, 255]")
        for name, p in zip(("r", "g", "b"), planes):
            object.__setattr__(self, name, _frozen(p))

    @property
    def width(self) -> int:
        return self.r.shape[1]

    @property
    def height(self) -> int:
        return self.r.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.r.shape

    @classmethod
    def from_array(cls, rgb: np.ndarray) -> "RgbImage":
        """Build from an ``(h, w, 3)`` array of 8-bit (or float) channel values."""
        rgb = np.asarray(rgb)
        if rgb.ndim != 3 or rgb.shape[2] != 3:
            raise ValueError("expected an (h, w, 3) array")
        rgb = rgb.astype(np.float64)
        return cls(rgb[:, :, 0], rgb[:, :, 1], rgb[:, :, 2])

    def to_array(self) -> np.ndarray:
        """Quantize to an ``(h, w, 3)`` uint8 array (I/O boundary)."""
        out = np.stack([self.r, self.g, self.b], axis=-1)
        return np.clip(np.rint(out), 0, 255).astype(np.uint8)


@dataclass(frozen=True, eq=False)
class GrayImage:
    """A single real-valued plane, unbounded during filtering."""

    v: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.v, dtype=np.float64)
        if v.ndim != 2 or v.size == 0:
            raise ValueError("plane must be a non-empty 2-D array")
        if not np.all(np.isfinite(v)):
            raise ValueError("plane values must be finite")
        object.__setattr__(self, "v", _frozen(v))

    @property
    def width(self) -> int:
        return self.v.shape[1]

    @property
    def height(self) -> int:
        return self.v.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.v.shape


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """A boolean foreground mask with the dimensions of its source image."""

    bit: np.ndarray

    def __post_init__(self):
        bit = np.asarray(self.bit)
        if bit.dtype != np.bool_:
            bit = bit.astype(bool)
        if bit.ndim != 2 or bit.size == 0:
            raise ValueError("mask must be a non-empty 2-D boolean array")
        object.__setattr__(self, "bit", _frozen(bit))

    @property
    def width(self) -> int:
        return self.bit.shape[1]

    @property
    def height(self) -> int:
        return self.bit.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.bit.shape

    def count(self) -> int:
        return int(self.bit.sum())

    @classmethod
    def full(cls, shape: tuple[int, int], value: bool = False) -> "BinaryMask":
        return cls(np.full(shape, value, dtype=bool))


@dataclass(frozen=True, eq=False)
class LabelMatrix:
    """Connected-component labels: 0 is background, components are 1..count."""

    label: np.ndarray
    count: int

    def __post_init__(self):
        lab = np.asarray(self.label)
        if not np.issubdtype(lab.dtype, np.integer):
            raise ValueError("labels must be integers")
        if lab.ndim != 2 or lab.size == 0:
            raise ValueError("label matrix must be a non-empty 2-D array")
        lab = lab.astype(np.int32)
        if lab.min() < 0:
            raise ValueError("labels must be non-negative")
        present = np.unique(lab)
        nonzero = present[present > 0]
        if nonzero.size != self.count or (
            nonzero.size and (nonzero[0] != 1 or nonzero[-1] != self.count)
        ):
            raise ValueError("labels must be exactly the contiguous range 1..count")
        object.__setattr__(self, "label", _frozen(lab))

    @property
    def width(self) -> int:
        return self.label.shape[1]

    @property
    def height(self) -> int:
        return self.label.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.label.shape


@dataclass(frozen=True)
class Region:
    """One labeled contour: its pixel set, tight bbox, centroid and area."""

    label: int
    pixels: frozenset[tuple[int, int]]
    bbox: tuple[int, int, int, int]  # (min_x, min_y, max_x, max_y)
    centroid: tuple[float, float]
    area: int

    def to_mask(self, shape: tuple[int, int]) -> BinaryMask:
        """Paint the region onto a blank canvas of the given (h, w) shape."""
        bit = np.zeros(shape, dtype=bool)
        for x, y in self.pixels:
            bit[y, x] = True
        return BinaryMask(bit)


def _require_same_shape(a, b) -> None:
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")


def pixelwise_multiply(img: RgbImage, mask: BinaryMask) -> RgbImage:
    """Keep ``img`` where the mask is true, zero out everything else."""
    _require_same_shape(img, mask)
    m = mask.bit
    return RgbImage(np.where(m, img.r, 0.0), np.where(m, img.g, 0.0), np.where(m, img.b, 0.0))


def subtract_mask(a: BinaryMask, b: BinaryMask) -> BinaryMask:
    """Set difference: true exactly where ``a`` is true and ``b`` is false."""
    _require_same_shape(a, b)
    return BinaryMask(a.bit & ~b.bit)


def region_stats(labels: LabelMatrix, label: int) -> Region:
    """Exact pixel set, tight bbox, mean-coordinate centroid and area of one label."""
    if not 1 <= label <= labels.count:
        raise ValueError(f"label {label} out of range 1..{labels.count}")
    ys, xs = np.nonzero(labels.label == label)
    pixels = frozenset(zip(xs.tolist(), ys.tolist()))
    bbox = (int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max()))
    centroid = (float(xs.mean()), float(ys.mean()))
    return Region(label=label, pixels=pixels, bbox=bbox, centroid=centroid, area=int(xs.size))


def mask_stats(mask: BinaryMask, label: int = 1) -> Region:
    """Region statistics computed directly from a non-empty mask."""
    ys, xs = np.nonzero(mask.bit)
    if xs.size == 0:
        raise ValueError("mask is empty")
    pixels = frozenset(zip(xs.tolist(), ys.tolist()))
    bbox = (int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max()))
    centroid = (float(xs.mean()), float(ys.mean()))
    return Region(label=label, pixels=pixels, bbox=bbox, centroid=centroid, area=int(xs.size))


_SUPPORTED_FORMATS = {"PNG", "BMP"}


def read_image(path: str | Path) -> RgbImage:
    """Decode an 8-bit RGB PNG or BMP file.

    Decode failures raise :class:`ImageReadError` with file context instead
    of crashing, so batch callers can record the error and continue.
    """
    path = Path(path)
    try:
        with Image.open(path) as im:
            fmt = im.format
            if fmt not in _SUPPORTED_FORMATS:
                raise ImageReadError(f"{path}: unsupported format {fmt!r} (PNG or BMP expected)")
            rgb = np.asarray(im.convert("RGB"))
    except ImageReadError:
        raise
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise ImageReadError(f"{path}: cannot decode image ({exc})") from exc
    return RgbImage.from_array(rgb)


def write_png(img: RgbImage, path: str | Path) -> None:
    """Quantize and write the image as an 8-bit RGB PNG."""
    Image.fromarray(img.to_array(), mode="RGB").save(Path(path), format="PNG")
