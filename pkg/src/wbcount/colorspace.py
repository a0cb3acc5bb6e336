"""RGB to HSI conversion and the fuzzy color membership machinery.

Hue is the pure-color angle in degrees, saturation the dilution of the
pure color by white light in [0, 1], and intensity the channel mean in
[0, 255]. Color decisions downstream are made by interpolating fuzzy
membership curves over hue and taking the best-scoring color label.

Conventions for degenerate pixels:

* achromatic pixels (``r == g == b``, including all-black) get hue 0 and
  saturation 0 -- hue is numerically meaningless there, so a fixed value
  keeps every consumer deterministic;
* the arccos argument is clamped to [-1, 1] so floating rounding can
  never produce a NaN hue.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .raster import RgbImage


@dataclass(frozen=True)
class HsiPixel:
    h: float  # degrees in [0, 360)
    s: float  # [0, 1]
    i: float  # [0, 255]


@dataclass(frozen=True, eq=False)
class HsiImage:
    """Per-pixel hue/saturation/intensity planes sharing the source shape."""

    h: np.ndarray
    s: np.ndarray
    i: np.ndarray

    def __post_init__(self):
        for name in ("h", "s", "i"):
            p = np.ascontiguousarray(np.asarray(getattr(self, name), dtype=np.float64))
            p.flags.writeable = False
            object.__setattr__(self, name, p)
        if not (self.h.shape == self.s.shape == self.i.shape):
            raise ValueError("HSI planes must share one shape")

    @property
    def width(self) -> int:
        return self.h.shape[1]

    @property
    def height(self) -> int:
        return self.h.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.h.shape


def hsi_planes(r: np.ndarray, g: np.ndarray, b: np.ndarray):
    """Vectorized HSI conversion over float arrays of matching shape."""
    r = np.asarray(r, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)

    total = r + g + b
    i = total / 3.0
    minc = np.minimum(np.minimum(r, g), b)
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(total > 0.0, 1.0 - 3.0 * minc / np.where(total > 0.0, total, 1.0), 0.0)

    num = 0.5 * ((r - g) + (r - b))
    den = np.sqrt((r - g) ** 2 + (r - b) * (g - b))
    # den == 0 happens only for achromatic pixels, which are overridden below.
    ratio = np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0), 0.0)
    theta = np.degrees(np.arccos(np.clip(ratio, -1.0, 1.0)))
    h = np.where(b <= g, theta, 360.0 - theta)
    h = np.where(s <= 0.0, 0.0, h)
    s = np.clip(s, 0.0, 1.0)
    return h, s, i


def rgb_to_hsi(r: float, g: float, b: float) -> HsiPixel:
    """Convert one pixel; channel values must lie in [0, 255]."""
    for name, v in (("r", r), ("g", g), ("b", b)):
        if not 0.0 <= v <= 255.0:
            raise ValueError(f"channel {name}={v} outside [0, 255]")
    h, s, i = hsi_planes(np.float64(r), np.float64(g), np.float64(b))
    return HsiPixel(float(h), float(s), float(i))


def convert_image(img: RgbImage) -> HsiImage:
    h, s, i = hsi_planes(img.r, img.g, img.b)
    return HsiImage(h, s, i)


@dataclass(frozen=True, eq=False)
class MembershipDataSet:
    """Training pairs (x_i, y_i) for one color's membership curve.

    ``x`` values must be distinct (they appear in interpolation
    denominators) and ``y`` values are membership degrees in [0, 1].
    Node positions may be negative so a set can straddle the 0/360 hue
    seam; see :func:`classify_color`.
    """

    name: str
    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        pts = tuple((float(x), float(y)) for x, y in self.points)
        if len(pts) < 2:
            raise ValueError("a membership set needs at least two points")
        xs = [x for x, _ in pts]
        if len(set(xs)) != len(xs):
            raise ValueError("membership x values must be distinct")
        if any(not 0.0 <= y <= 1.0 for _, y in pts):
            raise ValueError("membership y values must lie in [0, 1]")
        object.__setattr__(self, "points", tuple(sorted(pts)))

    @property
    def x_min(self) -> float:
        return self.points[0][0]

    @property
    def x_max(self) -> float:
        return self.points[-1][0]


def membership(ds: MembershipDataSet, x: float) -> float:
    """Response of the membership curve at ``x``.

    Zero outside the training support; inside, the polynomial through all
    training points, clamped to [0, 1] because a high-order interpolant
    can overshoot between nodes.
    """
    x = float(x)
    if x < ds.x_min or x > ds.x_max:
        return 0.0
    total = 0.0
    pts = ds.points
    for i, (xi, yi) in enumerate(pts):
        term = yi
        for j, (xj, _) in enumerate(pts):
            if j != i:
                term *= (x - xj) / (xi - xj)
        total += term
    return min(1.0, max(0.0, total))


def _wrap_for(ds: MembershipDataSet, hue: float) -> float:
    # Sets with negative nodes straddle the 0/360 seam; fold high hues down.
    if ds.x_min < 0.0 and hue >= 360.0 + ds.x_min:
        return hue - 360.0
    return hue


def classify_color(hue: float, sets: list[MembershipDataSet]) -> str:
    """Label of the best-scoring membership set, or ``"unknown"`` if all are zero.

    Ties break toward the earliest set in the list, so the result is
    deterministic for any input order.
    """
    if not sets:
        raise ValueError("at least one membership set is required")
    best_name = "unknown"
    best_score = 0.0
    for ds in sets:
        score = membership(ds, _wrap_for(ds, hue))
        if score > best_score:
            best_name = ds.name
            best_score = score
    return best_name


# Bundled defaults: hue-wheel anchors for the two stain colors the
# classifier distinguishes. The red set is expressed on an unwrapped axis
# (negative nodes reach across 0 degrees).
DEFAULT_RED_SET = MembershipDataSet(
    "red", ((-30.0, 0.0), (-10.0, 0.8), (0.0, 1.0), (10.0, 1.0), (30.0, 0.0))
)
DEFAULT_BLUE_SET = MembershipDataSet(
    "blue", ((180.0, 0.0), (220.0, 0.9), (240.0, 1.0), (280.0, 0.0))
)


def load_membership_set(path: str | Path, name: str) -> MembershipDataSet:
    """Read training pairs from a plain-text table: one ``x y`` pair per line,
    blank lines and ``#`` comments ignored."""
    pts = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected 'x y', got {raw!r}")
        pts.append((float(parts[0]), float(parts[1])))
    return MembershipDataSet(name, tuple(pts))
