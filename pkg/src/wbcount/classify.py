"""Per-nucleus cell type decision from shape and cytoplasm color.

The decision tree mirrors how a technician reads a stained smear:

* a nucleus whose center of mass falls outside its own pixels is
  multi-lobed, so the cell is a granulocyte and the cytoplasm color picks
  the subtype (white -> neutrophil, red -> eosinophil, blue -> basophil);
* otherwise a clearly elongated nucleus is a monocyte and a round one a
  lymphocyte.

White cytoplasm is detected as LOW average saturation: a white pixel has
equal channels and therefore zero saturation under the conversion used
here. A config flag allows the opposite reading (white as very high
saturation) for comparison runs.

Nucleus masks arriving from thresholding may carry speckle holes, which
would make the center-of-mass test flip on a stray interior gap, so the
mask is hole-filled before the shape test. Genuine lobed shapes are open
to the outside and survive filling unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .colorspace import DEFAULT_BLUE_SET, DEFAULT_RED_SET, MembershipDataSet, classify_color, hsi_planes
from .raster import BinaryMask, Region, RgbImage, mask_stats
from .regions import StructuringElement, fill_holes, ring_mask


class CellClass(Enum):
    NEUTROPHIL = "neutrophil"
    LYMPHOCYTE = "lymphocyte"
    MONOCYTE = "monocyte"
    EOSINOPHIL = "eosinophil"
    BASOPHIL = "basophil"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class ShapeFeatures:
    elongation: float  # bbox max side / min side, >= 1
    centroid_inside: bool  # rounded centroid pixel belongs to the mask


@dataclass(frozen=True)
class ClassifyParams:
    elongation_cut: float = 1.25
    sat_white_max: float = 0.2
    neutrophil_high_saturation: bool = False
    red_set: MembershipDataSet = field(default=DEFAULT_RED_SET)
    blue_set: MembershipDataSet = field(default=DEFAULT_BLUE_SET)
    se: StructuringElement = field(default=StructuringElement())

    def __post_init__(self):
        if not self.elongation_cut > 1.0:
            raise ValueError("elongation_cut must exceed 1")
        if not 0.0 < self.sat_white_max < 1.0:
            raise ValueError("sat_white_max must lie in (0, 1)")


def shape_features(region: Region, mask: BinaryMask) -> ShapeFeatures:
    """Bounding-box elongation plus the rounded-centroid membership test."""
    if region.area < 1:
        raise ValueError("region is empty")
    x0, y0, x1, y1 = region.bbox
    w = x1 - x0 + 1
    h = y1 - y0 + 1
    elongation = max(w, h) / min(w, h)
    cx = int(np.rint(region.centroid[0]))
    cy = int(np.rint(region.centroid[1]))
    inside = 0 <= cy < mask.height and 0 <= cx < mask.width and bool(mask.bit[cy, cx])
    return ShapeFeatures(elongation=float(elongation), centroid_inside=inside)


def cytoplasm_mask(nucleus: BinaryMask, se: StructuringElement = StructuringElement()) -> BinaryMask:
    """Band just outside the nucleus where the cytoplasm color is sampled."""
    return ring_mask(nucleus, se)


def cytoplasm_stats(img: RgbImage, cmask: BinaryMask) -> tuple[float, float]:
    """Average hue and saturation over the masked cytoplasm pixels.

    Saturation is an arithmetic mean. Hue is an angle, so it is averaged
    circularly (a half-and-half mix of 350 and 10 degrees averages to 0,
    not 180), weighted by saturation because near-gray pixels carry no
    usable hue.
    """
    sel = cmask.bit
    if not sel.any():
        raise ValueError("cytoplasm mask is empty")
    h, s, _ = hsi_planes(img.r[sel], img.g[sel], img.b[sel])
    ave_saturation = float(s.mean())
    rad = np.radians(h)
    vx = float((s * np.cos(rad)).sum())
    vy = float((s * np.sin(rad)).sum())
    if vx == 0.0 and vy == 0.0:
        ave_hue = 0.0
    else:
        ave_hue = float(np.degrees(np.arctan2(vy, vx))) % 360.0
    return ave_hue, ave_saturation


def classify_granulocyte(stats: tuple[float, float], p: ClassifyParams = ClassifyParams()) -> CellClass:
    """Subtype of a multi-lobed cell from its cytoplasm color."""
    ave_hue, ave_saturation = stats
    if p.neutrophil_high_saturation:
        white = ave_saturation >= 1.0 - p.sat_white_max
    else:
        white = ave_saturation < p.sat_white_max
    if white:
        return CellClass.NEUTROPHIL
    color = classify_color(ave_hue, [p.red_set, p.blue_set])
    if color == p.red_set.name:
        return CellClass.EOSINOPHIL
    if color == p.blue_set.name:
        return CellClass.BASOPHIL
    return CellClass.UNKNOWN


_MIN_AREA_FOR_SHAPE = 4


def classify_cell(
    nucleus: BinaryMask,
    region: Region,
    enhanced: RgbImage,
    p: ClassifyParams = ClassifyParams(),
) -> CellClass:
    """Full per-cell decision; total and deterministic for every valid input."""
    if region.area < _MIN_AREA_FOR_SHAPE:
        return CellClass.UNKNOWN
    filled = fill_holes(nucleus)
    fregion = mask_stats(filled, label=region.label)
    sf = shape_features(fregion, filled)
    if not sf.centroid_inside:
        cmask = cytoplasm_mask(filled, p.se)
        if cmask.count() == 0:
            return CellClass.UNKNOWN
        return classify_granulocyte(cytoplasm_stats(enhanced, cmask), p)
    if sf.elongation >= p.elongation_cut:
        return CellClass.MONOCYTE
    return CellClass.LYMPHOCYTE
