"""Connected components, contour validation, morphology and overlap splitting.

Labeling is a run-based two-pass scan with union-find: row runs are
merged against the previous row's runs, then components are renumbered in
raster-scan first-encounter order so labels are deterministic.

Overlapped nuclei are split by re-thresholding: the band of pixels just
outside a contour estimates the local background level, a scratch image
is built holding that level everywhere except the contour's own pixels,
and a fresh two-means threshold on the scratch image cuts the dim valley
between touching nuclei.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .binarize import ThresholdParams, isodata_threshold, to_binary
from .raster import BinaryMask, GrayImage, LabelMatrix, Region, region_stats, subtract_mask


@dataclass(frozen=True)
class StructuringElement:
    """Neighborhood shape for dilation: a square or a disc of given radius."""

    shape: str = "square"
    radius: int = 1

    def __post_init__(self):
        if self.shape not in ("square", "disc"):
            raise ValueError("shape must be 'square' or 'disc'")
        if self.radius < 1:
            raise ValueError("radius must be at least 1")

    def offsets(self) -> list[tuple[int, int]]:
        r = self.radius
        out = []
        for dy in range(-r, r + 1):
            for dx in range(-r, r + 1):
                if self.shape == "square" or dx * dx + dy * dy <= r * r:
                    out.append((dx, dy))
        return out


@dataclass(frozen=True)
class ValidityParams:
    """Brightness factor and area floor for the valid-contour rule."""

    factor: float = 0.85
    min_area: int = 30

    def __post_init__(self):
        if not 0.0 < self.factor <= 1.0:
            raise ValueError("factor must lie in (0, 1]")
        if self.min_area < 1:
            raise ValueError("min_area must be at least 1")


class _DisjointSet:
    def __init__(self):
        self.parent: list[int] = []

    def make(self) -> int:
        self.parent.append(len(self.parent))
        return len(self.parent) - 1

    def find(self, i: int) -> int:
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _row_runs(row: np.ndarray) -> list[tuple[int, int]]:
    # Half-open [start, end) runs of True in one row.
    idx = np.flatnonzero(np.diff(np.concatenate(([0], row.view(np.int8), [0]))))
    return list(zip(idx[0::2].tolist(), idx[1::2].tolist()))


def label(mask: BinaryMask, connectivity: int = 8) -> LabelMatrix:
    """Label connected foreground components.

    Labels are assigned in raster-scan first-encounter order, so equal
    masks always produce identical matrices.
    """
    if connectivity not in (4, 8):
        raise ValueError("connectivity must be 4 or 8")
    reach = 1 if connectivity == 8 else 0
    h, w = mask.shape
    dsu = _DisjointSet()
    out = np.zeros((h, w), dtype=np.int32)
    prev: list[tuple[int, int, int]] = []  # (start, end, set id)
    all_runs: list[tuple[int, int, int, int]] = []  # (y, start, end, set id)
    for y in range(h):
        runs = _row_runs(mask.bit[y])
        cur: list[tuple[int, int, int]] = []
        pi = 0
        for s, e in runs:
            sid = -1
            lo, hi = s - reach, e + reach
            while pi < len(prev) and prev[pi][1] <= lo:
                pi += 1
            pj = pi
            while pj < len(prev) and prev[pj][0] < hi:
                if sid == -1:
                    sid = prev[pj][2]
                else:
                    dsu.union(sid, prev[pj][2])
                pj += 1
            if sid == -1:
                sid = dsu.make()
            cur.append((s, e, sid))
            all_runs.append((y, s, e, sid))
        prev = cur
    # Renumber roots by first appearance in scan order.
    final: dict[int, int] = {}
    for y, s, e, sid in all_runs:
        root = dsu.find(sid)
        lab = final.setdefault(root, len(final) + 1)
        out[y, s:e] = lab
    return LabelMatrix(out, len(final))


def valid_contours(labels: LabelMatrix, highpass: GrayImage, p: ValidityParams = ValidityParams()) -> list[int]:
    """Labels whose peak brightness is close enough to the field's peak.

    A contour is valid when the maximum filtered value inside it strictly
    exceeds ``factor`` times the maximum over all labeled pixels and its
    area is at least ``min_area``. With a single contour the local peak is
    the global peak, so it is always valid (given enough area).
    """
    if labels.shape != highpass.shape:
        raise ValueError("label matrix and filtered image must share dimensions")
    if labels.count == 0:
        return []
    local_max: dict[int, float] = {}
    areas: dict[int, int] = {}
    for index in range(1, labels.count + 1):
        reg = region_stats(labels, index)
        xs = np.fromiter((x for x, _ in reg.pixels), dtype=np.intp, count=reg.area)
        ys = np.fromiter((y for _, y in reg.pixels), dtype=np.intp, count=reg.area)
        local_max[index] = float(highpass.v[ys, xs].max())
        areas[index] = reg.area
    val = max(local_max.values())
    return [
        index
        for index in range(1, labels.count + 1)
        if local_max[index] > p.factor * val and areas[index] >= p.min_area
    ]


def dilate(mask: BinaryMask, se: StructuringElement = StructuringElement()) -> BinaryMask:
    """True wherever the structuring element, centered there, touches foreground."""
    h, w = mask.shape
    src = mask.bit
    out = np.zeros((h, w), dtype=bool)
    for dx, dy in se.offsets():
        ys0, ys1 = max(0, -dy), min(h, h - dy)
        xs0, xs1 = max(0, -dx), min(w, w - dx)
        if ys0 < ys1 and xs0 < xs1:
            out[ys0:ys1, xs0:xs1] |= src[ys0 + dy : ys1 + dy, xs0 + dx : xs1 + dx]
    return BinaryMask(out)


def ring_mask(mask: BinaryMask, se: StructuringElement = StructuringElement()) -> BinaryMask:
    """Dilation minus the input: the band just outside the region, clipped to
    bounds and disjoint from the input by construction."""
    return subtract_mask(dilate(mask, se), mask)


def fill_holes(mask: BinaryMask) -> BinaryMask:
    """Fill enclosed background pockets; openings that reach the outside stay.

    Background is traversed with 4-connectivity (the dual of the
    8-connected foreground), so a one-pixel diagonal gap in the foreground
    does not leak the outside into a hole.
    """
    ys, xs = np.nonzero(mask.bit)
    if xs.size == 0:
        return mask
    # Work on the padded bbox so the outside is a single border-touching blob.
    y0, y1 = int(ys.min()), int(ys.max())
    x0, x1 = int(xs.min()), int(xs.max())
    crop = np.pad(mask.bit[y0 : y1 + 1, x0 : x1 + 1], 1, constant_values=False)
    bg = label(BinaryMask(~crop), connectivity=4)
    border_labels = set(np.unique(bg.label[0, :])) | set(np.unique(bg.label[-1, :]))
    border_labels |= set(np.unique(bg.label[:, 0])) | set(np.unique(bg.label[:, -1]))
    enclosed = ~crop & ~np.isin(bg.label, sorted(border_labels))
    filled = mask.bit.copy()
    filled[y0 : y1 + 1, x0 : x1 + 1] |= enclosed[1:-1, 1:-1]
    return BinaryMask(filled)


def separate_overlap(
    contour: Region,
    highpass: GrayImage,
    se: StructuringElement = StructuringElement(),
    tp: ThresholdParams = ThresholdParams(),
    connectivity: int = 8,
) -> list[BinaryMask]:
    """Split a contour that may hold several touching nuclei.

    The ring just outside the contour gives a local background estimate;
    a scratch image filled with that estimate, carrying the contour's own
    filtered values, is re-thresholded and re-labeled. Every resulting
    component that overlaps the contour becomes one output mask. If the
    re-threshold produces a single component (or degenerates), the
    original mask is returned unchanged, so the result never has fewer
    than one mask and output masks are pairwise disjoint.
    """
    mask = contour.to_mask(highpass.shape)
    ring = ring_mask(mask, se)
    if ring.count() == 0:
        return [mask]
    value = float(highpass.v[ring.bit].mean())
    scratch = np.full(highpass.shape, value, dtype=np.float64)
    scratch[mask.bit] = highpass.v[mask.bit]
    t = isodata_threshold(GrayImage(scratch), tp)
    fg = to_binary(GrayImage(scratch), t)
    if fg.count() == 0:
        return [mask]
    relabeled = label(fg, connectivity)
    pieces = []
    for index in range(1, relabeled.count + 1):
        piece = relabeled.label == index
        if (piece & mask.bit).any():
            pieces.append(BinaryMask(piece))
    if len(pieces) <= 1:
        return [mask]
    return pieces
