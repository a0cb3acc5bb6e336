"""Deterministic synthetic blood-smear fields with exact ground truth.

Fields are rendered as hard-edged shapes on a reddish background: dim
red-cell discs for texture, blue-stained nuclei (disc, axis-aligned oval,
or horseshoe depending on the cell class), and a cytoplasm disc whose
color encodes the granulocyte subtype (near-white, red, or blue). A
sprinkle of faint bluish stain-haze pixels gives the hue plane a low
anchor so thresholding always has genuine background content to reject.

Noise is a per-pixel uniform brightness offset added to all three
channels of a pixel at once. Equal offsets cancel in the channel
differences that drive hue, so rendered hues are exact by construction
and the ground truth stays exact, while saturation and intensity are
still perturbed and exercise the thresholding gates.

Every rendered nucleus pixel keeps a hue inside the default blue
membership support with saturation at least 0.4, so nuclei are
detectable by design.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .classify import CellClass
from .raster import RgbImage

# Render palette (r, g, b). Values stay inside [36, 219] so that the
# bounded brightness noise can never clip a flat region, and every
# reddish color keeps g - b large enough that no processing stage can
# flip it across the 0/360 hue seam.
BACKGROUND = (170.0, 105.0, 55.0)  # hue ~25.7, the eosin-pink field
RED_CELL = (185.0, 112.0, 60.0)  # slightly lighter red discs
NUCLEUS = (40.0, 36.0, 219.0)  # hue ~241.1, saturation ~0.63
NUCLEUS_VALLEY = (150.0, 150.0, 170.0)  # pale seam between touching nuclei, saturation-gated
HAZE = (80.0, 105.0, 115.0)  # hue ~196 at saturation 0.2, single-pixel stain residue
CYTOPLASM_WHITE = (219.0, 219.0, 219.0)  # neutrophil
CYTOPLASM_RED = (200.0, 53.0, 13.0)  # eosinophil, hue ~12
CYTOPLASM_BLUE = (100.0, 100.0, 210.0)  # basophil, hue 240 at saturation ~0.27
CYTOPLASM_PALE = (192.0, 192.0, 200.0)  # lymphocyte / monocyte, saturation ~0.01

NOISE_AMPLITUDE = 4  # uniform integer brightness offset in [-4, 4]

# Nucleus oval aspect for monocytes and the horseshoe cut for granulocytes.
_OVAL_RATIO = 1.65
_HOLE_RATIO = 0.55
_GAP_DEGREES = 75.0

_GRANULOCYTES = (CellClass.NEUTROPHIL, CellClass.EOSINOPHIL, CellClass.BASOPHIL)

_CYTOPLASM_COLOR = {
    CellClass.NEUTROPHIL: CYTOPLASM_WHITE,
    CellClass.EOSINOPHIL: CYTOPLASM_RED,
    CellClass.BASOPHIL: CYTOPLASM_BLUE,
    CellClass.LYMPHOCYTE: CYTOPLASM_PALE,
    CellClass.MONOCYTE: CYTOPLASM_PALE,
}


def cytoplasm_pad(cell_class: CellClass) -> int:
    return 3 if cell_class is CellClass.LYMPHOCYTE else 5


@dataclass(frozen=True)
class CellSpec:
    cell_class: CellClass
    center: tuple[int, int]
    radius: int
    partner: int | None = None  # index of an overlapping mate, if any

    def footprint(self) -> int:
        return self.radius + cytoplasm_pad(self.cell_class)


@dataclass(frozen=True)
class BackgroundParams:
    """Red-cell texture: disc count and stain-haze speck count."""

    rbc_count: int = 18
    haze_count: int = 140

    def __post_init__(self):
        if self.rbc_count < 0 or self.haze_count < 0:
            raise ValueError("background counts must be non-negative")


@dataclass(frozen=True)
class FieldSpec:
    width: int
    height: int
    cells: tuple[CellSpec, ...] = ()
    background: BackgroundParams = field(default=BackgroundParams())
    seed: int = 0

    def __post_init__(self):
        if self.width < 32 or self.height < 32:
            raise ValueError("field must be at least 32x32")
        for i, cell in enumerate(self.cells):
            if cell.cell_class is CellClass.UNKNOWN:
                raise ValueError("cells cannot be of class 'unknown'")
            if cell.radius < 8:
                raise ValueError("nucleus radius must be at least 8")
            fp = cell.footprint() + 2
            cx, cy = cell.center
            if not (fp <= cx < self.width - fp and fp <= cy < self.height - fp):
                raise ValueError(f"cell {i} does not fit inside the field")
            if cell.partner is not None:
                if not 0 <= cell.partner < len(self.cells) or cell.partner == i:
                    raise ValueError(f"cell {i} has an invalid overlap partner")
                mate = self.cells[cell.partner]
                d = float(np.hypot(cx - mate.center[0], cy - mate.center[1]))
                if not 3.0 <= d <= cell.radius + mate.radius - 2:
                    raise ValueError(
                        f"cells {i} and {cell.partner} cannot form a feasible overlap"
                    )


@dataclass(frozen=True)
class GroundTruth:
    neutrophil: int = 0
    lymphocyte: int = 0
    monocyte: int = 0
    eosinophil: int = 0
    basophil: int = 0
    boxes: tuple[tuple[CellClass, tuple[int, int, int, int]], ...] = ()

    @property
    def total(self) -> int:
        return self.neutrophil + self.lymphocyte + self.monocyte + self.eosinophil + self.basophil

    def count(self, cell_class: CellClass) -> int:
        return getattr(self, cell_class.value)


def _grid(h: int, w: int):
    yy, xx = np.mgrid[0:h, 0:w]
    return xx, yy


def _disc(xx, yy, cx: float, cy: float, r: float) -> np.ndarray:
    return (xx - cx) ** 2 + (yy - cy) ** 2 <= r * r


def _ellipse(xx, yy, cx: float, cy: float, a: int, b: int) -> np.ndarray:
    return (b * b) * (xx - cx) ** 2 + (a * a) * (yy - cy) ** 2 <= (a * a) * (b * b)


def _horseshoe(xx, yy, cx: float, cy: float, outer: int, gap_dir_deg: float) -> np.ndarray:
    inner = max(4, int(round(_HOLE_RATIO * outer)))
    d2 = (xx - cx) ** 2 + (yy - cy) ** 2
    annulus = (d2 <= outer * outer) & (d2 > inner * inner)
    ang = np.degrees(np.arctan2(yy - cy, xx - cx))
    delta = np.abs((ang - gap_dir_deg + 180.0) % 360.0 - 180.0)
    return annulus & (delta > _GAP_DEGREES / 2.0)


def _nucleus_mask(cell: CellSpec, xx, yy, rng: np.random.Generator) -> np.ndarray:
    cx, cy = cell.center
    if cell.cell_class is CellClass.LYMPHOCYTE:
        return _disc(xx, yy, cx, cy, cell.radius)
    if cell.cell_class is CellClass.MONOCYTE:
        a = cell.radius
        b = max(5, int(round(cell.radius / _OVAL_RATIO)))
        if rng.integers(0, 2):  # axis-aligned, horizontal or vertical at random
            a, b = b, a
        return _ellipse(xx, yy, cx, cy, a, b)
    gap_dir = float(rng.integers(0, 8)) * 45.0
    return _horseshoe(xx, yy, cx, cy, cell.radius, gap_dir)


def generate(spec: FieldSpec) -> tuple[RgbImage, GroundTruth]:
    """Render a field; deterministic for a given spec (seed included)."""
    h, w = spec.height, spec.width
    rng = np.random.default_rng(spec.seed)
    xx, yy = _grid(h, w)
    canvas = np.empty((h, w, 3), dtype=np.float64)
    canvas[:, :] = BACKGROUND

    # Red-cell texture, kept clear of the leukocyte footprints.
    for _ in range(spec.background.rbc_count):
        for _attempt in range(200):
            r = int(rng.integers(6, 10))
            cx = int(rng.integers(r + 1, w - r - 1))
            cy = int(rng.integers(r + 1, h - r - 1))
            if all(
                np.hypot(cx - c.center[0], cy - c.center[1]) > r + c.footprint() + 2
                for c in spec.cells
            ):
                canvas[_disc(xx, yy, cx, cy, r)] = RED_CELL
                break

    # Cytoplasm discs first, nuclei on top, then any overlap valleys.
    nucleus_masks: list[np.ndarray] = []
    for cell in spec.cells:
        cx, cy = cell.center
        canvas[_disc(xx, yy, cx, cy, cell.footprint())] = _CYTOPLASM_COLOR[cell.cell_class]
    for cell in spec.cells:
        nucleus = _nucleus_mask(cell, xx, yy, rng)
        canvas[nucleus] = NUCLEUS
        nucleus_masks.append(nucleus)
    for i, cell in enumerate(spec.cells):
        if cell.partner is None:
            continue
        mate = spec.cells[cell.partner]
        ax, ay = cell.center
        bx, by = mate.center
        ux, uy = bx - ax, by - ay
        norm = float(np.hypot(ux, uy))
        signed = ((xx - (ax + bx) / 2.0) * ux + (yy - (ay + by) / 2.0) * uy) / norm
        valley = (np.abs(signed) <= 1.0) & (nucleus_masks[i] | nucleus_masks[cell.partner])
        canvas[valley] = NUCLEUS_VALLEY

    # Stain haze: isolated faint bluish specks well away from the cells.
    taken = np.zeros((h, w), dtype=bool)
    placed = 0
    attempts = 0
    while placed < spec.background.haze_count and attempts < spec.background.haze_count * 60:
        attempts += 1
        cx = int(rng.integers(2, w - 2))
        cy = int(rng.integers(2, h - 2))
        if taken[max(0, cy - 3) : cy + 4, max(0, cx - 3) : cx + 4].any():
            continue
        if any(
            np.hypot(cx - c.center[0], cy - c.center[1]) <= c.footprint() + 6
            for c in spec.cells
        ):
            continue
        canvas[cy, cx] = HAZE
        taken[cy, cx] = True
        placed += 1

    # Brightness-only noise: one uniform offset per pixel, all channels.
    offsets = rng.integers(-NOISE_AMPLITUDE, NOISE_AMPLITUDE + 1, size=(h, w))
    canvas = np.clip(canvas + offsets[:, :, None], 0.0, 255.0)

    boxes = []
    counts = {c: 0 for c in CellClass}
    for cell, nucleus in zip(spec.cells, nucleus_masks):
        ys, xs = np.nonzero(nucleus)
        boxes.append(
            (cell.cell_class, (int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max())))
        )
        counts[cell.cell_class] += 1
    truth = GroundTruth(
        neutrophil=counts[CellClass.NEUTROPHIL],
        lymphocyte=counts[CellClass.LYMPHOCYTE],
        monocyte=counts[CellClass.MONOCYTE],
        eosinophil=counts[CellClass.EOSINOPHIL],
        basophil=counts[CellClass.BASOPHIL],
        boxes=tuple(boxes),
    )
    return RgbImage.from_array(canvas), truth


# Composition of a normal differential count, midpoints of the reference
# ranges, normalized to sum to one.
DEFAULT_MIX: dict[CellClass, float] = {
    CellClass.NEUTROPHIL: 60.0 / 97.7,
    CellClass.LYMPHOCYTE: 30.0 / 97.7,
    CellClass.MONOCYTE: 5.0 / 97.7,
    CellClass.EOSINOPHIL: 2.0 / 97.7,
    CellClass.BASOPHIL: 0.7 / 97.7,
}

_RADIUS_RANGE = {
    CellClass.NEUTROPHIL: (13, 17),
    CellClass.EOSINOPHIL: (13, 17),
    CellClass.BASOPHIL: (13, 16),
    CellClass.LYMPHOCYTE: (10, 13),
    CellClass.MONOCYTE: (10, 13),
}


def generate_suite(
    n: int,
    mix: dict[CellClass, float] | None = None,
    seed: int = 0,
    width: int = 256,
    height: int = 256,
) -> list[tuple[RgbImage, GroundTruth]]:
    """Render ``n`` fields with 3..6 cells each, classes drawn from ``mix``.

    Reproducible per seed; each field gets an independent child seed so
    fields could also be rendered in isolation.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    mix = dict(DEFAULT_MIX) if mix is None else mix
    classes = list(mix.keys())
    probs = np.array([mix[c] for c in classes], dtype=np.float64)
    if abs(probs.sum() - 1.0) > 1e-6:
        raise ValueError("mix proportions must sum to 1")
    probs = probs / probs.sum()

    out = []
    for child in np.random.SeedSequence(seed).spawn(max(n, 1))[:n]:
        rng = np.random.default_rng(child)
        n_cells = int(rng.integers(3, 7))
        drawn = [classes[i] for i in rng.choice(len(classes), size=n_cells, p=probs)]
        cells: list[CellSpec] = []
        for cell_class in drawn:
            lo, hi = _RADIUS_RANGE[cell_class]
            radius = int(rng.integers(lo, hi + 1))
            fp = radius + cytoplasm_pad(cell_class)
            for _attempt in range(300):
                cx = int(rng.integers(fp + 2, width - fp - 2))
                cy = int(rng.integers(fp + 2, height - fp - 2))
                if all(
                    np.hypot(cx - c.center[0], cy - c.center[1])
                    >= fp + c.footprint() + 6
                    for c in cells
                ):
                    cells.append(CellSpec(cell_class, (cx, cy), radius))
                    break
        spec = FieldSpec(
            width=width,
            height=height,
            cells=tuple(cells),
            seed=int(rng.integers(0, 2**31 - 1)),
        )
        out.append(generate(spec))
    return out


def five_cell_reference_field() -> FieldSpec:
    """A fixed five-cell field: 2 neutrophils, 1 eosinophil, 1 monocyte,
    1 lymphocyte."""
    return FieldSpec(
        width=256,
        height=256,
        cells=(
            CellSpec(CellClass.NEUTROPHIL, (64, 64), 15),
            CellSpec(CellClass.NEUTROPHIL, (190, 60), 14),
            CellSpec(CellClass.EOSINOPHIL, (64, 190), 15),
            CellSpec(CellClass.MONOCYTE, (185, 180), 12),
            CellSpec(CellClass.LYMPHOCYTE, (128, 126), 11),
        ),
        seed=13,
    )


def two_cell_reference_field() -> FieldSpec:
    """A fixed two-cell field: 1 neutrophil and 1 monocyte."""
    return FieldSpec(
        width=256,
        height=256,
        cells=(
            CellSpec(CellClass.NEUTROPHIL, (80, 90), 15),
            CellSpec(CellClass.MONOCYTE, (180, 150), 12),
        ),
        seed=2,
    )


# --- plain-text serialization -------------------------------------------------

_TRUTH_KEYS = ("total", "neutrophil", "lymphocyte", "monocyte", "eosinophil", "basophil")


def write_truth(path: str | Path, truth: GroundTruth) -> None:
    lines = [f"total = {truth.total}"]
    lines += [f"{k} = {getattr(truth, k)}" for k in _TRUTH_KEYS[1:]]
    Path(path).write_text("\n".join(lines) + "\n")


def read_truth(path: str | Path) -> GroundTruth:
    values: dict[str, int] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, val = line.partition("=")
        key = key.strip()
        if key not in _TRUTH_KEYS:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = int(val.strip())
    truth = GroundTruth(**{k: values.get(k, 0) for k in _TRUTH_KEYS[1:]})
    if "total" in values and values["total"] != truth.total:
        raise ValueError(f"{path}: total does not match the class counts")
    return truth


def save_field_spec(path: str | Path, spec: FieldSpec) -> None:
    lines = [
        f"width = {spec.width}",
        f"height = {spec.height}",
        f"seed = {spec.seed}",
        f"rbc = {spec.background.rbc_count}",
        f"haze = {spec.background.haze_count}",
    ]
    for cell in spec.cells:
        entry = f"cell = {cell.cell_class.value} {cell.center[0]} {cell.center[1]} {cell.radius}"
        if cell.partner is not None:
            entry += f" partner={cell.partner}"
        lines.append(entry)
    Path(path).write_text("\n".join(lines) + "\n")


def load_field_spec(path: str | Path) -> FieldSpec:
    scalars: dict[str, int] = {}
    cells: list[CellSpec] = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key == "cell":
            parts = val.split()
            if len(parts) not in (4, 5):
                raise ValueError(f"{path}:{lineno}: expected 'class cx cy radius [partner=K]'")
            partner = None
            if len(parts) == 5:
                if not parts[4].startswith("partner="):
                    raise ValueError(f"{path}:{lineno}: bad cell attribute {parts[4]!r}")
                partner = int(parts[4].split("=", 1)[1])
            cells.append(
                CellSpec(CellClass(parts[0]), (int(parts[1]), int(parts[2])), int(parts[3]), partner)
            )
        elif key in ("width", "height", "seed", "rbc", "haze"):
            scalars[key] = int(val)
        else:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
    for required in ("width", "height"):
        if required not in scalars:
            raise ValueError(f"{path}: missing {required!r}")
    background = BackgroundParams(
        rbc_count=scalars.get("rbc", BackgroundParams.rbc_count),
        haze_count=scalars.get("haze", BackgroundParams.haze_count),
    )
    return FieldSpec(
        width=scalars["width"],
        height=scalars["height"],
        cells=tuple(cells),
        background=background,
        seed=scalars.get("seed", 0),
    )
