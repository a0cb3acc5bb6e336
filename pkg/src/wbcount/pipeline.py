"""End-to-end differential counting: config, per-field chain, batch runs.

The per-field chain is: sharpen, convert to HSI, hue cutoff filter,
iterative threshold, binarize, label, keep valid contours, split
suspiciously large contours, classify each nucleus, aggregate into a
report. Every stage works on immutable inputs, so a field's report is a
pure function of (image bytes, config).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .binarize import ThresholdParams, hue_highpass, isodata_threshold, to_binary
from .classify import CellClass, ClassifyParams, classify_cell
from .colorspace import (
    DEFAULT_BLUE_SET,
    DEFAULT_RED_SET,
    convert_image,
    load_membership_set,
)
from .enhance import kernel_by_name, sharpen
from .raster import (
    BinaryMask,
    ImageReadError,
    Region,
    RgbImage,
    mask_stats,
    read_image,
    region_stats,
    write_png,
)
from .regions import StructuringElement, ValidityParams, label, separate_overlap, valid_contours
from .synth import GroundTruth, read_truth


class ConfigError(Exception):
    """Raised for unknown keys or out-of-range values in a config file."""


@dataclass(frozen=True)
class PipelineConfig:
    """Every tunable of the pipeline, with the defaults used throughout."""

    kernel: str = "four"  # Laplacian discretization: four | eight
    sharpen: bool = True
    hue_cutoff: float = 150.0  # degrees; keep hues at or above this
    s_min: float = 0.15  # saturation gate inside the hue filter
    t0: float = 0.5  # threshold convergence tolerance, gray levels
    max_iters: int = 100
    validity_factor: float = 0.85  # contour peak vs field peak
    min_area: int = 30  # px; noise floor for contours
    connectivity: int = 8
    se_shape: str = "square"
    se_radius: int = 1
    overlap_factor: float = 1.8  # split contours larger than this times the median
    elongation_cut: float = 1.25
    sat_white_max: float = 0.2
    neutrophil_high_saturation: bool = False  # literal 'white = very high saturation' reading
    red_set_path: str = ""  # blank = bundled default
    blue_set_path: str = ""

    def __post_init__(self):
        if self.kernel not in ("four", "eight"):
            raise ConfigError("kernel must be 'four' or 'eight'")
        if not 0.0 < self.hue_cutoff < 360.0:
            raise ConfigError("hue_cutoff must lie in (0, 360)")
        if not 0.0 <= self.s_min < 1.0:
            raise ConfigError("s_min must lie in [0, 1)")
        if not self.t0 > 0:
            raise ConfigError("t0 must be positive")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be at least 1")
        if not 0.0 < self.validity_factor <= 1.0:
            raise ConfigError("validity_factor must lie in (0, 1]")
        if self.min_area < 1:
            raise ConfigError("min_area must be at least 1")
        if self.connectivity not in (4, 8):
            raise ConfigError("connectivity must be 4 or 8")
        if self.se_shape not in ("square", "disc"):
            raise ConfigError("se_shape must be 'square' or 'disc'")
        if self.se_radius < 1:
            raise ConfigError("se_radius must be at least 1")
        if self.overlap_factor < 1.0:
            raise ConfigError("overlap_factor must be at least 1")
        if not self.elongation_cut > 1.0:
            raise ConfigError("elongation_cut must exceed 1")
        if not 0.0 < self.sat_white_max < 1.0:
            raise ConfigError("sat_white_max must lie in (0, 1)")

    def threshold_params(self) -> ThresholdParams:
        return ThresholdParams(t0=self.t0, max_iters=self.max_iters)

    def validity_params(self) -> ValidityParams:
        return ValidityParams(factor=self.validity_factor, min_area=self.min_area)

    def structuring_element(self) -> StructuringElement:
        return StructuringElement(shape=self.se_shape, radius=self.se_radius)

    def classify_params(self) -> ClassifyParams:
        red = load_membership_set(self.red_set_path, "red") if self.red_set_path else DEFAULT_RED_SET
        blue = (
            load_membership_set(self.blue_set_path, "blue") if self.blue_set_path else DEFAULT_BLUE_SET
        )
        return ClassifyParams(
            elongation_cut=self.elongation_cut,
            sat_white_max=self.sat_white_max,
            neutrophil_high_saturation=self.neutrophil_high_saturation,
            red_set=red,
            blue_set=blue,
            se=self.structuring_element(),
        )

    def to_text(self) -> str:
        lines = ["# wbcount pipeline configuration"]
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, bool):
                value = "true" if value else "false"
            lines.append(f"{f.name} = {value}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        spec = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, eq, val = line.partition("=")
            key = key.strip()
            val = val.strip()
            if not eq or key not in spec:
                raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
            default = getattr(cls, key)
            if isinstance(default, bool):
                if val.lower() not in ("true", "false"):
                    raise ConfigError(f"{path}:{lineno}: expected true/false for {key}")
                kwargs[key] = val.lower() == "true"
            elif isinstance(default, int):
                kwargs[key] = int(val)
            elif isinstance(default, float):
                kwargs[key] = float(val)
            else:
                kwargs[key] = val
        return cls(**kwargs)


@dataclass(frozen=True)
class CellRecord:
    cell_class: CellClass
    bbox: tuple[int, int, int, int]
    centroid: tuple[float, float]


_COUNT_FIELDS = (
    ("no_of_neutrophil", CellClass.NEUTROPHIL),
    ("no_of_lymphocyte", CellClass.LYMPHOCYTE),
    ("no_of_monocyte", CellClass.MONOCYTE),
    ("no_of_eosinophil", CellClass.EOSINOPHIL),
    ("no_of_basophil", CellClass.BASOPHIL),
    ("no_of_unknown", CellClass.UNKNOWN),
)


@dataclass(frozen=True)
class DifferentialReport:
    """Per-class counts plus the per-cell records that produced them."""

    total_wbc: int
    no_of_neutrophil: int
    no_of_lymphocyte: int
    no_of_monocyte: int
    no_of_eosinophil: int
    no_of_basophil: int
    no_of_unknown: int
    cells: tuple[CellRecord, ...] = ()

    def __post_init__(self):
        total = sum(getattr(self, name) for name, _ in _COUNT_FIELDS)
        if total != self.total_wbc:
            raise ValueError("total_wbc must equal the sum of all class counts")
        if len(self.cells) != self.total_wbc:
            raise ValueError("per-cell records must match total_wbc")

    @classmethod
    def from_cells(cls, cells: list[CellRecord]) -> "DifferentialReport":
        counts = {name: 0 for name, _ in _COUNT_FIELDS}
        for rec in cells:
            for name, cell_class in _COUNT_FIELDS:
                if rec.cell_class is cell_class:
                    counts[name] += 1
        return cls(total_wbc=len(cells), cells=tuple(cells), **counts)

    def to_json_dict(self) -> dict:
        out = {"total_wbc": self.total_wbc}
        out.update({name: getattr(self, name) for name, _ in _COUNT_FIELDS})
        out["cells"] = [
            {
                "class": rec.cell_class.value,
                "bbox": list(rec.bbox),
                "centroid": [rec.centroid[0], rec.centroid[1]],
            }
            for rec in self.cells
        ]
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=False) + "\n"

    def matches(self, truth: GroundTruth) -> bool:
        """Exact-match against ground truth: all five class counts agree and
        nothing fell into the unknown bucket."""
        return (
            self.no_of_unknown == 0
            and self.no_of_neutrophil == truth.neutrophil
            and self.no_of_lymphocyte == truth.lymphocyte
            and self.no_of_monocyte == truth.monocyte
            and self.no_of_eosinophil == truth.eosinophil
            and self.no_of_basophil == truth.basophil
        )


CSV_HEADER = ["image"] + ["total_wbc"] + [name for name, _ in _COUNT_FIELDS]


def count_field(img: RgbImage, cfg: PipelineConfig = PipelineConfig()) -> DifferentialReport:
    """Run the full chain on one field image."""
    enhanced = sharpen(img, kernel_by_name(cfg.kernel)) if cfg.sharpen else img
    hsi = convert_image(enhanced)
    highpass = hue_highpass(hsi, cfg.hue_cutoff, cfg.s_min)
    tp = cfg.threshold_params()
    t = isodata_threshold(highpass, tp)
    mask = to_binary(highpass, t)
    labels = label(mask, cfg.connectivity)
    valid = valid_contours(labels, highpass, cfg.validity_params())
    regions = [region_stats(labels, index) for index in valid]

    se = cfg.structuring_element()
    nuclei: list[tuple[BinaryMask, Region]] = []
    if regions:
        median_area = float(np.median([r.area for r in regions]))
        for reg in regions:
            if reg.area > cfg.overlap_factor * median_area:
                pieces = separate_overlap(reg, highpass, se, tp, cfg.connectivity)
            else:
                pieces = [reg.to_mask(img.shape)]
            for piece in pieces:
                nuclei.append((piece, mask_stats(piece)))

    cp = cfg.classify_params()
    records = [
        CellRecord(
            cell_class=classify_cell(piece, reg, enhanced, cp),
            bbox=reg.bbox,
            centroid=reg.centroid,
        )
        for piece, reg in nuclei
    ]
    records.sort(key=lambda rec: (rec.bbox[1], rec.bbox[0], rec.bbox[3], rec.bbox[2]))
    return DifferentialReport.from_cells(records)


# --- annotated overlays --------------------------------------------------------

_CLASS_COLORS = {
    CellClass.NEUTROPHIL: (0.0, 200.0, 0.0),
    CellClass.LYMPHOCYTE: (255.0, 215.0, 0.0),
    CellClass.MONOCYTE: (0.0, 200.0, 255.0),
    CellClass.EOSINOPHIL: (255.0, 0.0, 255.0),
    CellClass.BASOPHIL: (255.0, 128.0, 0.0),
    CellClass.UNKNOWN: (255.0, 0.0, 0.0),
}

# 3x5 glyphs for the class initials, one string row per scanline.
_GLYPHS = {
    "N": ("#.#", "###", "###", "#.#", "#.#"),
    "L": ("#..", "#..", "#..", "#..", "###"),
    "M": ("#.#", "###", "#.#", "#.#", "#.#"),
    "E": ("###", "#..", "##.", "#..", "###"),
    "B": ("##.", "#.#", "##.", "#.#", "##."),
    "U": ("#.#", "#.#", "#.#", "#.#", "###"),
}


def render_overlay(img: RgbImage, report: DifferentialReport) -> RgbImage:
    """Burn per-cell bounding boxes and class initials into a copy of the image.

    Colors are fixed per class and rendering is deterministic, so the same
    report always yields the same overlay. An all-zero report returns the
    image unchanged.
    """
    if report.total_wbc == 0:
        return img
    canvas = np.stack([img.r, img.g, img.b], axis=-1).copy()
    h, w = img.shape
    for rec in report.cells:
        color = _CLASS_COLORS[rec.cell_class]
        x0 = max(0, rec.bbox[0] - 2)
        y0 = max(0, rec.bbox[1] - 2)
        x1 = min(w - 1, rec.bbox[2] + 2)
        y1 = min(h - 1, rec.bbox[3] + 2)
        canvas[y0, x0 : x1 + 1] = color
        canvas[y1, x0 : x1 + 1] = color
        canvas[y0 : y1 + 1, x0] = color
        canvas[y0 : y1 + 1, x1] = color
        glyph = _GLYPHS[rec.cell_class.value[0].upper()]
        gy = y0 - 7 if y0 >= 7 else y1 + 2
        gx = x0
        for dy, row in enumerate(glyph):
            for dx, ch in enumerate(row):
                if ch == "#" and 0 <= gy + dy < h and 0 <= gx + dx < w:
                    canvas[gy + dy, gx + dx] = color
    return RgbImage.from_array(canvas)


# --- batch processing ----------------------------------------------------------

@dataclass(frozen=True)
class BatchSummary:
    reports: tuple[tuple[str, DifferentialReport], ...]
    errors: tuple[tuple[str, str], ...]
    class_totals: dict
    total_cells: int
    accuracy: float | None  # exact-match fraction over fields with ground truth
    n_with_truth: int

    @property
    def failed(self) -> bool:
        return bool(self.errors)

    def to_json_dict(self) -> dict:
        out = {
            "n_images": len(self.reports) + len(self.errors),
            "n_processed": len(self.reports),
            "n_errors": len(self.errors),
            "total_cells": self.total_cells,
            "class_totals": dict(self.class_totals),
            "errors": [{"image": name, "error": msg} for name, msg in self.errors],
        }
        if self.accuracy is not None:
            out["n_with_truth"] = self.n_with_truth
            out["accuracy"] = self.accuracy
        return out


def truth_path_for(image_path: str | Path) -> Path:
    return Path(str(image_path) + ".truth")


def run_batch(
    paths: list[str | Path],
    cfg: PipelineConfig = PipelineConfig(),
    out_dir: str | Path | None = None,
    overlay: bool = False,
    fmt: str = "json",
) -> BatchSummary:
    """Count every image, write one report per input, aggregate a summary.

    Per-file decode errors are recorded and processing continues; the
    caller maps ``summary.failed`` to a nonzero exit status. When a
    ``<image>.truth`` sidecar exists the report is scored against it and
    the summary carries the exact-match fraction.
    """
    if fmt not in ("json", "csv"):
        raise ValueError("fmt must be 'json' or 'csv'")
    out_path = Path(out_dir) if out_dir is not None else None
    if out_path is not None:
        out_path.mkdir(parents=True, exist_ok=True)

    reports: list[tuple[str, DifferentialReport]] = []
    errors: list[tuple[str, str]] = []
    matched = 0
    n_truth = 0
    for path in sorted(str(p) for p in paths):
        try:
            img = read_image(path)
        except ImageReadError as exc:
            errors.append((path, str(exc)))
            continue
        report = count_field(img, cfg)
        reports.append((path, report))
        truth_file = truth_path_for(path)
        if truth_file.exists():
            n_truth += 1
            if report.matches(read_truth(truth_file)):
                matched += 1
        if out_path is not None:
            stem = Path(path).stem
            if fmt == "json":
                (out_path / f"{stem}.report.json").write_text(report.to_json())
            if overlay:
                write_png(render_overlay(img, report), out_path / f"{stem}.overlay.png")
    if out_path is not None and fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(CSV_HEADER)
        for name, report in reports:
            writer.writerow(
                [name, report.total_wbc] + [getattr(report, col) for col, _ in _COUNT_FIELDS]
            )
        (out_path / "reports.csv").write_text(buf.getvalue())

    class_totals = {name: 0 for name, _ in _COUNT_FIELDS}
    for _, report in reports:
        for name, _ in _COUNT_FIELDS:
            class_totals[name] += getattr(report, name)
    return BatchSummary(
        reports=tuple(reports),
        errors=tuple(errors),
        class_totals=class_totals,
        total_cells=sum(r.total_wbc for _, r in reports),
        accuracy=(matched / n_truth) if n_truth else None,
        n_with_truth=n_truth,
    )
