"""Write the bundled reference field specs and render them.

Usage:
    python scripts/make_fixtures.py [--out fixtures]

Produces, for each reference field, a plain-text spec (consumable by
``wbcount synth``), the rendered PNG, its .truth sidecar, and an
annotated overlay from a default-config run.
"""

from __future__ import annotations

import argparse
from pathlib import Path

from wbcount.pipeline import PipelineConfig, count_field, render_overlay, truth_path_for
from wbcount.raster import write_png
from wbcount.synth import (
    five_cell_reference_field,
    generate,
    save_field_spec,
    two_cell_reference_field,
    write_truth,
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path("fixtures"))
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    cfg = PipelineConfig()
    for name, spec in [
        ("five_cell_field", five_cell_reference_field()),
        ("two_cell_field", two_cell_reference_field()),
    ]:
        save_field_spec(args.out / f"{name}.spec", spec)
        img, truth = generate(spec)
        image_path = args.out / f"{name}.png"
        write_png(img, image_path)
        write_truth(truth_path_for(image_path), truth)
        report = count_field(img, cfg)
        write_png(render_overlay(img, report), args.out / f"{name}.overlay.png")
        status = "exact" if report.matches(truth) else "MISMATCH"
        print(f"{image_path}: {truth.total} cells, report {status}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
