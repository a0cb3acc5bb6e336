"""Command line interface.

Subcommands:

* ``count``  -- run the differential counter over image files
* ``synth``  -- render a synthetic field from a plain-text field spec
* ``eval``   -- score a directory of images against their .truth sidecars
* ``config`` -- print the built-in configuration defaults
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .pipeline import (
    CSV_HEADER,
    PipelineConfig,
    run_batch,
    truth_path_for,
)
from .raster import write_png
from .synth import generate, load_field_spec, write_truth


def _load_config(path: str | None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    return PipelineConfig.from_file(path)


def _cmd_count(args) -> int:
    cfg = _load_config(args.config)
    summary = run_batch(
        args.images,
        cfg,
        out_dir=args.out,
        overlay=args.overlay,
        fmt="csv" if args.csv else "json",
    )
    for name, report in summary.reports:
        counts = " ".join(f"{col}={getattr(report, col)}" for col in CSV_HEADER[2:])
        print(f"{name}: total_wbc={report.total_wbc} {counts}")
    for name, msg in summary.errors:
        print(f"{name}: ERROR {msg}", file=sys.stderr)
    print(
        f"processed {len(summary.reports)} image(s), "
        f"{len(summary.errors)} error(s), {summary.total_cells} cell(s)"
    )
    if summary.accuracy is not None:
        print(f"accuracy vs ground truth: {summary.accuracy:.4f} over {summary.n_with_truth} field(s)")
    return 1 if summary.failed else 0


def _cmd_synth(args) -> int:
    spec = load_field_spec(args.spec)
    img, truth = generate(spec)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.spec).stem
    image_path = out_dir / f"{stem}.png"
    write_png(img, image_path)
    write_truth(truth_path_for(image_path), truth)
    print(f"wrote {image_path} ({truth.total} cells)")
    return 0


def _cmd_eval(args) -> int:
    cfg = _load_config(args.config)
    directory = Path(args.dir)
    images = sorted(
        p
        for p in list(directory.glob("*.png")) + list(directory.glob("*.bmp"))
        if truth_path_for(p).exists()
    )
    if not images:
        print(f"no images with .truth sidecars under {directory}", file=sys.stderr)
        return 1
    summary = run_batch(images, cfg)
    for name, report in summary.reports:
        print(f"{name}: total_wbc={report.total_wbc}")
    for name, msg in summary.errors:
        print(f"{name}: ERROR {msg}", file=sys.stderr)
    print(f"accuracy: {summary.accuracy:.4f} over {summary.n_with_truth} field(s)")
    return 1 if summary.failed else 0


def _cmd_config(args) -> int:
    if args.dump:
        sys.stdout.write(PipelineConfig().to_text())
        return 0
    print("use --dump to print the built-in defaults")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wbcount", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_count = sub.add_parser("count", help="count white blood cells in field images")
    p_count.add_argument("images", nargs="+", help="PNG or BMP field images")
    p_count.add_argument("--config", help="pipeline config file")
    p_count.add_argument("--out", help="directory for per-image reports")
    p_count.add_argument("--overlay", action="store_true", help="also write annotated overlays")
    fmt = p_count.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="write JSON reports (default)")
    fmt.add_argument("--csv", action="store_true", help="write one CSV with all reports")
    p_count.set_defaults(func=_cmd_count)

    p_synth = sub.add_parser("synth", help="render a synthetic field from a spec file")
    p_synth.add_argument("--spec", required=True, help="field spec file")
    p_synth.add_argument("--out", required=True, help="output directory")
    p_synth.set_defaults(func=_cmd_synth)

    p_eval = sub.add_parser("eval", help="score a directory against .truth sidecars")
    p_eval.add_argument("--dir", required=True, help="directory of images with sidecars")
    p_eval.add_argument("--config", help="pipeline config file")
    p_eval.set_defaults(func=_cmd_eval)

    p_config = sub.add_parser("config", help="inspect configuration")
    p_config.add_argument("--dump", action="store_true", help="print the built-in defaults")
    p_config.set_defaults(func=_cmd_config)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
