"""Command line interface: ``uvbench {measure,preprocess,tags,baseline,report}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .errors import BenchmarkError, ManifestError, OutputIOError
from .io import (ManifestEntry, atomic_write, read_manifest, read_obj, read_report_csv,
                 write_manifest, write_obj)
from .preprocess import PreprocessConfig, chart_count, preprocess_mesh
from .runner import (TAG_NAMES, RunConfig, TagFilter, aggregate_plots, dataset_statistics,
                     default_workers, format_tag_rows, run_benchmark, tag_row)
from .tutte import tutte_embed

logger = logging.getLogger("uvbench")


def _add_tag_switches(parser: argparse.ArgumentParser) -> None:
    for tag in TAG_NAMES:
        group = parser.add_mutually_exclusive_group()
        group.add_argument(f"--require-{tag}", dest=tag, action="store_const", const=True,
                           help=f"only meshes tagged {tag}")
        group.add_argument(f"--forbid-{tag}", dest=tag, action="store_const", const=False,
                           help=f"only meshes not tagged {tag}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uvbench", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("measure", help="measure candidate UV maps against references")
    p.add_argument("--manifest", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    _add_tag_switches(p)
    p.add_argument("--workers", type=int, default=None,
                   help="parallel worker processes (default: $UVBENCH_WORKERS or CPU count)")
    p.add_argument("--timeout", type=float, default=300.0, help="seconds per mesh")
    p.add_argument("--tiny-area", type=float, default=1e-8)
    p.add_argument("--interesting", default="", help="comma-separated mesh ids")
    p.add_argument("--bins", type=int, default=20)

    p = sub.add_parser("preprocess", help="build dataset meshes from source OBJ files")
    p.add_argument("--in", dest="inputs", nargs="+", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--variant", choices=("cut", "uncut"), default="uncut")
    p.add_argument("--max-components", type=int, default=50)
    p.add_argument("--merge-eps-3d", type=float, default=None,
                   help="absolute 3D merge distance (default: 1e-6 x bbox diagonal)")
    p.add_argument("--merge-eps-uv", type=float, default=1e-6)

    p = sub.add_parser("tags", help="print topology and tags as CSV")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--in", dest="inputs", nargs="+", type=Path)
    src.add_argument("--manifest", type=Path)
    p.add_argument("--summary", action="store_true",
                   help="print median dataset statistics as JSON instead of rows")

    p = sub.add_parser("baseline", help="run a built-in parameterization method")
    bsub = p.add_subparsers(dest="method", required=True)
    t = bsub.add_parser("tutte", help="uniform Tutte embedding of disk meshes")
    t.add_argument("--manifest", required=True, type=Path)
    t.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("report", help="plots from an existing report CSV")
    p.add_argument("--csv", required=True, type=Path)
    p.add_argument("--reference", type=Path, default=None, help="reference report CSV")
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--bins", type=int, default=20)
    return parser


def cmd_measure(args) -> int:
    config = RunConfig(
        manifest=args.manifest,
        out_dir=args.out,
        filters=TagFilter(**{t: getattr(args, t) for t in TAG_NAMES}),
        workers=args.workers if args.workers is not None else default_workers(),
        timeout=args.timeout,
        tiny_area=args.tiny_area,
        interesting=tuple(s for s in args.interesting.split(",") if s),
        bins=args.bins,
    )
    result = run_benchmark(config)
    print(f"measured {result.n_succeeded} of {len(result.reports)} meshes; "
          f"report written to {args.out / 'report.csv'}")
    return result.exit_code


def cmd_preprocess(args) -> int:
    config = PreprocessConfig(args.merge_eps_3d, args.merge_eps_uv, args.max_components)
    entries = []
    failed = 0
    for path in args.inputs:
        try:
            mesh = read_obj(path, drop_degenerate=True)
            if mesh.uv is None:
                raise BenchmarkError("source mesh has no texture coordinates")
            pieces = preprocess_mesh(mesh, args.variant, config)
        except (BenchmarkError, OSError) as exc:
            logger.error("%s: %s", path, exc)
            failed += 1
            continue
        logger.info("%s: %d charts, %d output meshes", path, chart_count(mesh), len(pieces))
        for k, piece in enumerate(pieces):
            target = args.out / f"{path.stem}_{k}.obj"
            atomic_write(target, write_obj(piece))
            entries.append(ManifestEntry(target.stem, target, None, args.variant, path.stem))
    atomic_write(args.out / "manifest.csv", write_manifest(entries, args.out))
    print(f"wrote {len(entries)} meshes to {args.out}")
    return 0 if not failed else 1


def cmd_tags(args) -> int:
    if args.manifest is not None:
        sources = [(e.mesh_id, e.reference_path, e.variant) for e in read_manifest(args.manifest)]
    else:
        sources = [(p.stem, p, "") for p in args.inputs]
    rows = []
    status = 0
    for name, path, variant in sources:
        try:
            rows.append(tag_row(name, read_obj(path), variant))
        except (BenchmarkError, OSError) as exc:
            logger.error("%s: %s", path, exc)
            status = 1
    if args.summary:
        print(json.dumps(dataset_statistics(rows), indent=2, sort_keys=True))
    else:
        sys.stdout.write(format_tag_rows(rows))
    return status


def cmd_baseline(args) -> int:
    entries = read_manifest(args.manifest)
    out_entries = []
    for e in entries:
        candidate = None
        try:
            mesh = read_obj(e.reference_path)
            uv = tutte_embed(mesh)
            candidate = args.out / f"{e.mesh_id}.obj"
            atomic_write(candidate, write_obj(mesh.with_uv(uv)))
        except (BenchmarkError, OSError) as exc:
            logger.warning("%s: not parameterized: %s", e.mesh_id, exc)
        out_entries.append(ManifestEntry(e.mesh_id, e.reference_path, candidate, e.variant,
                                         e.source_asset, e.license))
    atomic_write(args.out / "manifest.csv", write_manifest(out_entries, args.out))
    done = sum(1 for e in out_entries if e.candidate_path is not None)
    print(f"parameterized {done} of {len(out_entries)} meshes")
    return 0 if done else 1


def cmd_report(args) -> int:
    rows = read_report_csv(args.csv.read_text())
    ref_rows = read_report_csv(args.reference.read_text()) if args.reference else None
    for name, svg in aggregate_plots(rows, ref_rows, args.bins).items():
        atomic_write(args.out / name, svg)
    return 0


COMMANDS = {"measure": cmd_measure, "preprocess": cmd_preprocess, "tags": cmd_tags,
            "baseline": cmd_baseline, "report": cmd_report}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ManifestError, OutputIOError) as exc:
        logger.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
