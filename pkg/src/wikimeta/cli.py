"""Command-line interface.

    wikimeta analyze table.csv --format json --out results/
    wikimeta mass data/ --out massplot.svg --points points.csv
    wikimeta serve --port 8080 --wiki http://example.org/w

Exit codes: 0 success, 1 parse/validation/statistical error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import glob
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__, artifacts
from .errors import MetaError
from .export import fmt12
from .ingest import ColumnRole, parse_overrides
from .plots import MassPoint, labbe_mass_svg
from .pooling import AnalysisConfig, analyze_text

# short flags mirror the service's query parameters
COLUMN_FLAGS = {
    "c1n": "group1_n", "c1m": "group1_mean", "c1s": "group1_sd",
    "c2n": "group2_n", "c2m": "group2_mean", "c2s": "group2_sd",
    "labelcol": "label", "e1": "events1", "t1": "total1", "e2": "events2", "t2": "total2",
}


def _stem(path):
    name = Path(path).name
    return name[:-4] if name.lower().endswith(".csv") else Path(path).stem


def _add_measure_args(parser):
    parser.add_argument("--measure", default="smd",
                        help="smd, log_odds_ratio (lor) or log_variance_ratio (lvr); default smd")
    parser.add_argument("--variant", default="hedges", choices=("hedges", "cohen"),
                        help="SMD variant (default hedges)")


def _overrides(args):
    pairs = {}
    for item in args.col or []:
        role, sep, index = item.partition("=")
        if not sep:
            raise argparse.ArgumentTypeError(f"--col expects ROLE=INDEX, got {item!r}")
        pairs[role.strip()] = index.strip()
    for flag, role in COLUMN_FLAGS.items():
        value = getattr(args, flag)
        if value is not None:
            pairs[role] = value
    return parse_overrides(pairs)


def _output_path(out, stem, extension):
    if out is None:
        return Path(f"{stem}.{extension}")
    out = Path(out)
    if out.is_dir() or str(out).endswith(os.sep):
        return out / f"{stem}.{extension}"
    return out


def cmd_analyze(args):
    try:
        text = Path(args.file).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read {args.file}: {exc.strerror or exc}", file=sys.stderr)
        return 2
    except UnicodeDecodeError as exc:
        print(f"error: {args.file} is not UTF-8 text: {exc}", file=sys.stderr)
        return 1
    try:
        config = AnalysisConfig(args.measure, args.variant)
        title = args.title if args.title is not None else Path(args.file).name
        result = analyze_text(text, config, overrides=_overrides(args), title=title,
                              source_uri=str(Path(args.file).resolve()))
        formats = list(artifacts.FORMATS) if args.format == "all" else [args.format]
        if len(formats) > 1 and args.out is not None and not Path(args.out).is_dir():
            Path(args.out).mkdir(parents=True, exist_ok=True)
        outputs = []
        for fmt in formats:
            _, payload = artifacts.render(result, fmt, config)
            outputs.append((_output_path(args.out, _stem(args.file),
                                         artifacts.FORMATS[fmt].extension), payload))
    except MetaError as exc:
        print(f"error: {exc.code}: {exc.message}", file=sys.stderr)
        return 1
    except argparse.ArgumentTypeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        for path, payload in outputs:
            path.write_bytes(payload)
    except OSError as exc:
        print(f"error: cannot write {exc.filename}: {exc.strerror or exc}", file=sys.stderr)
        return 2
    print(artifacts.summary_line(result))
    return 0


def resolve_inputs(specs):
    """Expand directories (``*.csv`` inside) and glob patterns into a sorted file list."""
    files = set()
    for spec in specs:
        path = Path(spec)
        if path.is_dir():
            files.update(str(p) for p in path.glob("*.csv") if p.is_file())
        elif path.is_file():
            files.add(str(path))
        else:
            files.update(p for p in glob.glob(spec) if Path(p).is_file())
    return sorted(files)


def _mass_one(path, measure, variant):
    """Analyze one file; returns ``(label, point_fields, error)`` (picklable)."""
    label = _stem(path)
    try:
        text = Path(path).read_text(encoding="utf-8")
        result = analyze_text(text, AnalysisConfig(measure, variant), title=Path(path).name)
    except MetaError as exc:
        return label, None, f"{exc.code}: {exc.message}"
    except (OSError, UnicodeDecodeError) as exc:
        return label, None, f"{type(exc).__name__}: {exc}"
    r = result.random
    return label, (r.effect, r.se, r.n_total, r.k), None


def cmd_mass(args):
    files = resolve_inputs(args.inputs)
    if not files:
        print("error: no input files found", file=sys.stderr)
        return 2
    try:
        AnalysisConfig(args.measure, args.variant)
    except MetaError as exc:
        print(f"error: {exc.code}: {exc.message}", file=sys.stderr)
        return 1
    jobs = [(f, args.measure, args.variant) for f in files]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            outcomes = list(pool.map(_mass_one, *zip(*jobs)))
    else:
        outcomes = [_mass_one(*job) for job in jobs]

    points, rows = [], []
    for path, (label, fields, error) in zip(files, outcomes):
        if error is not None:
            print(f"warning: skipping {path}: {error}", file=sys.stderr)
            continue
        effect, se, n_total, k = fields
        point = MassPoint(label, effect, se, n_total)
        points.append(point)
        rows.append((label, effect, se, n_total, k, point.significant))
    if not points:
        print("error: every input failed", file=sys.stderr)
        return 1
    rows.sort(key=lambda row: (row[0], row[1], row[2]))
    svg = labbe_mass_svg(points, title=args.title)
    try:
        Path(args.out).write_bytes(svg.encode())
        if args.points:
            with open(args.points, "w", encoding="utf-8", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(["label", "effect", "se", "n_total", "k", "significant"])
                for label, effect, se, n_total, k, significant in rows:
                    writer.writerow([label, fmt12(effect), fmt12(se), n_total, k,
                                     "true" if significant else "false"])
    except OSError as exc:
        print(f"error: cannot write {exc.filename}: {exc.strerror or exc}", file=sys.stderr)
        return 2
    print(f"mass: {len(points)} of {len(files)} analyses plotted to {args.out}")
    return 0


def cmd_serve(args):
    from .service import ServiceConfig, serve

    env = ServiceConfig.from_env()
    serve(ServiceConfig(wiki_base_url=args.wiki or env.wiki_base_url,
                        host=args.host or env.host,
                        port=args.port if args.port is not None else env.port))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="wikimeta", description="Meta-analysis of CSV study tables.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="analyze one CSV file")
    p.add_argument("file")
    _add_measure_args(p)
    p.add_argument("--format", default="json", choices=list(artifacts.FORMATS) + ["all"])
    p.add_argument("--out", help="output file, or directory for <name>.<ext> (default: current directory)")
    p.add_argument("--title", help="title recorded in outputs (default: file name)")
    p.add_argument("--col", action="append", metavar="ROLE=INDEX",
                   help="assign a 0-based column to a role, e.g. group1_n=4; repeatable. Roles: "
                        + ", ".join(r.value for r in ColumnRole))
    for flag, role in COLUMN_FLAGS.items():
        p.add_argument(f"--{flag}", metavar="INDEX", help=f"column index for {role}")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("mass", help="analyze many CSV files and draw the mass plot")
    p.add_argument("inputs", nargs="+", help="files, directories or glob patterns")
    _add_measure_args(p)
    p.add_argument("--out", default="massplot.svg")
    p.add_argument("--points", default="points.csv", help="CSV of plotted points (sorted by label)")
    p.add_argument("--title", default="Mass meta-analysis")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.set_defaults(func=cmd_mass)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--wiki", help="wiki base URL (default: $WIKI_BASE_URL)")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
