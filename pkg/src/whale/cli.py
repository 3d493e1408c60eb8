"""Command-line front end.

    whale bench    --preset deep_dive_fast --dataset torus --n 5000 --method hybrid --m 400
    whale compare  a.csv b.csv --dim 1
    whale generate --dataset phantom --dims 64 64 64 --output phantom.wvol

Exit codes: 0 success, 2 usage error, 3 I/O error, 4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import __version__
from .benchmark import GENERATED, PRESETS, DatasetSpec, RunConfig, format_records, run_benchmark
from .cloud import (
    gen_gaussian_mixture,
    gen_phantom,
    gen_swiss_roll,
    gen_torus,
    write_cloud_csv,
    write_volume,
)
from .diagnostics import DEFAULT_COVERAGE_RADIUS, bottleneck_distance
from .errors import FormatError, InvalidArgument, WhaleError
from .landmarks import METHODS
from .persistence import read_diagram_csv

log = logging.getLogger("whale")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_INTERNAL = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _seed_list(text):
    try:
        return tuple(int(s) for s in text.replace(" ", "").split(",") if s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed list {text!r}") from None


def _add_dataset_args(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--dataset", choices=GENERATED, help="synthetic generator")
    src.add_argument("--cloud-file", help="x,y,z,weight CSV point cloud")
    src.add_argument("--volume-file", help="WVOL intensity volume")
    p.add_argument("--n", type=int, default=5000, help="points to generate")
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--major-radius", type=float, default=1.0)
    p.add_argument("--minor-radius", type=float, default=0.35)
    p.add_argument("--components", type=int, default=5)
    p.add_argument("--separation", type=float, default=2.0)
    p.add_argument("--dims", type=int, nargs=3, default=(64, 64, 64), metavar=("X", "Y", "Z"))
    p.add_argument("--intensity-quantile", type=float, default=0.75)
    p.add_argument("--max-points", type=int, default=None, help="thinning cap (default: preset)")
    p.add_argument("--data-seed", type=int, default=None, help="pin the generated dataset")


def _dataset_spec(args) -> DatasetSpec:
    if args.dataset:
        kind, path = args.dataset, None
    elif args.cloud_file:
        kind, path = "cloud", args.cloud_file
    else:
        kind, path = "volume", args.volume_file
    return DatasetSpec(
        kind=kind,
        n=args.n,
        noise=args.noise,
        major_radius=args.major_radius,
        minor_radius=args.minor_radius,
        components=args.components,
        separation=args.separation,
        dims=tuple(args.dims),
        path=path,
        intensity_quantile=args.intensity_quantile,
        max_points=args.max_points,
        data_seed=args.data_seed,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="whale", description="Witness persistence with hybrid landmarks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("bench", help="run the benchmark pipeline and write CSV records")
    _add_dataset_args(bench)
    bench.add_argument("--preset", choices=sorted(PRESETS), default="deep_dive")
    bench.add_argument("--method", action="append", choices=METHODS, dest="methods",
                       help="selection method; repeat for several (default: hybrid)")
    bench.add_argument("--seed", type=int, action="append", dest="seed_list")
    bench.add_argument("--seeds", type=_seed_list, help="comma-separated seeds")
    bench.add_argument("--m", type=int, default=None, help="landmark count (default 400)")
    bench.add_argument("--auto-m", action="store_true", help="set m from the retained point count")
    bench.add_argument("--k-witness", type=int, default=None)
    bench.add_argument("--max-dim", type=int, choices=(1, 2), default=None)
    bench.add_argument("--alpha", type=float, default=0.5)
    bench.add_argument("--epsilon", type=float, default=1e-9)
    bench.add_argument("--pool-constant", type=float, default=1.0)
    bench.add_argument("--coverage-radius", type=float, default=DEFAULT_COVERAGE_RADIUS)
    bench.add_argument("--rips-reference", type=int, default=None, metavar="SAMPLE_SIZE",
                       help="Rips reference sample size (0 disables)")
    bench.add_argument("--cycle-aware", action="store_true", help="add the cycle_aware method")
    bench.add_argument("--tau", type=float, default=None)
    bench.add_argument("--reserve", type=float, default=0.1)
    bench.add_argument("--locality-radius", type=float, default=0.05)
    bench.add_argument("--diagram-dir", default=None, help="also write diagram CSVs here")
    bench.add_argument("--output", "-o", default=None, help="CSV path (default: stdout)")
    bench.add_argument("--jobs", type=int, default=1)

    cmp_ = sub.add_parser("compare", help="bottleneck distance between two diagram CSVs")
    cmp_.add_argument("diagram_a")
    cmp_.add_argument("diagram_b")
    cmp_.add_argument("--dim", type=int, default=1)

    gen = sub.add_parser("generate", help="write a synthetic cloud (CSV) or phantom (WVOL)")
    _add_dataset_args(gen)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--output", "-o", required=True)
    return parser


def _bench_config(args) -> RunConfig:
    methods = list(args.methods or ["hybrid"])
    if args.cycle_aware and "cycle_aware" not in methods:
        methods.append("cycle_aware")
    seeds = list(args.seeds or ()) + list(args.seed_list or ())
    if not seeds:
        seeds = [0]
    if args.m is not None and args.auto_m:
        raise UsageError("--m and --auto-m are mutually exclusive")
    try:
        return RunConfig(
            dataset=_dataset_spec(args),
            preset=args.preset,
            methods=tuple(dict.fromkeys(methods)),
            seeds=tuple(dict.fromkeys(seeds)),
            m=args.m,
            use_auto_m=args.auto_m,
            k_witness=args.k_witness,
            max_dim=args.max_dim,
            alpha=args.alpha,
            epsilon=args.epsilon,
            pool_constant=args.pool_constant,
            coverage_radius=args.coverage_radius,
            rips_sample=args.rips_reference,
            tau=args.tau,
            reserve=args.reserve,
            locality_radius=args.locality_radius,
            diagram_dir=args.diagram_dir,
        )
    except InvalidArgument as exc:
        raise UsageError(str(exc)) from None


def cmd_bench(args) -> int:
    config = _bench_config(args)
    records = run_benchmark(config, output=args.output, jobs=args.jobs)
    if args.output is None:
        sys.stdout.write(format_records(records))
    else:
        log.info("wrote %d records to %s", len(records), args.output)
    return EXIT_OK


def cmd_compare(args) -> int:
    a = read_diagram_csv(args.diagram_a)
    b = read_diagram_csv(args.diagram_b)
    d = bottleneck_distance(a, b, args.dim)
    print(f"{d:.6f}")
    return EXIT_OK


def cmd_generate(args) -> int:
    spec = _dataset_spec(args)
    if spec.kind == "phantom":
        write_volume(gen_phantom(spec.dims, args.seed), args.output)
        return EXIT_OK
    if spec.kind == "swiss_roll":
        cloud = gen_swiss_roll(spec.n, spec.noise, args.seed)
    elif spec.kind == "torus":
        cloud = gen_torus(spec.n, spec.major_radius, spec.minor_radius, spec.noise, args.seed)
    elif spec.kind == "gaussian":
        cloud = gen_gaussian_mixture(spec.n, spec.components, spec.separation, args.seed)
    else:
        raise UsageError("generate needs --dataset")
    write_cloud_csv(cloud, args.output)
    return EXIT_OK


COMMANDS = {"bench": cmd_bench, "compare": cmd_compare, "generate": cmd_generate}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"whale: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FormatError as exc:
        print(f"whale: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        name = getattr(exc, "filename", None)
        print(f"whale: error: {name}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO
    except InvalidArgument as exc:
        print(f"whale: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (WhaleError, AssertionError) as exc:
        print(f"whale: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
