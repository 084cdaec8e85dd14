"""``morphkern`` command line.

Exit codes: 0 success, 1 bad input, 2 singular morph system, 3 feature
dimension mismatch.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import _native
from .core import DenseGrid, GridGeometry, stack_samples
from .errors import DimensionMismatch, InvalidInput, MorphkernError, SingularSystem
from .evaluate import dense_classify
from .harness import DEFAULT_DENSITIES, ScenarioConfig, run_benchmark
from .interp import (
    DEFAULT_MESH_SPACING,
    DEFAULT_SIGMAS,
    InterpolatorSpec,
    dense_feature_map,
    default_bandwidth_grid,
    tune_bandwidth_loocv,
)
from .io import (
    atomic_write,
    matrix_to_csv,
    read_classifier,
    read_regions,
    read_samples,
    write_class_raster,
    write_feature_raster,
)
from .kernels import DEFAULT_GAMMA, Bandwidth
from .laplacian import NodeSet, build_mesh_nodes, region_laplacian

EXIT_OK, EXIT_INPUT, EXIT_SINGULAR, EXIT_DIMENSION = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _bandwidth(text: str) -> Bandwidth:
    vals = _floats(text)
    if len(vals) == 1:
        vals = vals * 2
    if len(vals) != 2:
        raise argparse.ArgumentTypeError("bandwidth is 'sigma' or 'sigma_x,sigma_y'")
    try:
        return Bandwidth(*vals)
    except InvalidInput as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _candidates(args) -> list[Bandwidth]:
    if args.candidates:
        try:
            return [_bandwidth(pair) for pair in args.candidates.split(";")]
        except argparse.ArgumentTypeError as exc:
            raise InvalidInput(f"--candidates: {exc}") from None
    return default_bandwidth_grid(tuple(args.sigmas) if args.sigmas else DEFAULT_SIGMAS)


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def cmd_interpolate(args) -> int:
    samples = read_samples(args.samples)
    partition = read_regions(args.regions)
    clf = read_classifier(args.classifier) if args.classifier else None
    if clf is not None and clf.dim != samples[0].feature.size:
        raise DimensionMismatch(
            f"classifier expects dimension {clf.dim}, samples have {samples[0].feature.size}"
        )
    stack_samples(samples)  # validates a uniform dimension
    bw = None
    if args.method != "idw":
        if args.bandwidth is not None:
            bw = args.bandwidth
        else:
            bw = tune_bandwidth_loocv(samples, _candidates(args), method=args.method, partition=partition,
                                      gamma=args.gamma, mesh_spacing=args.mesh_spacing)
            _log(f"tuned bandwidth: {bw.sigma_x!r},{bw.sigma_y!r}")
    spec = InterpolatorSpec(args.method, bw, args.gamma, args.mesh_spacing)
    geometry = GridGeometry.covering(partition.bounds, args.cell_size)
    t0 = time.perf_counter()
    fmap, diag = dense_feature_map(samples, spec, geometry, partition, workers=None)
    _log(f"grid {geometry.width}x{geometry.height}, method {args.method}, backend {_native.BACKEND}, "
         f"{time.perf_counter() - t0:.3f} s")
    _log(f"degenerate queries: {diag.degenerate_query_count}; exact hits: {diag.exact_hit_count}")
    if diag.condition_estimate is not None:
        _log(f"condition estimate: {diag.condition_estimate:.6g}")
    data, header = write_feature_raster(args.out, fmap)
    _log(f"wrote {data} and {header}")
    if clf is not None:
        labels = dense_classify(fmap, clf)
        names = {r.class_id: f"class_{r.class_id}" for r in partition.regions}
        pgm, legend = write_class_raster(args.out, labels, names)
        _log(f"wrote {pgm} and {legend}")
    return EXIT_OK


def cmd_benchmark(args) -> int:
    config = ScenarioConfig(
        layout=args.layout,
        densities=tuple(args.densities),
        seed=args.seed,
        trials=args.trials,
        feature_dim=args.feature_dim,
        class_count=args.classes,
        feature_noise_sigma=args.noise,
        mesh_spacing=args.mesh_spacing,
        gamma=args.gamma,
        bandwidth_mode=args.bandwidth_mode,
    )
    t0 = time.perf_counter()
    report = run_benchmark(config, workers=args.threads, keep_rasters=args.rasters)
    _log(f"benchmark finished in {time.perf_counter() - t0:.1f} s ({len(report.failures())} failed method runs)")
    out = Path(args.out_dir)
    atomic_write(out / "report.csv", report.to_csv())
    atomic_write(out / "report.txt", report.to_table())
    atomic_write(out / "trials.csv", report.trials_csv())
    if args.rasters:
        for (density, trial), r in sorted(report.rasters.items()):
            geom = config.geometry
            stem = out / "rasters" / f"d{density:02d}_t{trial:03d}"
            write_class_raster(f"{stem}_truth", DenseGrid(geom, r.truth))
            for method, pred in r.predictions.items():
                write_class_raster(f"{stem}_{method}", DenseGrid(geom, pred))
    sys.stdout.write(report.to_table())
    return EXIT_OK


def cmd_tune(args) -> int:
    samples = read_samples(args.samples)
    partition = read_regions(args.regions) if args.regions else None
    if args.method in ("smsk", "smmk") and partition is None:
        raise InvalidInput(f"--regions is required to tune {args.method}")
    bw = tune_bandwidth_loocv(samples, _candidates(args), method=args.method, partition=partition,
                              gamma=args.gamma, mesh_spacing=args.mesh_spacing)
    print(f"{bw.sigma_x!r},{bw.sigma_y!r}")
    return EXIT_OK


def cmd_laplacian_dump(args) -> int:
    partition = read_regions(args.regions)
    if args.samples:
        locs, _ = stack_samples(read_samples(args.samples))
        nodes = NodeSet(locs, kind="samples")
    else:
        nodes = build_mesh_nodes(partition.bounds, args.mesh_spacing)
    lap = region_laplacian(nodes, partition)
    out = Path(args.out_dir)
    atomic_write(out / "nodes.csv", "x,y\n" + matrix_to_csv(nodes.nodes))
    atomic_write(out / "W.csv", matrix_to_csv(lap.W))
    atomic_write(out / "L.csv", matrix_to_csv(lap.L))
    _log(f"{lap.n} nodes; wrote W.csv, L.csv and nodes.csv to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="morphkern", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def tuning_flags(sp):
        sp.add_argument("--sigmas", type=_floats, help="LOOCV sigma values; all (sx, sy) pairs are tried")
        sp.add_argument("--candidates", help="explicit LOOCV grid 'sx,sy;sx,sy;...'")
        sp.add_argument("--gamma", type=float, default=DEFAULT_GAMMA)
        sp.add_argument("--mesh-spacing", type=float, default=DEFAULT_MESH_SPACING)

    sp = sub.add_parser("interpolate", help="dense feature (and class) map from samples")
    sp.add_argument("--samples", required=True)
    sp.add_argument("--regions", required=True)
    sp.add_argument("--method", required=True, choices=["idw", "gauss", "smsk", "smmk"])
    sp.add_argument("--cell-size", type=float, required=True)
    bw = sp.add_mutually_exclusive_group()
    bw.add_argument("--bandwidth", type=_bandwidth, help="'sigma' or 'sigma_x,sigma_y' in meters")
    bw.add_argument("--tune", action="store_true", help="pick the bandwidth by LOOCV (default)")
    tuning_flags(sp)
    sp.add_argument("--classifier", help="classifier CSV; also writes a class raster")
    sp.add_argument("--out", required=True, help="output path stem")
    sp.set_defaults(func=cmd_interpolate)

    sp = sub.add_parser("benchmark", help="synthetic three-region sweep")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--trials", type=int, default=20)
    sp.add_argument("--densities", type=_ints, default=list(DEFAULT_DENSITIES))
    sp.add_argument("--layout", choices=["strip", "voronoi"], default="strip")
    sp.add_argument("--feature-dim", type=int, default=16)
    sp.add_argument("--classes", type=int, default=45)
    sp.add_argument("--noise", type=float, default=0.1, help="feature noise sigma")
    sp.add_argument("--gamma", type=float, default=DEFAULT_GAMMA)
    sp.add_argument("--mesh-spacing", type=float, default=DEFAULT_MESH_SPACING)
    sp.add_argument("--bandwidth-mode", choices=["per_kernel", "shared"], default="per_kernel")
    sp.add_argument("--threads", type=int, default=None, help="worker threads (default: MORPHKERN_THREADS, 0 = auto)")
    sp.add_argument("--rasters", action="store_true", help="also write per-trial class rasters")
    sp.add_argument("--out-dir", required=True)
    sp.set_defaults(func=cmd_benchmark)

    sp = sub.add_parser("tune", help="print the LOOCV bandwidth")
    sp.add_argument("--samples", required=True)
    sp.add_argument("--regions")
    sp.add_argument("--method", choices=["gauss", "smsk", "smmk"], default="gauss")
    tuning_flags(sp)
    sp.set_defaults(func=cmd_tune)

    sp = sub.add_parser("laplacian-dump", help="write the region graph W and Laplacian L as CSV")
    sp.add_argument("--regions", required=True)
    src = sp.add_mutually_exclusive_group()
    src.add_argument("--samples", help="use sample locations as nodes")
    src.add_argument("--mesh-spacing", type=float, default=DEFAULT_MESH_SPACING)
    sp.add_argument("--out-dir", required=True)
    sp.set_defaults(func=cmd_laplacian_dump)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SingularSystem as exc:
        _log(f"error: {exc}")
        return EXIT_SINGULAR
    except DimensionMismatch as exc:
        _log(f"error: {exc}")
        return EXIT_DIMENSION
    except (MorphkernError, OSError) as exc:
        _log(f"error: {exc}")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
