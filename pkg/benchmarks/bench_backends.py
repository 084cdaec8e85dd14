"""Compare the compiled kernels against the numpy fallback.

Run with ``python3 benchmarks/bench_backends.py``. Prints best-of-N wall
times per kernel plus a full 100 x 100 dense map for each method.
"""

import argparse
import timeit

import numpy as np

import morphkern.interp as interp
from morphkern import _native
from morphkern._native import fallback
from morphkern.core import Bounds, GeoPoint, GridGeometry, LabeledSample, Region, RegionPartition
from morphkern.interp import InterpolatorSpec, dense_feature_map
from morphkern.kernels import Bandwidth


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def strips():
    cuts = [0, 100 / 3, 200 / 3, 100]
    regions = tuple(
        Region(k + 1, k, (np.array([[cuts[k], 0], [cuts[k + 1], 0], [cuts[k + 1], 100], [cuts[k], 100]]),))
        for k in range(3)
    )
    return RegionPartition(regions, Bounds(0, 0, 100, 100))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _native.compiled is None:
        raise SystemExit("compiled extension is not built; run pip install --no-build-isolation -e .")
    rng = np.random.default_rng(0)
    grid = GridGeometry(GeoPoint(0, 0), 1.0, 100, 100)
    q = grid.centers()
    s = rng.uniform(0, 100, (30, 2))
    mesh = rng.uniform(0, 100, (441, 2))
    part = strips()
    px, py = rng.uniform(0, 100, 10_000), rng.uniform(0, 100, 10_000)
    ring = part.regions[1].polygons[0]
    starts = np.array([0, len(ring)], dtype=np.int64)

    cases = {
        "gaussian_cross 10000x441": lambda m: m.gaussian_cross(q, mesh, 5.0, 5.0),
        "idw_weights 10000x30": lambda m: m.idw_weights(q, s),
        "points_in_rings 10000": lambda m: m.points_in_rings(px, py, ring[:, 0], ring[:, 1], starts),
    }
    print(f"{'case':32s} {'cython ms':>10s} {'numpy ms':>10s} {'speedup':>8s}")
    for name, fn in cases.items():
        c = best(lambda: fn(_native.compiled), args.repeat) * 1e3
        p = best(lambda: fn(fallback), args.repeat) * 1e3
        print(f"{name:32s} {c:10.2f} {p:10.2f} {p / c:8.2f}")

    samples = [LabeledSample(GeoPoint(*xy), rng.standard_normal(16)) for xy in s]
    for method in ("idw", "gauss", "smsk", "smmk"):
        spec = InterpolatorSpec(method, None if method == "idw" else Bandwidth(10, 10))
        times = {}
        for label, mod in (("cython", _native.compiled), ("numpy", fallback)):
            saved = {k: getattr(interp._native, k) for k in ("gaussian_cross", "idw_weights")}
            for k in saved:
                setattr(interp._native, k, getattr(mod, k))
            try:
                times[label] = best(lambda: dense_feature_map(samples, spec, grid, part), args.repeat) * 1e3
            finally:
                for k, v in saved.items():
                    setattr(interp._native, k, v)
        print(f"{'dense map ' + method:32s} {times['cython']:10.2f} {times['numpy']:10.2f} "
              f"{times['numpy'] / times['cython']:8.2f}")


if __name__ == "__main__":
    main()
