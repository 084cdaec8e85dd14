"""Feature-field interpolation from sparse labeled samples.

Every sample takes part in every query; there is no neighbourhood cutoff.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import _native
from .core import DenseGrid, GeoPoint, GridGeometry, LabeledSample, RegionPartition, stack_samples
from .errors import EmptySamples, InvalidInput, SingularSystem, TooFewSamples
from .kernels import (
    DEFAULT_GAMMA,
    Bandwidth,
    MorphOperator,
    build_morph_operator,
    cross_kernel,
    gaussian_kernel,
    morphed_kernel,
)
from .laplacian import NodeSet, build_mesh_nodes

METHODS = ("idw", "gauss", "smsk", "smmk")
DEFAULT_SIGMAS = (1.0, 2.0, 5.0, 10.0, 20.0, 50.0)
DEFAULT_MESH_SPACING = 5.0
DEGENERATE_RTOL = 1e-12
_CHUNK = 4096
_TINY = np.finfo(np.float64).tiny


@dataclass(frozen=True)
class InterpolatorSpec:
    method: str
    bandwidth: Bandwidth | None = None
    gamma: float = DEFAULT_GAMMA
    mesh_spacing: float = DEFAULT_MESH_SPACING

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidInput(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.method != "idw" and self.bandwidth is None:
            raise InvalidInput(f"method {self.method!r} needs a bandwidth")
        if not self.gamma >= 0:
            raise InvalidInput("gamma must be non-negative")
        if not self.mesh_spacing > 0:
            raise InvalidInput("mesh spacing must be positive")


@dataclass
class InterpolationDiagnostics:
    degenerate_query_count: int = 0
    exact_hit_count: int = 0
    total_queries: int = 0
    condition_estimate: float | None = None

    def merge(self, other: "InterpolationDiagnostics") -> "InterpolationDiagnostics":
        cond = [c for c in (self.condition_estimate, other.condition_estimate) if c is not None]
        return InterpolationDiagnostics(
            self.degenerate_query_count + other.degenerate_query_count,
            self.exact_hit_count + other.exact_hit_count,
            self.total_queries + other.total_queries,
            max(cond) if cond else None,
        )


def _arrays(samples) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(samples, tuple) and len(samples) == 2 and isinstance(samples[0], np.ndarray):
        locs, feats = samples
    else:
        locs, feats = stack_samples(samples)
    if len(locs) == 0:
        raise EmptySamples("at least one sample is required")
    return locs, feats


def _point(l) -> np.ndarray:
    if isinstance(l, GeoPoint):
        return l.as_array()
    return np.asarray(l, dtype=np.float64).reshape(2)


def nearest_sample(locs: np.ndarray, queries: np.ndarray) -> np.ndarray:
    """Index of the Euclidean-nearest sample for each query (lowest index on ties)."""
    dx = queries[:, 0, None] - locs[None, :, 0]
    dy = queries[:, 1, None] - locs[None, :, 1]
    return np.argmin(dx * dx + dy * dy, axis=1)


def weighted_average(weights: np.ndarray, locs, feats, queries, diag: InterpolationDiagnostics | None = None):
    """Row-normalized weighted mean of sample features.

    Rows whose weight sum is zero or tiny relative to the largest weight fall
    back to the nearest sample's feature. So do rows whose weights have all
    underflowed to subnormals, where too few mantissa bits remain.
    """
    total = weights.sum(axis=1)
    scale = np.abs(weights).max(axis=1)
    bad = (scale < _TINY) | (np.abs(total) < DEGENERATE_RTOL * scale) | ~np.isfinite(total)
    out = np.empty((len(weights), feats.shape[1]))
    good = ~bad
    if good.any():
        out[good] = (weights[good] @ feats) / total[good, None]
    if bad.any():
        out[bad] = feats[nearest_sample(locs, queries[bad])]
    if diag is not None:
        diag.degenerate_query_count += int(bad.sum())
        diag.total_queries += len(weights)
    return out


def idw_interpolate(samples: Sequence[LabeledSample], l) -> np.ndarray:
    """Inverse-distance weighted feature at ``l`` with normalized 1/d weights.

    Returns the lowest-index sample's feature exactly when ``l`` coincides
    with one or more sample locations.
    """
    locs, feats = _arrays(samples)
    q = _point(l)[None, :]
    w, hit = _native.idw_weights(q, locs)
    if hit[0] >= 0:
        return feats[hit[0]].copy()
    return w[0] @ feats


def nw_interpolate(
    samples: Sequence[LabeledSample],
    l,
    weight_fn: Callable[[GeoPoint, GeoPoint], float],
    diagnostics: InterpolationDiagnostics | None = None,
) -> np.ndarray:
    """Nadaraya-Watson estimate at ``l`` with weights ``weight_fn(l, s_i)``."""
    locs, feats = _arrays(samples)
    q = _point(l)
    gl = GeoPoint(float(q[0]), float(q[1]))
    w = np.array([[weight_fn(gl, GeoPoint(float(x), float(y))) for x, y in locs]])
    return weighted_average(w, locs, feats, q[None, :], diagnostics)[0]


def gaussian_weights(bw: Bandwidth) -> Callable[[GeoPoint, GeoPoint], float]:
    return lambda a, b: gaussian_kernel(a, b, bw)


def morphed_weights(op: MorphOperator) -> Callable[[GeoPoint, GeoPoint], float]:
    return lambda a, b: morphed_kernel(op, a, b)


def default_bandwidth_grid(sigmas=DEFAULT_SIGMAS) -> list[Bandwidth]:
    """All (sigma_x, sigma_y) pairs from ``sigmas``; isotropic pairs included."""
    return [Bandwidth(sx, sy) for sx in sigmas for sy in sigmas]


def _loo_from_weights(W: np.ndarray, locs, feats) -> float:
    n = len(locs)
    err = 0.0
    for i in range(n):
        keep = np.arange(n) != i
        pred = weighted_average(W[i : i + 1, keep], locs[keep], feats[keep], locs[i : i + 1])[0]
        err += float(np.sum((feats[i] - pred) ** 2))
    return err


def loocv_error(
    samples,
    bw: Bandwidth,
    *,
    method: str = "gauss",
    partition: RegionPartition | None = None,
    gamma: float = DEFAULT_GAMMA,
    mesh_spacing: float = DEFAULT_MESH_SPACING,
) -> float:
    """Sum of squared leave-one-out errors of the NW estimate with the given kernel.

    For SMSK the held-out sample is also dropped from the graph nodes; the
    SMMK mesh does not depend on the samples and is built once.
    """
    locs, feats = _arrays(samples)
    n = len(locs)
    if n < 2:
        raise TooFewSamples("leave-one-out needs at least 2 samples")
    if method == "gauss":
        return _loo_from_weights(cross_kernel(locs, locs, bw), locs, feats)
    spec = InterpolatorSpec(method, bw, gamma, mesh_spacing)
    if method == "smmk":
        op = _build_operator(spec, locs, partition)
        return _loo_from_weights(op.cross(locs, locs), locs, feats)
    if method != "smsk":
        raise InvalidInput(f"leave-one-out tuning is not defined for {method!r}")
    err = 0.0
    for i in range(n):
        keep = np.arange(n) != i
        op = _build_operator(spec, locs[keep], partition)
        w = op.cross(locs[i : i + 1], locs[keep])
        pred = weighted_average(w, locs[keep], feats[keep], locs[i : i + 1])[0]
        err += float(np.sum((feats[i] - pred) ** 2))
    return err


def tune_bandwidth_loocv(
    samples,
    candidates: Sequence[Bandwidth] | None = None,
    *,
    method: str = "gauss",
    partition: RegionPartition | None = None,
    gamma: float = DEFAULT_GAMMA,
    mesh_spacing: float = DEFAULT_MESH_SPACING,
) -> Bandwidth:
    """Candidate bandwidth with the lowest leave-one-out error for ``method``'s kernel.

    Exact ties go to the smaller sigma_x, then the smaller sigma_y. For the
    morphed kernels, candidates whose operator is singular are skipped.
    """
    locs, feats = _arrays(samples)
    if len(locs) < 2:
        raise TooFewSamples("leave-one-out needs at least 2 samples")
    candidates = list(default_bandwidth_grid() if candidates is None else candidates)
    if not candidates:
        raise InvalidInput("bandwidth candidate grid is empty")
    scored = []
    last_error = None
    for bw in candidates:
        try:
            e = loocv_error((locs, feats), bw, method=method, partition=partition,
                            gamma=gamma, mesh_spacing=mesh_spacing)
        except SingularSystem as exc:
            last_error = exc
            continue
        scored.append((e, bw.sigma_x, bw.sigma_y, bw))
    if not scored:
        raise SingularSystem(f"every bandwidth candidate failed: {last_error}")
    return min(scored, key=lambda t: t[:3])[3]


def _thread_count(workers: int | None) -> int:
    if workers is None:
        workers = int(os.environ.get("MORPHKERN_THREADS", "0") or 0)
    return workers if workers > 0 else (os.cpu_count() or 1)


def _build_operator(spec: InterpolatorSpec, locs, partition) -> MorphOperator:
    if partition is None:
        raise InvalidInput(f"method {spec.method!r} needs a region partition")
    if spec.method == "smsk":
        nodes = NodeSet(locs, kind="samples")
    else:
        nodes = build_mesh_nodes(partition.bounds, spec.mesh_spacing)
    return build_morph_operator(nodes, partition, spec.bandwidth, spec.gamma)


def interpolate_points(
    samples,
    queries,
    spec: InterpolatorSpec,
    partition: RegionPartition | None = None,
    *,
    operator: MorphOperator | None = None,
    workers: int | None = 1,
) -> tuple[np.ndarray, InterpolationDiagnostics]:
    """Evaluate the interpolator at each row of ``queries`` (m, 2); returns (m, d) features."""
    locs, feats = _arrays(samples)
    queries = np.asarray(queries, dtype=np.float64).reshape(-1, 2)
    diag = InterpolationDiagnostics()

    if spec.method in ("smsk", "smmk"):
        op = operator or _build_operator(spec, locs, partition)
        diag.condition_estimate = op.condition_estimate
        corr = op.correction(locs) if op.gamma != 0 else None

        def weights(q):
            w = cross_kernel(q, locs, op.bandwidth)
            if corr is not None:
                w = w - cross_kernel(q, op.nodes.nodes, op.bandwidth) @ corr
            return w
    elif spec.method == "gauss":
        def weights(q):
            return cross_kernel(q, locs, spec.bandwidth)
    else:
        weights = None

    def run(chunk: np.ndarray) -> tuple[np.ndarray, InterpolationDiagnostics]:
        d = InterpolationDiagnostics()
        if weights is None:
            w, hit = _native.idw_weights(chunk, locs)
            d.exact_hit_count = int((hit >= 0).sum())
            d.total_queries = len(chunk)
            out = w @ feats
            hits = hit >= 0
            out[hits] = feats[hit[hits]]  # exact copy, no 0*x rounding
            return out, d
        return weighted_average(weights(chunk), locs, feats, chunk, d), d

    chunks = [queries[i : i + _CHUNK] for i in range(0, len(queries), _CHUNK)] or [queries]
    n_threads = min(_thread_count(workers), len(chunks))
    if n_threads > 1:
        with ThreadPoolExecutor(n_threads) as pool:
            results = list(pool.map(run, chunks))
    else:
        results = [run(c) for c in chunks]
    out = np.vstack([r[0] for r in results]) if results else np.empty((0, feats.shape[1]))
    for _, d in results:
        diag = diag.merge(d)
    return out, diag


def dense_feature_map(
    samples,
    spec: InterpolatorSpec,
    geometry: GridGeometry,
    partition: RegionPartition | None = None,
    *,
    workers: int | None = 1,
) -> tuple[DenseGrid, InterpolationDiagnostics]:
    """Interpolated feature at every cell center of ``geometry``.

    SMSK and SMMK build one morph operator (mesh over the partition bounds for
    SMMK) and reuse it for all cells.
    """
    locs, feats = _arrays(samples)
    op = None
    if spec.method in ("smsk", "smmk"):
        op = _build_operator(spec, locs, partition)
    values, diag = interpolate_points(
        (locs, feats), geometry.centers(), spec, partition, operator=op, workers=workers
    )
    grid = DenseGrid(geometry, values.reshape(geometry.height, geometry.width, feats.shape[1]))
    return grid, diag
