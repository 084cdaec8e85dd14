"""Synthetic three-region benchmark.

A 100 m x 100 m domain is split into three regions with distinct land-use
classes. Each trial plants ``images_per_region`` noisy class prototypes at
random spots inside every region, interpolates them over the 1 m grid with
each method, classifies every cell with a nearest-prototype linear head and
scores the map against the rasterized ground truth.

Every (density, trial) pair owns an RNG seeded from (seed, density, trial),
so serial and threaded sweeps give identical reports.
"""

from __future__ import annotations

import io
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .core import Bounds, GeoPoint, GridGeometry, LabeledSample, Region, RegionPartition, rasterize_partition
from .errors import InvalidInput, MorphkernError, RejectionOverflow
from .evaluate import LinearClassifier, dense_classify, miou, noise_pct
from .interp import DEFAULT_SIGMAS, InterpolatorSpec, dense_feature_map, default_bandwidth_grid, tune_bandwidth_loocv

METHODS = ("idw", "gauss", "smsk", "smmk")
METHOD_LABELS = {"idw": "IDW", "gauss": "Gaussian", "smsk": "SMSK", "smmk": "SMMK"}
DEFAULT_DENSITIES = (1, 2, 3, 5, 10)
MAX_REJECTIONS = 100_000


@dataclass(frozen=True)
class ScenarioConfig:
    domain: Bounds = Bounds(0.0, 0.0, 100.0, 100.0)
    layout: str = "strip"
    images_per_region: int = 1
    densities: tuple[int, ...] = DEFAULT_DENSITIES
    feature_dim: int = 16
    class_count: int = 45
    feature_noise_sigma: float = 0.1
    seed: int = 0
    trials: int = 20
    cell_size: float = 1.0
    mesh_spacing: float = 5.0
    gamma: float = 100.0
    sigmas: tuple[float, ...] = DEFAULT_SIGMAS
    methods: tuple[str, ...] = METHODS
    bandwidth_mode: str = "per_kernel"

    def __post_init__(self):
        if self.bandwidth_mode not in ("per_kernel", "shared"):
            raise InvalidInput(f"unknown bandwidth mode {self.bandwidth_mode!r}")
        if self.layout not in ("strip", "voronoi"):
            raise InvalidInput(f"unknown layout {self.layout!r}")
        if self.images_per_region < 1 or any(d < 1 for d in self.densities) or not self.densities:
            raise InvalidInput("densities must be positive integers")
        if self.feature_dim < 1 or self.class_count < 3:
            raise InvalidInput("need feature_dim >= 1 and class_count >= 3")
        if self.trials < 1:
            raise InvalidInput("trials must be >= 1")
        if not (self.feature_noise_sigma >= 0 and self.cell_size > 0 and self.mesh_spacing > 0 and self.gamma >= 0):
            raise InvalidInput("noise, cell size, mesh spacing and gamma must be non-negative/positive")
        if not self.sigmas or any(not s > 0 for s in self.sigmas):
            raise InvalidInput("bandwidth candidates must be positive")
        if any(m not in METHODS for m in self.methods):
            raise InvalidInput(f"methods must be drawn from {METHODS}")

    @property
    def geometry(self) -> GridGeometry:
        return GridGeometry.covering(self.domain, self.cell_size)


@dataclass(frozen=True)
class PrototypeBank:
    vectors: np.ndarray = field(repr=False)

    @property
    def class_count(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


def make_prototype_bank(
    class_count: int, dim: int, rng: np.random.Generator, max_coherence: float = 0.3, max_iter: int = 20_000
) -> PrototypeBank:
    """Unit prototypes whose pairwise |cosine| is at most ``max_coherence``.

    Starts from random directions and pushes apart every pair above the
    target until none remain. Below 1/3 the synthetic classifier maps the
    midpoint of any two prototypes to one of the two.
    """
    v = rng.standard_normal((class_count, dim))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    for _ in range(max_iter):
        G = v @ v.T
        np.fill_diagonal(G, 0.0)
        if np.abs(G).max() <= max_coherence:
            v.flags.writeable = False
            return PrototypeBank(v)
        v = v - 0.05 * np.where(np.abs(G) > 0.8 * max_coherence, G, 0.0) @ v
        v /= np.linalg.norm(v, axis=1, keepdims=True)
    raise InvalidInput(
        f"cannot place {class_count} prototypes in {dim} dimensions with |cosine| <= {max_coherence}"
    )


def make_synth_classifier(bank: PrototypeBank) -> LinearClassifier:
    return LinearClassifier(bank.vectors, np.zeros(bank.class_count), tuple(range(bank.class_count)))


def _clip_halfplane(poly, a, b, c):
    """Keep the part of ``poly`` with a*x + b*y <= c (Sutherland-Hodgman)."""
    out = []
    n = len(poly)
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        fp = a * p[0] + b * p[1] - c
        fq = a * q[0] + b * q[1] - c
        if fp <= 0:
            out.append(p)
        if (fp < 0 < fq) or (fq < 0 < fp):
            t = fp / (fp - fq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return out


def _polygon_area(poly) -> float:
    if len(poly) < 3:
        return 0.0
    x = np.array([p[0] for p in poly])
    y = np.array([p[1] for p in poly])
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _voronoi_cells(domain: Bounds, rng: np.random.Generator, min_frac: float = 0.05):
    rect = [(domain.xmin, domain.ymin), (domain.xmax, domain.ymin), (domain.xmax, domain.ymax), (domain.xmin, domain.ymax)]
    total = domain.width * domain.height
    for _ in range(1000):
        sites = np.column_stack([
            rng.uniform(domain.xmin, domain.xmax, 3),
            rng.uniform(domain.ymin, domain.ymax, 3),
        ])
        cells = []
        for i in range(3):
            poly = rect
            for j in range(3):
                if j == i:
                    continue
                # |p - s_i|^2 <= |p - s_j|^2  <=>  2 (s_j - s_i) . p <= |s_j|^2 - |s_i|^2
                a, b = 2 * (sites[j] - sites[i])
                c = sites[j] @ sites[j] - sites[i] @ sites[i]
                poly = _clip_halfplane(poly, a, b, c)
            cells.append(poly)
        if all(_polygon_area(p) >= min_frac * total for p in cells):
            return cells
    raise InvalidInput("could not draw a usable three-site Voronoi partition")


def make_partition(config: ScenarioConfig, rng: np.random.Generator) -> RegionPartition:
    """Three regions (ids 1, 2, 3) with distinct classes drawn from the class pool."""
    d = config.domain
    if config.layout == "strip":
        cuts = [d.xmin, d.xmin + d.width / 3, d.xmin + 2 * d.width / 3, d.xmax]
        cells = [[(cuts[k], d.ymin), (cuts[k + 1], d.ymin), (cuts[k + 1], d.ymax), (cuts[k], d.ymax)] for k in range(3)]
    else:
        cells = _voronoi_cells(d, rng)
    classes = rng.choice(config.class_count, size=3, replace=False)
    regions = [Region(k + 1, int(classes[k]), (np.asarray(cells[k]),)) for k in range(3)]
    return RegionPartition(tuple(regions), d)


def sample_scenario(
    partition: RegionPartition, config: ScenarioConfig, bank: PrototypeBank, rng: np.random.Generator
) -> list[LabeledSample]:
    """``images_per_region`` uniformly placed noisy prototypes per region, in region-id order."""
    samples = []
    for region in partition.regions:
        ring = np.vstack(region.polygons)
        lo, hi = ring.min(axis=0), ring.max(axis=0)
        accepted: list[np.ndarray] = []
        rejected = 0
        while len(accepted) < config.images_per_region:
            cand = rng.uniform(lo, hi, size=(64, 2))
            ok = partition.label_points(cand) == region.region_id
            for p, good in zip(cand, ok):
                if len(accepted) == config.images_per_region:
                    break
                if good:
                    accepted.append(p)
                else:
                    rejected += 1
            if rejected >= MAX_REJECTIONS:
                raise RejectionOverflow(f"region {region.region_id}: {rejected} rejected draws")
        proto = bank.vectors[region.class_id]
        for p in accepted:
            if config.feature_noise_sigma > 0:
                f = proto + config.feature_noise_sigma * rng.standard_normal(bank.dim)
                f = f / np.linalg.norm(f)
            else:
                f = proto.copy()
            samples.append(LabeledSample(GeoPoint(float(p[0]), float(p[1])), f, region.class_id))
    return samples


@dataclass(frozen=True)
class TrialResult:
    method: str
    density: int
    trial: int
    miou: float = math.nan
    noise_pct: float = math.nan
    degenerate_queries: int = 0
    exact_hits: int = 0
    sigma_x: float = math.nan
    sigma_y: float = math.nan
    wall_time: float = 0.0
    status: str = "ok"
    error: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass
class TrialRasters:
    truth: np.ndarray
    predictions: dict[str, np.ndarray]
    samples: list[LabeledSample]


def run_trial(
    config: ScenarioConfig, density: int, trial: int, bank: PrototypeBank, clf: LinearClassifier
) -> tuple[list[TrialResult], TrialRasters | None]:
    rng = np.random.default_rng([config.seed, 1, density, trial])
    cfg = replace(config, images_per_region=density)
    try:
        partition = make_partition(cfg, rng)
        samples = sample_scenario(partition, cfg, bank, rng)
        geometry = cfg.geometry
        truth = rasterize_partition(partition, geometry)
        candidates = default_bandwidth_grid(cfg.sigmas)
        shared_bw = tune_bandwidth_loocv(samples, candidates)
    except MorphkernError as exc:
        failed = [TrialResult(m, density, trial, status="failed", error=f"{type(exc).__name__}: {exc}") for m in cfg.methods]
        return failed, None
    truth_classes = {r.class_id for r in partition.regions}
    results, preds = [], {}
    for method in cfg.methods:
        t0 = time.perf_counter()
        bw = None
        try:
            if method == "idw":
                pass
            elif method == "gauss" or cfg.bandwidth_mode == "shared":
                bw = shared_bw
            else:
                bw = tune_bandwidth_loocv(samples, candidates, method=method, partition=partition,
                                          gamma=cfg.gamma, mesh_spacing=cfg.mesh_spacing)
            spec = InterpolatorSpec(method, bw, cfg.gamma, cfg.mesh_spacing)
            fmap, diag = dense_feature_map(samples, spec, geometry, partition)
            pred = dense_classify(fmap, clf).payload
        except MorphkernError as exc:
            results.append(TrialResult(method, density, trial,
                                       sigma_x=bw.sigma_x if bw else math.nan,
                                       sigma_y=bw.sigma_y if bw else math.nan,
                                       wall_time=time.perf_counter() - t0, status="failed",
                                       error=f"{type(exc).__name__}: {exc}"))
            continue
        preds[method] = pred
        results.append(TrialResult(
            method, density, trial,
            miou=miou(pred, truth),
            noise_pct=noise_pct(pred, truth_classes),
            degenerate_queries=diag.degenerate_query_count,
            exact_hits=diag.exact_hit_count,
            sigma_x=bw.sigma_x if bw else math.nan,
            sigma_y=bw.sigma_y if bw else math.nan,
            wall_time=time.perf_counter() - t0,
        ))
    return results, TrialRasters(truth, preds, samples)


@dataclass
class BenchmarkReport:
    config: ScenarioConfig
    results: list[TrialResult]
    rasters: dict[tuple[int, int], TrialRasters] = field(default_factory=dict, repr=False)

    def _select(self, method: str, density: int) -> list[TrialResult]:
        return [r for r in self.results if r.method == method and r.density == density and r.ok]

    def mean_miou(self, method: str, density: int) -> float:
        sel = self._select(method, density)
        return float(np.mean([r.miou for r in sel])) if sel else math.nan

    def mean_noise(self, method: str, density: int) -> float:
        sel = self._select(method, density)
        return float(np.mean([r.noise_pct for r in sel])) if sel else math.nan

    def failures(self) -> list[TrialResult]:
        return [r for r in self.results if not r.ok]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("density,method,trials_ok,trials_failed,mean_miou,mean_noise_pct\n")
        for density in self.config.densities:
            for method in self.config.methods:
                ok = len(self._select(method, density))
                failed = sum(1 for r in self.results if r.method == method and r.density == density and not r.ok)
                buf.write(f"{density},{method},{ok},{failed},"
                          f"{self.mean_miou(method, density)!r},{self.mean_noise(method, density)!r}\n")
        return buf.getvalue()

    def trials_csv(self) -> str:
        buf = io.StringIO()
        buf.write("density,trial,method,status,miou,noise_pct,degenerate_queries,exact_hits,sigma_x,sigma_y,error\n")
        for r in self.results:
            err = r.error.replace(",", ";").replace("\n", " ")
            buf.write(f"{r.density},{r.trial},{r.method},{r.status},{r.miou!r},{r.noise_pct!r},"
                      f"{r.degenerate_queries},{r.exact_hits},{r.sigma_x!r},{r.sigma_y!r},{err}\n")
        return buf.getvalue()

    def to_table(self) -> str:
        """Density rows, one (mIoU %, noise %) column pair per method."""
        head = ["Density"]
        for m in self.config.methods:
            head += [METHOD_LABELS[m], "noise (%)"]
        rows = [head]
        for density in self.config.densities:
            row = [str(density)]
            for m in self.config.methods:
                row += [f"{100 * self.mean_miou(m, density):.1f}", f"{self.mean_noise(m, density):.1f}"]
            rows.append(row)
        widths = [max(len(r[i]) for r in rows) for i in range(len(head))]
        lines = [" | ".join(c.rjust(w) for c, w in zip(r, widths)) for r in rows]
        lines.insert(1, "-+-".join("-" * w for w in widths))
        return "\n".join(lines) + "\n"


def _workers(workers: int | None) -> int:
    if workers is None:
        workers = int(os.environ.get("MORPHKERN_THREADS", "0") or 0)
    return workers if workers > 0 else (os.cpu_count() or 1)


def run_benchmark(config: ScenarioConfig, *, workers: int | None = None, keep_rasters: bool = False) -> BenchmarkReport:
    """Sweep every density x trial x method and collect per-trial scores.

    Failed trials are recorded with status "failed" and excluded from the
    means; the sweep itself never aborts on a per-trial error.
    """
    bank = make_prototype_bank(config.class_count, config.feature_dim, np.random.default_rng([config.seed, 0]))
    clf = make_synth_classifier(bank)
    tasks = [(d, t) for d in config.densities for t in range(config.trials)]

    def job(task):
        return run_trial(config, task[0], task[1], bank, clf)

    n = min(_workers(workers), len(tasks))
    if n > 1:
        with ThreadPoolExecutor(n) as pool:
            outputs = list(pool.map(job, tasks))
    else:
        outputs = [job(t) for t in tasks]
    report = BenchmarkReport(config, [])
    for task, (results, rasters) in zip(tasks, outputs):
        report.results.extend(results)
        if keep_rasters and rasters is not None:
            report.rasters[task] = rasters
    return report
