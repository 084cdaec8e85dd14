"""Geometry and feature types shared by every other module.

All coordinates are planar meters. Anything geographic must be projected
before it reaches this package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from . import _native
from .errors import DimensionMismatch, InvalidInput


@dataclass(frozen=True, slots=True)
class GeoPoint:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise InvalidInput(f"non-finite coordinate ({self.x}, {self.y})")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=np.float64)


def as_feature(values, dim: int | None = None) -> np.ndarray:
    """Validate a feature vector and return it as a read-only float64 array."""
    f = np.array(values, dtype=np.float64).reshape(-1)
    if f.size == 0:
        raise InvalidInput("feature vector must have at least one entry")
    if not np.all(np.isfinite(f)):
        raise InvalidInput("feature vector has non-finite entries")
    if dim is not None and f.size != dim:
        raise DimensionMismatch(f"feature has dimension {f.size}, expected {dim}")
    f.flags.writeable = False
    return f


@dataclass(frozen=True)
class LabeledSample:
    location: GeoPoint
    feature: np.ndarray
    source_class: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "feature", as_feature(self.feature))


def stack_samples(samples: Sequence[LabeledSample]) -> tuple[np.ndarray, np.ndarray]:
    """Return (locations (n, 2), features (n, d)); all features must share d."""
    if len(samples) == 0:
        return np.empty((0, 2)), np.empty((0, 0))
    dim = samples[0].feature.size
    for i, s in enumerate(samples):
        if s.feature.size != dim:
            raise DimensionMismatch(f"sample {i} has dimension {s.feature.size}, expected {dim}")
    locs = np.array([[s.location.x, s.location.y] for s in samples], dtype=np.float64)
    feats = np.vstack([s.feature for s in samples])
    return locs, feats


def euclid_dist(a: GeoPoint, b: GeoPoint) -> float:
    dx = a.x - b.x
    dy = a.y - b.y
    return math.sqrt(dx * dx + dy * dy)


@dataclass(frozen=True, slots=True)
class Bounds:
    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self):
        vals = (self.xmin, self.ymin, self.xmax, self.ymax)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidInput("bounds must be finite")
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise InvalidInput(f"empty bounds {vals}")

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin

    def contains(self, x, y, tol: float = 1e-9):
        return (
            (x >= self.xmin - tol) & (x <= self.xmax + tol)
            & (y >= self.ymin - tol) & (y <= self.ymax + tol)
        )


def _ring_array(ring) -> np.ndarray:
    r = np.asarray(ring, dtype=np.float64)
    if r.ndim != 2 or r.shape[1] != 2:
        raise InvalidInput("polygon ring must be a list of [x, y] vertices")
    if len(r) > 1 and np.array_equal(r[0], r[-1]):
        r = r[:-1]  # closing vertex repeated
    if len(r) < 3:
        raise InvalidInput("polygon ring needs at least 3 distinct vertices")
    if not np.all(np.isfinite(r)):
        raise InvalidInput("polygon ring has non-finite vertices")
    x, y = r[:, 0], r[:, 1]
    area = 0.5 * (np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
    if area == 0.0:
        raise InvalidInput("polygon ring has zero area")
    r.flags.writeable = False
    return r


@dataclass(frozen=True)
class Region:
    region_id: int
    class_id: int
    polygons: tuple[np.ndarray, ...]

    def __post_init__(self):
        rings = tuple(_ring_array(p) for p in self.polygons)
        if not rings:
            raise InvalidInput(f"region {self.region_id} has no polygons")
        object.__setattr__(self, "polygons", rings)
        object.__setattr__(self, "region_id", int(self.region_id))
        object.__setattr__(self, "class_id", int(self.class_id))

    def _packed(self):
        xs = np.concatenate([r[:, 0] for r in self.polygons])
        ys = np.concatenate([r[:, 1] for r in self.polygons])
        starts = np.cumsum([0] + [len(r) for r in self.polygons]).astype(np.int64)
        return xs, ys, starts

    def contains(self, x, y) -> np.ndarray:
        """Even-odd containment over all rings, boundary inclusive."""
        xs, ys, starts = self._packed()
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        y = np.atleast_1d(np.asarray(y, dtype=np.float64))
        return _native.points_in_rings(x, y, xs, ys, starts).astype(bool)


@dataclass(frozen=True)
class RegionPartition:
    regions: tuple[Region, ...]
    bounds: Bounds

    def __post_init__(self):
        regions = tuple(sorted(self.regions, key=lambda r: r.region_id))
        ids = [r.region_id for r in regions]
        if len(set(ids)) != len(ids):
            raise InvalidInput("region ids must be unique")
        for r in regions:
            for ring in r.polygons:
                if not np.all(self.bounds.contains(ring[:, 0], ring[:, 1])):
                    raise InvalidInput(f"region {r.region_id} extends outside the domain bounds")
        object.__setattr__(self, "regions", regions)

    @property
    def region_ids(self) -> list[int]:
        return [r.region_id for r in self.regions]

    def class_of(self, region_id: int) -> int:
        for r in self.regions:
            if r.region_id == region_id:
                return r.class_id
        raise KeyError(region_id)

    def label_points(self, points) -> np.ndarray:
        """Region id per point (-1 for none); lowest region id wins on shared edges."""
        pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
        out = np.full(len(pts), -1, dtype=np.int64)
        todo = np.ones(len(pts), dtype=bool)
        for r in self.regions:
            if not todo.any():
                break
            idx = np.flatnonzero(todo)
            hit = r.contains(pts[idx, 0], pts[idx, 1])
            out[idx[hit]] = r.region_id
            todo[idx[hit]] = False
        return out


def region_of(partition: RegionPartition, p: GeoPoint) -> int | None:
    rid = int(partition.label_points([[p.x, p.y]])[0])
    return None if rid < 0 else rid


@dataclass(frozen=True, slots=True)
class GridGeometry:
    origin: GeoPoint
    cell_size: float
    width: int
    height: int

    def __post_init__(self):
        if not (math.isfinite(self.cell_size) and self.cell_size > 0):
            raise InvalidInput("cell_size must be positive")
        if int(self.width) < 1 or int(self.height) < 1:
            raise InvalidInput("grid width and height must be positive")

    @classmethod
    def covering(cls, bounds: Bounds, cell_size: float) -> "GridGeometry":
        """Smallest grid anchored at the bounds' lower-left corner that covers them."""
        w = max(1, math.ceil(bounds.width / cell_size - 1e-9))
        h = max(1, math.ceil(bounds.height / cell_size - 1e-9))
        return cls(GeoPoint(bounds.xmin, bounds.ymin), float(cell_size), w, h)

    @property
    def n_cells(self) -> int:
        return self.width * self.height

    def centers(self) -> np.ndarray:
        """(height*width, 2) cell centers, row-major with y outer and x inner."""
        i = np.arange(self.width, dtype=np.float64)
        j = np.arange(self.height, dtype=np.float64)
        cx = self.origin.x + (i + 0.5) * self.cell_size
        cy = self.origin.y + (j + 0.5) * self.cell_size
        xx, yy = np.meshgrid(cx, cy)
        return np.column_stack([xx.ravel(), yy.ravel()])


@dataclass(frozen=True)
class DenseGrid:
    """Raster over a GridGeometry.

    ``payload`` has shape (height, width, d) for feature grids and
    (height, width) of integers for class grids.
    """

    geometry: GridGeometry
    payload: np.ndarray = field(repr=False)

    def __post_init__(self):
        p = np.asarray(self.payload)
        g = self.geometry
        if p.shape[:2] != (g.height, g.width) or p.ndim not in (2, 3):
            raise InvalidInput(f"payload shape {p.shape} does not match {g.height}x{g.width} grid")
        object.__setattr__(self, "payload", p)

    @property
    def is_feature_grid(self) -> bool:
        return self.payload.ndim == 3

    @property
    def origin(self) -> GeoPoint:
        return self.geometry.origin

    @property
    def cell_size(self) -> float:
        return self.geometry.cell_size

    @property
    def width(self) -> int:
        return self.geometry.width

    @property
    def height(self) -> int:
        return self.geometry.height


def grid_cells(grid: DenseGrid | GridGeometry) -> Iterator[tuple[int, GeoPoint]]:
    geom = grid.geometry if isinstance(grid, DenseGrid) else grid
    for k, (x, y) in enumerate(geom.centers()):
        yield k, GeoPoint(float(x), float(y))


def rasterize_partition(partition: RegionPartition, geometry: GridGeometry, *, kind: str = "class") -> np.ndarray:
    """(height, width) array of class ids (or region ids) at cell centers; -1 outside every region."""
    rids = partition.label_points(geometry.centers())
    if kind == "region":
        out = rids
    else:
        ids = np.array(partition.region_ids, dtype=np.int64)
        classes = np.array([r.class_id for r in partition.regions], dtype=np.int64)
        pos = np.clip(np.searchsorted(ids, rids), 0, len(ids) - 1)
        out = np.where(rids >= 0, classes[pos], -1)
    return out.reshape(geometry.height, geometry.width)
