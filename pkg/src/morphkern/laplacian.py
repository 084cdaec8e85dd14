"""Region-prior graphs: adjacency W, degree D and Laplacian L = D - W.

Two node sets are supported: the sample locations themselves and a regular
mesh laid over the study area. Either way two nodes are connected exactly
when they fall in the same region; nodes outside every region stay isolated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Bounds, RegionPartition
from .errors import InvalidInput


@dataclass(frozen=True)
class NodeSet:
    nodes: np.ndarray
    kind: str = "samples"
    spacing: float | None = None

    def __post_init__(self):
        pts = np.array(self.nodes, dtype=np.float64).reshape(-1, 2)
        if len(pts) == 0:
            raise InvalidInput("node set must not be empty")
        if not np.all(np.isfinite(pts)):
            raise InvalidInput("node coordinates must be finite")
        if self.kind not in ("samples", "mesh"):
            raise InvalidInput(f"unknown node set kind {self.kind!r}")
        pts.flags.writeable = False
        object.__setattr__(self, "nodes", pts)

    def __len__(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True)
class LaplacianMatrix:
    W: np.ndarray = field(repr=False)
    L: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.W.shape[0]

    @property
    def degrees(self) -> np.ndarray:
        return np.diag(self.L).copy()


def build_mesh_nodes(bounds: Bounds, spacing: float) -> NodeSet:
    """Lattice bounds.min + (i, j) * spacing, row-major (y outer).

    The max edge is included only when it lands on the lattice.
    """
    if not (spacing > 0 and math.isfinite(spacing)):
        raise InvalidInput("mesh spacing must be positive")
    if spacing > min(bounds.width, bounds.height):
        raise InvalidInput("mesh spacing exceeds the domain extent")
    nx = int(math.floor(bounds.width / spacing + 1e-9)) + 1
    ny = int(math.floor(bounds.height / spacing + 1e-9)) + 1
    xs = bounds.xmin + np.arange(nx) * spacing
    ys = bounds.ymin + np.arange(ny) * spacing
    xx, yy = np.meshgrid(xs, ys)
    return NodeSet(np.column_stack([xx.ravel(), yy.ravel()]), kind="mesh", spacing=float(spacing))


def build_adjacency(nodes: NodeSet, partition: RegionPartition) -> np.ndarray:
    labels = partition.label_points(nodes.nodes)
    W = (labels[:, None] == labels[None, :]) & (labels[:, None] >= 0)
    np.fill_diagonal(W, False)
    return W.astype(np.float64)


def build_laplacian(W) -> LaplacianMatrix:
    W = np.array(W, dtype=np.float64)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise InvalidInput("adjacency must be a square matrix")
    if not np.array_equal(W, W.T):
        raise InvalidInput("adjacency must be symmetric")
    if not np.all((W == 0) | (W == 1)):
        raise InvalidInput("adjacency entries must be 0 or 1")
    if np.any(np.diag(W) != 0):
        raise InvalidInput("adjacency must have a zero diagonal")
    L = np.diag(W.sum(axis=1)) - W
    W.flags.writeable = False
    L.flags.writeable = False
    return LaplacianMatrix(W, L)


def region_laplacian(nodes: NodeSet, partition: RegionPartition) -> LaplacianMatrix:
    return build_laplacian(build_adjacency(nodes, partition))
