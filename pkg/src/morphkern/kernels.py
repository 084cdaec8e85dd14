"""Gaussian base kernel and the graph-Laplacian spatial morphing kernel.

The morphing kernel deforms a base kernel ``k`` with a region prior encoded
by a Laplacian ``L`` over a node set with kernel matrix ``K``::

    k_morph(x, x') = k(x, x') - k_x^T (I + gamma L K)^{-1} gamma L k_x'

where ``k_x`` is the vector of base-kernel values between ``x`` and the
nodes. ``(I + gamma L K)`` is LU-factorized once per operator and reused for
every query.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import _native
from .core import GeoPoint, RegionPartition
from .errors import InvalidInput, SingularSystem
from .laplacian import LaplacianMatrix, NodeSet, region_laplacian

DEFAULT_GAMMA = 100.0
MAX_CONDITION = 1e12


@dataclass(frozen=True, slots=True, order=True)
class Bandwidth:
    sigma_x: float
    sigma_y: float

    def __post_init__(self):
        for s in (self.sigma_x, self.sigma_y):
            if not (math.isfinite(s) and s > 0):
                raise InvalidInput(f"bandwidth components must be positive and finite, got {s}")

    @classmethod
    def isotropic(cls, sigma: float) -> "Bandwidth":
        return cls(sigma, sigma)


def gaussian_kernel(a: GeoPoint, b: GeoPoint, bw: Bandwidth) -> float:
    dx = a.x - b.x
    dy = a.y - b.y
    return math.exp(-(dx * dx / (bw.sigma_x * bw.sigma_x) + dy * dy / (bw.sigma_y * bw.sigma_y)))


def cross_kernel(a, b, bw: Bandwidth) -> np.ndarray:
    """Gaussian kernel between every row of ``a`` (m, 2) and of ``b`` (n, 2)."""
    return _native.gaussian_cross(
        np.asarray(a, dtype=np.float64).reshape(-1, 2),
        np.asarray(b, dtype=np.float64).reshape(-1, 2),
        float(bw.sigma_x),
        float(bw.sigma_y),
    )


def kernel_matrix(nodes: NodeSet, bw: Bandwidth) -> np.ndarray:
    return cross_kernel(nodes.nodes, nodes.nodes, bw)


@dataclass(frozen=True)
class MorphOperator:
    nodes: NodeSet
    bandwidth: Bandwidth
    gamma: float
    K: np.ndarray = field(repr=False)
    laplacian: LaplacianMatrix = field(repr=False)
    lu_piv: tuple = field(repr=False)
    condition_estimate: float = 1.0

    @property
    def L(self) -> np.ndarray:
        return self.laplacian.L

    @property
    def system_matrix(self) -> np.ndarray:
        return np.eye(len(self.nodes)) + self.gamma * (self.L @ self.K)

    def solve(self, B) -> np.ndarray:
        """Solve (I + gamma L K) X = B for one or many right-hand sides."""
        return sla.lu_solve(self.lu_piv, np.asarray(B, dtype=np.float64), check_finite=False)

    def correction(self, targets) -> np.ndarray:
        """(I + gamma L K)^{-1} gamma L k_t for every target point t, shape (N, n_targets)."""
        k_t = cross_kernel(self.nodes.nodes, targets, self.bandwidth)
        if self.gamma == 0:
            return np.zeros_like(k_t)
        return self.solve(self.gamma * (self.L @ k_t))

    def cross(self, queries, targets) -> np.ndarray:
        """Morphed kernel between every query row and every target row, shape (m, n)."""
        base = cross_kernel(queries, targets, self.bandwidth)
        if self.gamma == 0:
            return base
        k_q = cross_kernel(queries, self.nodes.nodes, self.bandwidth)
        return base - k_q @ self.correction(targets)


def build_morph_operator(
    nodes: NodeSet,
    partition: RegionPartition | None,
    bw: Bandwidth,
    gamma: float = DEFAULT_GAMMA,
    *,
    laplacian: LaplacianMatrix | None = None,
) -> MorphOperator:
    """Assemble K and L over ``nodes`` and LU-factorize (I + gamma L K).

    Pass ``laplacian`` to reuse a prebuilt region graph instead of ``partition``.

    Raises SingularSystem when the factorization breaks down or the
    1-norm condition estimate exceeds 1e12.
    """
    if not (math.isfinite(gamma) and gamma >= 0):
        raise InvalidInput("gamma must be non-negative")
    if laplacian is None:
        if partition is None:
            raise InvalidInput("either a partition or a laplacian is required")
        laplacian = region_laplacian(nodes, partition)
    if laplacian.n != len(nodes):
        raise InvalidInput("laplacian size does not match the node set")
    K = kernel_matrix(nodes, bw)
    K.flags.writeable = False
    A = np.eye(len(nodes)) + gamma * (laplacian.L @ K)
    if not np.all(np.isfinite(A)):
        raise SingularSystem("system matrix has non-finite entries")
    with warnings.catch_warnings():
        warnings.simplefilter("error", sla.LinAlgWarning)
        try:
            lu, piv = sla.lu_factor(A, check_finite=False)
        except (sla.LinAlgWarning, sla.LinAlgError) as exc:
            raise SingularSystem(f"LU factorization failed: {exc}") from exc
    if np.any(np.diag(lu) == 0):
        raise SingularSystem("LU factor has a zero pivot")
    anorm = np.abs(A).sum(axis=0).max()
    rcond, info = sla.lapack.dgecon(lu, anorm, norm="1")
    cond = math.inf if rcond == 0 else 1.0 / rcond
    if info != 0 or not cond <= MAX_CONDITION:
        raise SingularSystem(
            f"condition estimate {cond:.3g} exceeds {MAX_CONDITION:.0e}; "
            "lower gamma, coarsen the mesh or shrink the bandwidth"
        )
    return MorphOperator(nodes, bw, float(gamma), K, laplacian, (lu, piv), float(cond))


def morphed_kernel(op: MorphOperator, x: GeoPoint, x2: GeoPoint) -> float:
    """Single morphed-kernel value: k(x, x2) - k_x . solve(A, gamma L k_x2)."""
    return float(op.cross([[x.x, x.y]], [[x2.x, x2.y]])[0, 0])
