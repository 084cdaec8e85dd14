"""Linear classifier head, dense classification and map scoring."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import DenseGrid
from .errors import DimensionMismatch, GeometryMismatch, InvalidInput


@dataclass(frozen=True)
class LinearClassifier:
    """scores = weights @ f + bias; row c belongs to class_ids[c]."""

    weights: np.ndarray = field(repr=False)
    bias: np.ndarray = field(repr=False)
    class_ids: tuple[int, ...]

    def __post_init__(self):
        W = np.array(self.weights, dtype=np.float64)
        b = np.array(self.bias, dtype=np.float64).reshape(-1)
        ids = tuple(int(c) for c in self.class_ids)
        if W.ndim != 2 or W.shape[0] < 2:
            raise InvalidInput("classifier needs a C x d weight matrix with C >= 2")
        if b.shape != (W.shape[0],) or len(ids) != W.shape[0]:
            raise InvalidInput("bias and class ids must have one entry per weight row")
        if len(set(ids)) != len(ids):
            raise InvalidInput("class ids must be unique")
        if not (np.all(np.isfinite(W)) and np.all(np.isfinite(b))):
            raise InvalidInput("classifier has non-finite parameters")
        W.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "weights", W)
        object.__setattr__(self, "bias", b)
        object.__setattr__(self, "class_ids", ids)

    @property
    def dim(self) -> int:
        return self.weights.shape[1]

    def predict(self, F) -> np.ndarray:
        """Class id per row of F (n, d); ties go to the lowest class id."""
        F = np.asarray(F, dtype=np.float64)
        if F.shape[-1] != self.dim:
            raise DimensionMismatch(f"features have dimension {F.shape[-1]}, classifier expects {self.dim}")
        order = np.argsort(self.class_ids, kind="stable")
        scores = F.reshape(-1, self.dim) @ self.weights[order].T + self.bias[order]
        ids = np.asarray(self.class_ids, dtype=np.int64)[order]
        return ids[np.argmax(scores, axis=1)]


def classify(clf: LinearClassifier, f) -> int:
    f = np.asarray(f, dtype=np.float64).reshape(-1)
    return int(clf.predict(f[None, :])[0])


def dense_classify(features: DenseGrid, clf: LinearClassifier) -> DenseGrid:
    if not features.is_feature_grid:
        raise InvalidInput("expected a feature grid")
    g = features.geometry
    labels = clf.predict(features.payload.reshape(g.n_cells, -1))
    return DenseGrid(g, labels.reshape(g.height, g.width))


def _labels(grid) -> np.ndarray:
    return np.asarray(grid.payload if isinstance(grid, DenseGrid) else grid)


@dataclass(frozen=True)
class EvalReport:
    miou: float
    noise_pct: float
    per_class_iou: dict[int, float]


def per_class_iou(pred, truth) -> dict[int, float]:
    """IoU for every class present in ``truth``; spurious predictions enlarge the unions."""
    p, t = _labels(pred), _labels(truth)
    if isinstance(pred, DenseGrid) and isinstance(truth, DenseGrid) and pred.geometry != truth.geometry:
        raise GeometryMismatch("prediction and truth grids differ in geometry")
    if p.shape != t.shape:
        raise GeometryMismatch(f"shape {p.shape} vs {t.shape}")
    out = {}
    for c in np.unique(t):
        pc, tc = p == c, t == c
        out[int(c)] = float(np.count_nonzero(pc & tc) / np.count_nonzero(pc | tc))
    return out


def miou(pred, truth) -> float:
    ious = per_class_iou(pred, truth)
    return float(np.mean(list(ious.values())))


def noise_pct(pred, truth_classes) -> float:
    p = _labels(pred)
    if p.size == 0:
        raise InvalidInput("empty prediction grid")
    spurious = ~np.isin(p, np.fromiter(truth_classes, dtype=np.int64))
    return 100.0 * np.count_nonzero(spurious) / p.size


def evaluate(pred, truth) -> EvalReport:
    ious = per_class_iou(pred, truth)
    classes = set(ious)
    return EvalReport(float(np.mean(list(ious.values()))), noise_pct(pred, classes), ious)
