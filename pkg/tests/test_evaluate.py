from itertools import product

import numpy as np
import pytest

from morphkern.core import DenseGrid, GeoPoint, GridGeometry
from morphkern.errors import DimensionMismatch, GeometryMismatch, InvalidInput
from morphkern.evaluate import (
    LinearClassifier,
    classify,
    dense_classify,
    evaluate,
    miou,
    noise_pct,
    per_class_iou,
)


def set_iou_oracle(pred, truth):
    """mIoU by explicit index-set counting."""
    ious = []
    for c in sorted(set(truth)):
        P = {i for i, v in enumerate(pred) if v == c}
        T = {i for i, v in enumerate(truth) if v == c}
        ious.append(len(P & T) / len(P | T))
    return sum(ious) / len(ious)


def test_identity_classifier():
    clf = LinearClassifier(np.eye(2), np.zeros(2), (0, 1))
    assert classify(clf, [1.0, 0.0]) == 0
    assert classify(clf, [0.0, 1.0]) == 1


def test_all_zero_classifier_ties_to_lowest_id():
    clf = LinearClassifier(np.zeros((3, 4)), np.zeros(3), (7, 2, 5))
    assert classify(clf, [1, 2, 3, 4]) == 2


def test_random_classifier_scalar_oracle(rng):
    W = rng.standard_normal((6, 5))
    b = rng.standard_normal(6)
    ids = (11, 3, 8, 0, 21, 5)
    clf = LinearClassifier(W, b, ids)
    for f in rng.standard_normal((50, 5)):
        scores = [sum(W[c, j] * f[j] for j in range(5)) + b[c] for c in range(6)]
        assert classify(clf, f) == ids[int(np.argmax(scores))]


def test_classifier_validation():
    with pytest.raises(InvalidInput):
        LinearClassifier(np.zeros((2, 2)), np.zeros(3), (0, 1))
    with pytest.raises(InvalidInput):
        LinearClassifier(np.zeros((2, 2)), np.zeros(2), (0, 0))
    with pytest.raises(DimensionMismatch):
        classify(LinearClassifier(np.eye(2), np.zeros(2), (0, 1)), [1.0, 2.0, 3.0])


def test_dense_classify_cases(rng):
    clf = LinearClassifier(np.array([[1.0, 0.0], [-1.0, 0.0]]), np.zeros(2), (0, 1))
    g = GridGeometry(GeoPoint(0, 0), 1.0, 2, 1)
    out = dense_classify(DenseGrid(g, np.array([[[1.0, 0.0], [-1.0, 0.0]]])), clf)
    np.testing.assert_array_equal(out.payload, [[0, 1]])
    const = dense_classify(DenseGrid(GridGeometry(GeoPoint(0, 0), 1.0, 3, 3), np.ones((3, 3, 2))), clf)
    assert np.all(const.payload == 0)

    big = GridGeometry(GeoPoint(0, 0), 1.0, 100, 100)
    F = rng.standard_normal((100, 100, 4))
    clf = LinearClassifier(rng.standard_normal((5, 4)), rng.standard_normal(5), (4, 3, 2, 1, 0))
    out = dense_classify(DenseGrid(big, F), clf)
    oracle = np.array([[classify(clf, F[r, c]) for c in range(100)] for r in range(100)])
    np.testing.assert_array_equal(out.payload, oracle)


def test_miou_identical():
    t = np.array([[1, 1, 2], [3, 3, 2]])
    assert miou(t, t) == 1.0


def test_miou_half():
    truth = np.zeros(10, int)
    pred = np.array([0] * 5 + [1] * 5)
    assert miou(pred, truth) == 0.5


def test_miou_hand_case():
    truth = [0, 0, 1, 1, 2, 2]
    pred = [0, 1, 1, 2, 2, 2]
    # A: {0} vs {0,1}; B: {1,2} vs {2,3}; C: {3,4,5} vs {4,5}
    np.testing.assert_allclose(list(per_class_iou(np.array(pred), np.array(truth)).values()), [1 / 2, 1 / 3, 2 / 3])
    assert miou(np.array(pred), np.array(truth)) == pytest.approx(set_iou_oracle(pred, truth), abs=1e-15)
    assert miou(np.array(pred), np.array(truth)) == pytest.approx(0.5, abs=1e-15)


def test_miou_exhaustive_small(rng):
    for pred in product(range(4), repeat=5):
        truth = rng.integers(0, 3, 5)
        assert miou(np.array(pred), truth) == pytest.approx(set_iou_oracle(pred, list(truth)), abs=1e-15)


def test_miou_geometry_mismatch():
    a = DenseGrid(GridGeometry(GeoPoint(0, 0), 1.0, 2, 2), np.zeros((2, 2), int))
    b = DenseGrid(GridGeometry(GeoPoint(1, 0), 1.0, 2, 2), np.zeros((2, 2), int))
    with pytest.raises(GeometryMismatch):
        miou(a, b)
    with pytest.raises(GeometryMismatch):
        miou(np.zeros(3), np.zeros(4))


def test_noise_pct_cases():
    assert noise_pct(np.array([1, 2, 2]), {1, 2}) == 0.0
    pred = np.zeros(100, int)
    pred[17] = 9
    assert noise_pct(pred, {0}) == 1.0
    assert noise_pct(np.full(10, 5), {0, 1}) == 100.0


def test_evaluate_report():
    rep = evaluate(np.array([0, 9, 1, 1]), np.array([0, 0, 1, 1]))
    assert rep.noise_pct == 25.0
    assert rep.per_class_iou == {0: 0.5, 1: 1.0}
    assert rep.miou == 0.75
