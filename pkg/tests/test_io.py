import numpy as np
import pytest

from morphkern.core import DenseGrid, GeoPoint, GridGeometry
from morphkern.errors import InvalidInput
from morphkern.evaluate import LinearClassifier
from morphkern.harness import ScenarioConfig, make_partition
from morphkern.io import (
    class_raster_from_pgm,
    class_raster_to_pgm,
    classifier_from_csv,
    read_class_raster,
    read_classifier,
    read_feature_raster,
    read_regions,
    read_samples,
    regions_from_json,
    samples_from_csv,
    write_class_raster,
    write_classifier,
    write_feature_raster,
    write_regions,
    write_samples,
)

from conftest import random_samples


def roundtrip_bytes(tmp_path, write, read, obj, name):
    a, b = tmp_path / f"a_{name}", tmp_path / f"b_{name}"
    write(a, obj)
    write(b, read(a))
    return a.read_bytes(), b.read_bytes()


@pytest.mark.parametrize("layout", ["strip", "voronoi"])
def test_regions_roundtrip(tmp_path, layout):
    part = make_partition(ScenarioConfig(layout=layout), np.random.default_rng(3))
    first, second = roundtrip_bytes(tmp_path, write_regions, read_regions, part, "r.json")
    assert first == second
    back = read_regions(tmp_path / "a_r.json")
    for r0, r1 in zip(part.regions, back.regions):
        assert (r0.region_id, r0.class_id) == (r1.region_id, r1.class_id)
        np.testing.assert_array_equal(r0.polygons[0], r1.polygons[0])


def test_samples_roundtrip(tmp_path, rng):
    samples = random_samples(rng, 7, 5)
    samples[2] = type(samples[2])(samples[2].location, samples[2].feature, 4)
    first, second = roundtrip_bytes(tmp_path, write_samples, read_samples, samples, "s.csv")
    assert first == second
    back = read_samples(tmp_path / "a_s.csv")
    assert [s.source_class for s in back] == [None, None, 4, None, None, None, None]
    for s0, s1 in zip(samples, back):
        assert s0.feature.tobytes() == s1.feature.tobytes()
        assert (s0.location.x, s0.location.y) == (s1.location.x, s1.location.y)


def test_classifier_roundtrip(tmp_path, rng):
    clf = LinearClassifier(rng.standard_normal((4, 3)), rng.standard_normal(4), (9, 2, 5, 0))
    first, second = roundtrip_bytes(tmp_path, write_classifier, read_classifier, clf, "c.csv")
    assert first == second
    back = read_classifier(tmp_path / "a_c.csv")
    assert back.class_ids == clf.class_ids
    assert back.weights.tobytes() == clf.weights.tobytes()


def test_class_raster_roundtrip(tmp_path, rng):
    geom = GridGeometry(GeoPoint(-5.0, 2.5), 0.5, 7, 4)
    grid = DenseGrid(geom, rng.integers(0, 45, (4, 7)))
    write_class_raster(tmp_path / "m.v1", grid, {3: "park"})
    back, names = read_class_raster(tmp_path / "m.v1")
    write_class_raster(tmp_path / "n.v1", back, names)
    for ext in (".pgm", ".legend.json"):
        assert (tmp_path / f"m.v1{ext}").read_bytes() == (tmp_path / f"n.v1{ext}").read_bytes()
    np.testing.assert_array_equal(back.payload, grid.payload)
    assert back.geometry == geom


def test_pgm_orientation():
    grid = DenseGrid(GridGeometry(GeoPoint(0, 0), 1.0, 2, 2), np.array([[1, 2], [3, 4]]))
    lines = class_raster_to_pgm(grid).splitlines()
    assert lines[3:] == ["3 4", "1 2"]  # northern row first
    np.testing.assert_array_equal(class_raster_from_pgm("\n".join(lines)).payload, grid.payload)


def test_feature_raster_roundtrip(tmp_path, rng):
    geom = GridGeometry(GeoPoint(0, 0), 2.0, 5, 3)
    grid = DenseGrid(geom, rng.standard_normal((3, 5, 4)).astype(np.float32))
    write_feature_raster(tmp_path / "f", grid)
    back = read_feature_raster(tmp_path / "f")
    write_feature_raster(tmp_path / "g", back)
    for ext in (".f32", ".json"):
        assert (tmp_path / f"f{ext}").read_bytes() == (tmp_path / f"g{ext}").read_bytes()
    np.testing.assert_array_equal(back.payload, grid.payload)


@pytest.mark.parametrize("text, line", [
    ("x,y,f0\n1,2,3\n1,2,oops\n", ":3:"),
    ("x,y,f0\n1,2,3\n\n1,2\n", ":4:"),
    ("x,y,f0\n1,2,nan\n", ":2:"),
    ("x,z,f0\n1,2,3\n", ":1:"),
])
def test_malformed_samples_report_line(text, line):
    with pytest.raises(InvalidInput, match=line):
        samples_from_csv(text, "s.csv")


def test_malformed_classifier_and_regions():
    with pytest.raises(InvalidInput, match=":2:"):
        classifier_from_csv("class,w0,bias\nx,1,0\n", "c.csv")
    with pytest.raises(InvalidInput):
        classifier_from_csv("class,w0,bias\n0,1,0\n", "c.csv")  # one class only
    with pytest.raises(InvalidInput):
        regions_from_json("{not json", "r.json")
    with pytest.raises(InvalidInput):
        regions_from_json('{"bounds": [0, 0, 1, 1], "regions": [{"id": 1}]}', "r.json")
