"""File formats: regions JSON, samples CSV, classifier CSV and rasters.

Floats are written with ``repr`` (shortest round-trip form), so a
write -> read -> write cycle reproduces the same bytes. All writers go
through a temp file and an atomic rename.

Regions JSON::

    {"bounds": [xmin, ymin, xmax, ymax],
     "regions": [{"id": 1, "class": 7, "polygons": [[[x, y], ...], ...]}]}

Samples CSV: header ``x,y,f0,...,f{d-1}`` with an optional trailing
``class`` column (empty cell = unknown).

Classifier CSV: header ``class,w0,...,w{d-1},bias``; one row per class.

Class raster: plain PGM (P2), one pixel per cell, first image row = the
northernmost grid row; plus ``<stem>.legend.json`` mapping class id -> name.

Feature raster: ``<stem>.f32`` little-endian float32, cells in grid order
(y outer, x inner, south to north), d values per cell; plus ``<stem>.json``
header with width, height, d, origin and cell size.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .core import Bounds, DenseGrid, GeoPoint, GridGeometry, LabeledSample, Region, RegionPartition
from .errors import InvalidInput, MorphkernError
from .evaluate import LinearClassifier


def atomic_write(path, data: str | bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"newline": "", "encoding": "utf-8"})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _num(v) -> str:
    return repr(float(v))


def _read_text(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc.strerror}") from exc


def _parse_float(text: str, where: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise InvalidInput(f"{where}: not a number: {text!r}") from None
    if not math.isfinite(v):
        raise InvalidInput(f"{where}: non-finite value {text!r}")
    return v


# --- regions -----------------------------------------------------------------

def regions_to_json(partition: RegionPartition) -> str:
    b = partition.bounds
    doc = {
        "bounds": [float(b.xmin), float(b.ymin), float(b.xmax), float(b.ymax)],
        "regions": [
            {
                "id": r.region_id,
                "class": r.class_id,
                "polygons": [[[float(x), float(y)] for x, y in ring] for ring in r.polygons],
            }
            for r in partition.regions
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def regions_from_json(text: str, source: str = "<regions>") -> RegionPartition:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{source}:{exc.lineno}: invalid JSON: {exc.msg}") from None
    try:
        bounds = Bounds(*[float(v) for v in doc["bounds"]])
        regions = tuple(
            Region(int(r["id"]), int(r["class"]), tuple(np.asarray(p, dtype=np.float64) for p in r["polygons"]))
            for r in doc["regions"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, MorphkernError):
            raise InvalidInput(f"{source}: {exc}") from None
        raise InvalidInput(f"{source}: malformed regions document ({type(exc).__name__}: {exc})") from None
    return RegionPartition(regions, bounds)


def write_regions(path, partition: RegionPartition) -> None:
    atomic_write(path, regions_to_json(partition))


def read_regions(path) -> RegionPartition:
    return regions_from_json(_read_text(path), str(path))


# --- samples -----------------------------------------------------------------

def samples_to_csv(samples) -> str:
    if not samples:
        raise InvalidInput("no samples to write")
    d = samples[0].feature.size
    with_class = any(s.source_class is not None for s in samples)
    buf = io.StringIO()
    head = ["x", "y"] + [f"f{i}" for i in range(d)] + (["class"] if with_class else [])
    buf.write(",".join(head) + "\n")
    for s in samples:
        if s.feature.size != d:
            raise InvalidInput("samples have mixed feature dimensions")
        row = [_num(s.location.x), _num(s.location.y)] + [_num(v) for v in s.feature]
        if with_class:
            row.append("" if s.source_class is None else str(int(s.source_class)))
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def samples_from_csv(text: str, source: str = "<samples>") -> list[LabeledSample]:
    rows = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(rows)]
    except StopIteration:
        raise InvalidInput(f"{source}: empty file") from None
    with_class = bool(header) and header[-1] == "class"
    fcols = header[2:-1] if with_class else header[2:]
    if header[:2] != ["x", "y"] or not fcols or fcols != [f"f{i}" for i in range(len(fcols))]:
        raise InvalidInput(f"{source}:1: header must be x,y,f0,...,f<d-1>[,class]")
    out = []
    for lineno, row in enumerate(rows, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        where = f"{source}:{lineno}"
        if len(row) != len(header):
            raise InvalidInput(f"{where}: expected {len(header)} columns, got {len(row)}")
        x = _parse_float(row[0], where)
        y = _parse_float(row[1], where)
        feat = [_parse_float(c, where) for c in row[2 : 2 + len(fcols)]]
        cls = None
        if with_class and row[-1].strip():
            try:
                cls = int(row[-1])
            except ValueError:
                raise InvalidInput(f"{where}: class must be an integer, got {row[-1]!r}") from None
        out.append(LabeledSample(GeoPoint(x, y), np.array(feat), cls))
    if not out:
        raise InvalidInput(f"{source}: no sample rows")
    return out


def write_samples(path, samples) -> None:
    atomic_write(path, samples_to_csv(samples))


def read_samples(path) -> list[LabeledSample]:
    return samples_from_csv(_read_text(path), str(path))


# --- classifier --------------------------------------------------------------

def classifier_to_csv(clf: LinearClassifier) -> str:
    buf = io.StringIO()
    buf.write(",".join(["class"] + [f"w{i}" for i in range(clf.dim)] + ["bias"]) + "\n")
    for cid, w, b in zip(clf.class_ids, clf.weights, clf.bias):
        buf.write(",".join([str(cid)] + [_num(v) for v in w] + [_num(b)]) + "\n")
    return buf.getvalue()


def classifier_from_csv(text: str, source: str = "<classifier>") -> LinearClassifier:
    rows = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(rows)]
    except StopIteration:
        raise InvalidInput(f"{source}: empty file") from None
    d = len(header) - 2
    if d < 1 or header[0] != "class" or header[-1] != "bias" or header[1:-1] != [f"w{i}" for i in range(d)]:
        raise InvalidInput(f"{source}:1: header must be class,w0,...,w<d-1>,bias")
    ids, W, b = [], [], []
    for lineno, row in enumerate(rows, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        where = f"{source}:{lineno}"
        if len(row) != len(header):
            raise InvalidInput(f"{where}: expected {len(header)} columns, got {len(row)}")
        try:
            ids.append(int(row[0]))
        except ValueError:
            raise InvalidInput(f"{where}: class id must be an integer") from None
        W.append([_parse_float(c, where) for c in row[1:-1]])
        b.append(_parse_float(row[-1], where))
    try:
        return LinearClassifier(np.array(W).reshape(len(W), d), np.array(b), tuple(ids))
    except InvalidInput as exc:
        raise InvalidInput(f"{source}: {exc}") from None


def write_classifier(path, clf: LinearClassifier) -> None:
    atomic_write(path, classifier_to_csv(clf))


def read_classifier(path) -> LinearClassifier:
    return classifier_from_csv(_read_text(path), str(path))


# --- rasters -----------------------------------------------------------------

def _geometry_header(g: GridGeometry) -> dict:
    return {"width": g.width, "height": g.height, "origin": [float(g.origin.x), float(g.origin.y)],
            "cell_size": float(g.cell_size)}


def class_raster_to_pgm(grid: DenseGrid) -> str:
    labels = np.asarray(grid.payload)
    if labels.ndim != 2:
        raise InvalidInput("class raster needs a 2-D label grid")
    if labels.size and labels.min() < 0:
        raise InvalidInput("PGM class rasters cannot hold negative class ids")
    maxval = max(1, int(labels.max()) if labels.size else 1)
    if maxval > 65535:
        raise InvalidInput("class ids above 65535 do not fit in PGM")
    lines = ["P2", f"{grid.width} {grid.height}", str(maxval)]
    for row in labels[::-1]:
        lines.append(" ".join(str(int(v)) for v in row))
    return "\n".join(lines) + "\n"


def class_raster_from_pgm(text: str, geometry: GridGeometry | None = None, source: str = "<pgm>") -> DenseGrid:
    tokens = []
    for line in text.splitlines():
        tokens.extend(line.split("#", 1)[0].split())
    if not tokens or tokens[0] != "P2":
        raise InvalidInput(f"{source}: not a plain PGM (P2) file")
    try:
        w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
        vals = np.array([int(t) for t in tokens[4:]], dtype=np.int64)
    except (IndexError, ValueError):
        raise InvalidInput(f"{source}: malformed PGM header or pixel data") from None
    if vals.size != w * h:
        raise InvalidInput(f"{source}: expected {w * h} pixels, found {vals.size}")
    if vals.size and vals.max() > maxval:
        raise InvalidInput(f"{source}: pixel value above maxval {maxval}")
    if geometry is None:
        geometry = GridGeometry(GeoPoint(0.0, 0.0), 1.0, w, h)
    elif (geometry.width, geometry.height) != (w, h):
        raise InvalidInput(f"{source}: {w}x{h} image does not match {geometry.width}x{geometry.height} grid")
    return DenseGrid(geometry, vals.reshape(h, w)[::-1].copy())


def write_class_raster(stem, grid: DenseGrid, names: dict[int, str] | None = None) -> tuple[Path, Path]:
    stem = Path(stem)
    pgm, legend_path = Path(f"{stem}.pgm"), Path(f"{stem}.legend.json")
    classes = sorted(int(c) for c in np.unique(grid.payload))
    names = names or {}
    legend = {
        "geometry": _geometry_header(grid.geometry),
        "classes": {str(c): names.get(c, f"class_{c}") for c in classes},
    }
    atomic_write(pgm, class_raster_to_pgm(grid))
    atomic_write(legend_path, json.dumps(legend, indent=2) + "\n")
    return pgm, legend_path


def read_class_raster(stem) -> tuple[DenseGrid, dict[int, str]]:
    stem = Path(stem)
    legend = json.loads(_read_text(Path(f"{stem}.legend.json")))
    g = legend["geometry"]
    geom = GridGeometry(GeoPoint(*g["origin"]), g["cell_size"], g["width"], g["height"])
    pgm = Path(f"{stem}.pgm")
    grid = class_raster_from_pgm(_read_text(pgm), geom, str(pgm))
    return grid, {int(k): v for k, v in legend["classes"].items()}


def write_feature_raster(stem, grid: DenseGrid) -> tuple[Path, Path]:
    if not grid.is_feature_grid:
        raise InvalidInput("feature raster needs a (height, width, d) grid")
    stem = Path(stem)
    data_path, header_path = Path(f"{stem}.f32"), Path(f"{stem}.json")
    header = _geometry_header(grid.geometry)
    header.update({"d": int(grid.payload.shape[2]), "dtype": "float32", "byte_order": "little",
                   "order": "row-major, y outer (south to north), x inner, d values per cell"})
    atomic_write(data_path, np.ascontiguousarray(grid.payload, dtype="<f4").tobytes())
    atomic_write(header_path, json.dumps(header, indent=2) + "\n")
    return data_path, header_path


def read_feature_raster(stem) -> DenseGrid:
    stem = Path(stem)
    header = json.loads(_read_text(Path(f"{stem}.json")))
    geom = GridGeometry(GeoPoint(*header["origin"]), header["cell_size"], header["width"], header["height"])
    d = int(header["d"])
    raw = np.fromfile(Path(f"{stem}.f32"), dtype="<f4")
    if raw.size != geom.n_cells * d:
        raise InvalidInput(f"{stem}.f32: expected {geom.n_cells * d} values, found {raw.size}")
    return DenseGrid(geom, raw.reshape(geom.height, geom.width, d))


def matrix_to_csv(M) -> str:
    M = np.atleast_2d(np.asarray(M, dtype=np.float64))
    return "".join(",".join(format(float(v), ".17g") for v in row) + "\n" for row in M)
