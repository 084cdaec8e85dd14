"""Interpolate-then-classify dense mapping from sparse geotagged feature vectors."""

from ._native import BACKEND
from .core import (
    Bounds,
    DenseGrid,
    GeoPoint,
    GridGeometry,
    LabeledSample,
    Region,
    RegionPartition,
    euclid_dist,
    grid_cells,
    rasterize_partition,
    region_of,
)
from .errors import (
    DimensionMismatch,
    EmptySamples,
    GeometryMismatch,
    InvalidInput,
    MorphkernError,
    RejectionOverflow,
    SingularSystem,
    TooFewSamples,
)
from .evaluate import EvalReport, LinearClassifier, classify, dense_classify, evaluate, miou, noise_pct
from .interp import (
    InterpolationDiagnostics,
    InterpolatorSpec,
    dense_feature_map,
    idw_interpolate,
    nw_interpolate,
    tune_bandwidth_loocv,
)
from .io import (
    read_class_raster,
    read_classifier,
    read_feature_raster,
    read_regions,
    read_samples,
    write_class_raster,
    write_classifier,
    write_feature_raster,
    write_regions,
    write_samples,
)
from .kernels import Bandwidth, MorphOperator, build_morph_operator, gaussian_kernel, kernel_matrix, morphed_kernel
from .laplacian import LaplacianMatrix, NodeSet, build_adjacency, build_laplacian, build_mesh_nodes

__version__ = "0.1.0"
