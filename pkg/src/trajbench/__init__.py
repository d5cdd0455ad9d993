"""trajbench: trajectory-privacy benchmarking toolkit.

Ingestion of raw trajectory corpora into a canonical representation, baseline
differentially private release mechanisms, empirical privacy auditing, and a
utility metric suite for comparing real against synthesized trajectory data.
"""

__version__ = "0.1.0"

from trajbench.core.types import (
    BoundingBox,
    GeoPoint,
    NormalizationParams,
    Trajectory,
    TrajectoryDataset,
)
from trajbench.core.geo import EARTH_RADIUS_M, haversine
from trajbench.core.normalize import compute_normalization, denormalize, normalize
from trajbench.core.preprocess import PreprocessConfig, preprocess_geolife

__all__ = [
    "BoundingBox",
    "EARTH_RADIUS_M",
    "GeoPoint",
    "NormalizationParams",
    "PreprocessConfig",
    "Trajectory",
    "TrajectoryDataset",
    "__version__",
    "compute_normalization",
    "denormalize",
    "haversine",
    "normalize",
    "preprocess_geolife",
]
