"""Utility metric suite: point-set, gridded and trajectory-level comparisons."""

from trajbench.metrics.grid import GridSpec, Histogram2D, histogram_from_dataset, histogram_from_points
from trajbench.metrics.point import (
    hausdorff_points,
    hd_wd_pathology_demo,
    hotspot_preservation,
    jsd_histogram,
    range_query_error,
    subsample_equal,
    wasserstein,
)
from trajbench.metrics.traj import (
    Matching,
    distribution_distance,
    dtw,
    hausdorff_traj,
    match_closest,
    segment_length_distribution,
    travelled_distance_distribution,
)

__all__ = [
    "GridSpec",
    "Histogram2D",
    "Matching",
    "distribution_distance",
    "dtw",
    "hausdorff_points",
    "hausdorff_traj",
    "hd_wd_pathology_demo",
    "histogram_from_dataset",
    "histogram_from_points",
    "hotspot_preservation",
    "jsd_histogram",
    "match_closest",
    "range_query_error",
    "segment_length_distribution",
    "subsample_equal",
    "travelled_distance_distribution",
    "wasserstein",
]
