"""Entropy-guided demonstration curation.

Estimate per-frame conditional action entropy from sampled chunks,
segment trajectories into precision and casualness regions, and build
accelerated training sets by entropy-guided piecewise downsampling.
"""

from .accelerator import (
    AccelerationConfig,
    AcceleratedDataset,
    AcceleratedSample,
    SpeedupStats,
    accelerate_dataset,
    awe_star_indices,
    constant_indices,
    contact_labeling,
    piecewise_indices,
    recommended_chunk,
    speedup_stats,
)
from .entropy import (
    ActionSampleSet,
    EntropyConfig,
    EntropySeries,
    frame_entropy,
    kde_density,
    pool_samples,
    read_entropy_csv,
    silverman_bandwidth,
    trajectory_entropy,
    write_entropy_csv,
)
from .hdbscan import NOISE, ClusterLabels, HdbscanParams, default_min_cluster_size, hdbscan
from .isolation_forest import IsolationForestParams, isolation_scores
from .model import (
    ActionChunk,
    ContactEvent,
    Dataset,
    DatasetFormatError,
    Trajectory,
    ValidationReport,
    chunk_at,
    load_dataset,
    validate,
    write_dataset,
)
from .samplers import FileSampler, ProxySampler, SyntheticSampler
from .segmenter import (
    PointSet,
    PrecisionLabeling,
    clean_outliers,
    normalize,
    precision_label,
    read_labels,
    segment,
    write_labels,
)
from .testkit import (
    GroundTruth,
    NoiseProfile,
    analytic_gaussian_entropy,
    brute_force_awe,
    generate,
    generate_dataset,
)

__version__ = "0.1.0"

__all__ = [
    "AccelerationConfig",
    "AcceleratedDataset",
    "AcceleratedSample",
    "ActionChunk",
    "ActionSampleSet",
    "ClusterLabels",
    "ContactEvent",
    "Dataset",
    "DatasetFormatError",
    "EntropyConfig",
    "EntropySeries",
    "FileSampler",
    "GroundTruth",
    "HdbscanParams",
    "IsolationForestParams",
    "NOISE",
    "NoiseProfile",
    "PointSet",
    "PrecisionLabeling",
    "ProxySampler",
    "SpeedupStats",
    "SyntheticSampler",
    "Trajectory",
    "ValidationReport",
    "accelerate_dataset",
    "analytic_gaussian_entropy",
    "awe_star_indices",
    "brute_force_awe",
    "chunk_at",
    "clean_outliers",
    "constant_indices",
    "contact_labeling",
    "default_min_cluster_size",
    "frame_entropy",
    "generate",
    "generate_dataset",
    "hdbscan",
    "isolation_scores",
    "kde_density",
    "load_dataset",
    "normalize",
    "piecewise_indices",
    "pool_samples",
    "precision_label",
    "read_entropy_csv",
    "read_labels",
    "recommended_chunk",
    "segment",
    "silverman_bandwidth",
    "speedup_stats",
    "trajectory_entropy",
    "validate",
    "write_dataset",
    "write_entropy_csv",
    "write_labels",
]
