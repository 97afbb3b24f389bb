"""Unsupervised binary segmentation by continuous max-flow with estimated capacities."""

from .capacity import (
    CapacityFields,
    PriorConfig,
    mrf_multiplier,
    sink_capacity_update,
    source_capacity_update,
    spatial_capacity_update,
)
from .errors import (
    CorruptFile,
    EmptyImage,
    EmptyMask,
    InvalidSpec,
    IoFailure,
    MaxflowSegError,
    NumericalDivergence,
    ShapeMismatch,
    UnsupportedFormat,
)
from .grid import box_neighborhood_sum, divergence, gradient, neighborhood_count
from .metrics import dice, hausdorff95
from .segmenter import (
    SegmentationResult,
    SegmenterConfig,
    energy,
    foreground_mask,
    initialize,
    segment,
    threshold_mask,
)
from .solver import FlowState, InnerDiagnostics, InnerSolverConfig, solve_inner

__version__ = "0.1.0"

__all__ = [
    "CapacityFields",
    "CorruptFile",
    "EmptyImage",
    "EmptyMask",
    "FlowState",
    "InnerDiagnostics",
    "InnerSolverConfig",
    "InvalidSpec",
    "IoFailure",
    "MaxflowSegError",
    "NumericalDivergence",
    "PriorConfig",
    "SegmentationResult",
    "SegmenterConfig",
    "ShapeMismatch",
    "UnsupportedFormat",
    "box_neighborhood_sum",
    "dice",
    "divergence",
    "energy",
    "foreground_mask",
    "gradient",
    "hausdorff95",
    "initialize",
    "mrf_multiplier",
    "neighborhood_count",
    "segment",
    "sink_capacity_update",
    "solve_inner",
    "source_capacity_update",
    "spatial_capacity_update",
    "threshold_mask",
]
