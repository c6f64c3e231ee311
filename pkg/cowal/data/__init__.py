"""
Data Package

Domain types, manifest parsing and artifact I/O
"""

from .types import (
    ALCurve,
    ALState,
    DatasetManifest,
    EmbeddingMatrix,
    FrameRef,
    LabelMask,
    ProbabilityMap,
    VideoEntry,
    middle_frame,
)
from .manifest import parse_manifest, write_manifest
from .io import (
    read_matrix,
    write_matrix,
    read_prob_map,
    write_prob_map,
    read_mask,
    write_mask,
    read_curve_csv,
    write_curve_csv,
)

__all__ = [
    "ALCurve",
    "ALState",
    "DatasetManifest",
    "EmbeddingMatrix",
    "FrameRef",
    "LabelMask",
    "ProbabilityMap",
    "VideoEntry",
    "middle_frame",
    "parse_manifest",
    "write_manifest",
    "read_matrix",
    "write_matrix",
    "read_prob_map",
    "write_prob_map",
    "read_mask",
    "write_mask",
    "read_curve_csv",
    "write_curve_csv",
]
