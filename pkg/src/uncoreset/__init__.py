"""Coresets for uncertain (indecisive) point sets under range queries."""

from .artifact import CoresetArtifact, RoundRecord
from .coresets import (
    MergeReduceParams,
    RqParams,
    SampleParams,
    UnsupportedFamilyError,
    build_rc_disc,
    build_rc_sample,
    build_re_disc,
    build_re_sample,
    build_rq,
    coreset_size,
    rq_alpha,
)
from .discrepancy import Coloring, eval_disc, exhaustive_coloring, find_coloring
from .io import read_points, write_points
from .model import UncertainPoint, UncertainPointSet, canonical_traversal, certify
from .permutations import PermutationSystem, canonical_permutation_system, level_permutation_system
from .queries import CdfTable, brute_force_cdf, expected_fraction, rc_fraction, rq_cdf
from .ranges import FamilyDescriptor, HalfLine, Interval, Rect, canonical_ranges
from .verify import measure_rc_error, measure_re_error, quantization_check, variance_report

__version__ = "0.1.0"

__all__ = [
    "CdfTable",
    "Coloring",
    "CoresetArtifact",
    "FamilyDescriptor",
    "HalfLine",
    "Interval",
    "MergeReduceParams",
    "PermutationSystem",
    "Rect",
    "RoundRecord",
    "RqParams",
    "SampleParams",
    "UncertainPoint",
    "UncertainPointSet",
    "UnsupportedFamilyError",
    "brute_force_cdf",
    "build_rc_disc",
    "build_rc_sample",
    "build_re_disc",
    "build_re_sample",
    "build_rq",
    "canonical_permutation_system",
    "canonical_ranges",
    "canonical_traversal",
    "certify",
    "coreset_size",
    "eval_disc",
    "exhaustive_coloring",
    "expected_fraction",
    "find_coloring",
    "level_permutation_system",
    "measure_rc_error",
    "measure_re_error",
    "quantization_check",
    "rc_fraction",
    "read_points",
    "rq_alpha",
    "rq_cdf",
    "variance_report",
    "write_points",
]
