"""Similarity metrics, speckle correlation studies, and report emission."""

from .metrics import jaccard, pcc, spearman
from .correlation import CorrelationStudy, cross_correlation_map, decorrelation_study
from .activations import activation_similarity
from .report import MetricReport, MetricRow, emit_report, overlay_masks

__all__ = [
    "pcc",
    "jaccard",
    "spearman",
    "CorrelationStudy",
    "decorrelation_study",
    "cross_correlation_map",
    "activation_similarity",
    "MetricReport",
    "MetricRow",
    "emit_report",
    "overlay_masks",
]
