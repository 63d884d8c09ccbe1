"""Accuracy of simplified interference models against the physical model."""
from __future__ import annotations

from . import analytic, geometry, interference, propagation, similarity
from .interference import IBM, PHYM, PRM, TIM, ModelSpec, SinrPair
from .similarity import ErrorStats, IndexResult, OutageCounts, error_probs, similarity_index

__all__ = [
    "analytic", "geometry", "interference", "propagation", "similarity",
    "IBM", "PHYM", "PRM", "TIM", "ModelSpec", "SinrPair",
    "ErrorStats", "IndexResult", "OutageCounts", "error_probs", "similarity_index",
]
__version__ = "0.1.0"
