"""
Curve Metrics

Area under the AL curve, median curves across runs and a paired sign test
"""

from __future__ import annotations

import logging
from typing import Sequence

import numpy as np
from scipy.integrate import trapezoid
from scipy.spatial.distance import pdist
from scipy.stats import binomtest

from ..data.types import ALCurve
from ..errors import (
    EmptyInput,
    MismatchedGrids,
    NonPositiveReference,
    ShapeMismatch,
    TooFewCurvePoints,
)

logger = logging.getLogger(__name__)


def aualc(curve: ALCurve) -> float:
    """
    Trapezoidal area under (step, dice), as a fraction of the area a method
    scoring full_data_dice at every step would reach

    Raises:
        TooFewCurvePoints: Fewer than two points
        NonPositiveReference: full_data_dice <= 0
    """
    if len(curve.points) < 2:
        raise TooFewCurvePoints(f"AuALC needs at least 2 points, got {len(curve.points)}")
    if not curve.full_data_dice > 0:
        raise NonPositiveReference(f"full-data DICE must be positive, got {curve.full_data_dice}")
    steps = np.asarray(curve.steps, dtype=np.float64)
    area = float(trapezoid(np.asarray(curve.scores, dtype=np.float64), steps))
    value = area / (curve.full_data_dice * (steps[-1] - steps[0]))
    if value > 1.0:
        logger.info("AuALC %.4f exceeds 1: the curve beats full-data training", value)
    return value


def summarize(curves: Sequence[ALCurve]) -> ALCurve:
    """Per-step median across runs; the reference is the median reference"""
    if not curves:
        raise EmptyInput("no curves to summarize")
    grid = curves[0].steps
    for curve in curves[1:]:
        if curve.steps != grid:
            raise MismatchedGrids(f"run curves disagree on steps: {curve.steps} vs {grid}")
    scores = np.median(np.array([c.scores for c in curves]), axis=0)
    reference = float(np.median([c.full_data_dice for c in curves]))
    return ALCurve(points=tuple(zip(grid, scores.tolist())), full_data_dice=reference)


def sign_test(a: Sequence[float], b: Sequence[float]) -> float:
    """
    One-sided paired sign test that a tends to exceed b

    Ties are dropped. Returns 1.0 when every pair ties.
    """
    if len(a) != len(b):
        raise ShapeMismatch(f"sign test needs paired samples, got {len(a)} and {len(b)}")
    diff = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    wins = int(np.sum(diff > 0))
    trials = wins + int(np.sum(diff < 0))
    if trials == 0:
        return 1.0
    return float(binomtest(wins, trials, 0.5, alternative="greater").pvalue)


def min_pairwise_distance(points: np.ndarray) -> float:
    """Smallest Euclidean distance between two rows; inf for fewer than two rows"""
    points = np.asarray(points, dtype=np.float64)
    if len(points) < 2:
        return float("inf")
    return float(pdist(points).min())
