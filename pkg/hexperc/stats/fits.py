"""fits.py

Weighted Least-Squares Power-Law Fits of Estimates Across Scales

"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

logger = logging.getLogger(__name__)

CONFIDENCE_Z = 1.96
CURVATURE_P_VALUE = 0.01


@dataclass
class FitResult:
    slope: float
    half_width: float
    intercept: float
    chi2: float
    dropped: list = field(default_factory=list)

    @property
    def interval(self):
        return self.slope - self.half_width, self.slope + self.half_width

    def covers(self, value, tolerance=0.0):
        """Whether value Lies Within the Interval Widened by tolerance"""
        return abs(self.slope - value) <= self.half_width + tolerance

    def to_json(self):
        return {
            "slope": self.slope,
            "half_width": self.half_width,
            "intercept": self.intercept,
            "chi2": self.chi2,
            "dropped": [float(s) for s in self.dropped],
        }


def _line_fit(x, y, sigma):
    """Slope, Slope Variance, Intercept and Chi-Square of a Straight-Line Fit"""
    if np.any(sigma <= 0):
        design = np.column_stack((x, np.ones_like(x)))
        (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
        residuals = y - (slope * x + intercept)
        dof = max(len(x) - 2, 1)
        sxx = np.sum((x - x.mean()) ** 2)
        var = float(np.sum(residuals**2) / dof / sxx)
        return float(slope), var, float(intercept), 0.0
    w = 1.0 / sigma**2
    sw, swx, swy = w.sum(), (w * x).sum(), (w * y).sum()
    swxx, swxy = (w * x * x).sum(), (w * x * y).sum()
    det = sw * swxx - swx**2
    slope = (sw * swxy - swx * swy) / det
    intercept = (swxx * swy - swx * swxy) / det
    chi2 = float(np.sum(w * (y - slope * x - intercept) ** 2))
    return float(slope), float(sw / det), float(intercept), chi2


def fit_power_law(scales, values, errors):
    """Fits values ~ C * scales**slope on Log-Log Axes

    Parameters
    ----------
    scales : array_like
        Positive Scales, Sorted or Not
    values : array_like
        Positive Measured Values
    errors : array_like
        Standard Errors of the Values

    Returns
    -------
    FitResult
        Slope With 95% Half-Width; When Curvature Shows in the Chi-Square the
        Coarsest Scales Are Dropped, Down to Three Points
    """
    scales = np.asarray(scales, dtype=float)
    values = np.asarray(values, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if len(scales) < 3:
        raise ValueError("exponent fits need at least 3 scales")
    if np.any(values <= 0) or np.any(scales <= 0):
        raise ValueError("exponent fits need positive scales and estimates")
    order = np.argsort(scales)
    scales, values, errors = scales[order], values[order], errors[order]
    dropped = []
    while True:
        x, y, sigma = np.log(scales), np.log(values), errors / values
        slope, var, intercept, chi2 = _line_fit(x, y, sigma)
        dof = len(x) - 2
        if len(x) >= 4 and chi2 > 0 and stats.chi2.sf(chi2, dof) < CURVATURE_P_VALUE:
            logger.info(
                "fit: chi2 %.3g on %d dof, dropping coarsest scale %g", chi2, dof, scales[-1]
            )
            dropped.append(scales[-1])
            scales, values, errors = scales[:-1], values[:-1], errors[:-1]
            continue
        return FitResult(slope, CONFIDENCE_Z * math.sqrt(var), intercept, chi2, dropped)


def fit_exponent(points):
    """Exponent of a Ladder of Estimates

    Parameters
    ----------
    points : list of (float, Estimate)
        Scale and Estimate at That Scale

    Returns
    -------
    FitResult
    """
    if len(points) < 3:
        raise ValueError("exponent fits need at least 3 scales")
    scales = [scale for scale, _ in points]
    means = [est.mean for _, est in points]
    if any(m <= 0 for m in means):
        raise ValueError("exponent fits need positive estimates")
    return fit_power_law(scales, means, [est.stderr for _, est in points])
