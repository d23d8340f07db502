"""estimates.py

Monte Carlo Estimates with Exact, Associative Merging, Paired Ratios and
Total-Variation Distances Between Empirical Laws

"""
import logging
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

logger = logging.getLogger(__name__)


def _exact_sum(values):
    values = np.asarray(values)
    if values.dtype.kind in "biu":
        return int(values.astype(np.int64).sum()), int((values.astype(np.int64) ** 2).sum())
    values = values.astype(float)
    return math.fsum(values), math.fsum(values * values)


@dataclass(frozen=True)
class Estimate:
    """
    Sample Mean with Standard Error, Stored as Running Sums

    Integer-valued samples keep integer sums, so merging shards reproduces a
    single-pass estimate bit for bit.
    """

    total: float
    total_sq: float
    n: int
    seed: int = None
    params: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_samples(cls, samples, seed=None, params=None):
        """Estimate of the Mean of a Sample Array"""
        samples = np.asarray(samples)
        if samples.size == 0:
            raise ValueError("cannot estimate from zero samples")
        total, total_sq = _exact_sum(samples.ravel())
        return cls(total, total_sq, int(samples.size), seed, dict(params or {}))

    @property
    def mean(self):
        return self.total / self.n

    @property
    def variance(self):
        """Population Variance of the Samples"""
        n = self.n
        return max((n * self.total_sq - self.total * self.total) / (n * n), 0.0)

    @property
    def stderr(self):
        return math.sqrt(self.variance / self.n)

    def interval(self, level=0.95):
        half = stats.norm.ppf(0.5 + level / 2.0) * self.stderr
        return self.mean - half, self.mean + half

    def merge(self, other):
        """Pools Two Shards of the Same Run"""
        if self.seed != other.seed:
            raise ValueError(f"cannot merge estimates with seeds {self.seed} and {other.seed}")
        return Estimate(
            self.total + other.total,
            self.total_sq + other.total_sq,
            self.n + other.n,
            self.seed,
            {**other.params, **self.params},
        )

    def to_row(self):
        row = dict(self.params)
        row.update(
            mean=self.mean,
            stderr=self.stderr,
            n=self.n,
            seed=self.seed,
            total=self.total,
            total_sq=self.total_sq,
        )
        return row

    @classmethod
    def from_row(cls, row, params=()):
        total, total_sq = row["total"], row["total_sq"]
        if float(total).is_integer() and float(total_sq).is_integer():
            total, total_sq = int(total), int(total_sq)
        seed = row.get("seed")
        seed = None if seed is None or (isinstance(seed, float) and math.isnan(seed)) else int(seed)
        return cls(total, total_sq, int(row["n"]), seed, {key: row[key] for key in params})


@dataclass(frozen=True)
class RatioEstimate:
    """
    Ratio of Two Means Measured on the Same Samples, with a Delta-Method Error
    """

    sx: float
    sy: float
    sxx: float
    syy: float
    sxy: float
    n: int
    seed: int = None
    params: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_samples(cls, x, y, seed=None, params=None):
        x, y = np.asarray(x), np.asarray(y)
        if x.shape != y.shape or x.size == 0:
            raise ValueError("paired ratio needs two equally long non-empty sample arrays")
        sx, sxx = _exact_sum(x)
        sy, syy = _exact_sum(y)
        if x.dtype.kind in "biu" and y.dtype.kind in "biu":
            sxy = int((x.astype(np.int64) * y.astype(np.int64)).sum())
        else:
            sxy = math.fsum(x.astype(float) * y.astype(float))
        return cls(sx, sy, sxx, syy, sxy, int(x.size), seed, dict(params or {}))

    @property
    def numerator(self):
        return Estimate(self.sx, self.sxx, self.n, self.seed, self.params)

    @property
    def denominator(self):
        return Estimate(self.sy, self.syy, self.n, self.seed, self.params)

    @property
    def value(self):
        if self.sy == 0:
            return float("nan")
        return self.sx / self.sy

    @property
    def stderr(self):
        n = self.n
        mx, my = self.sx / n, self.sy / n
        if my == 0 or mx == 0:
            return float("nan")
        vx = max(self.sxx / n - mx * mx, 0.0)
        vy = max(self.syy / n - my * my, 0.0)
        cxy = self.sxy / n - mx * my
        rel = vx / (mx * mx) + vy / (my * my) - 2.0 * cxy / (mx * my)
        return abs(self.value) * math.sqrt(max(rel, 0.0) / n)

    def merge(self, other):
        if self.seed != other.seed:
            raise ValueError(f"cannot merge estimates with seeds {self.seed} and {other.seed}")
        return RatioEstimate(
            self.sx + other.sx,
            self.sy + other.sy,
            self.sxx + other.sxx,
            self.syy + other.syy,
            self.sxy + other.sxy,
            self.n + other.n,
            self.seed,
            {**other.params, **self.params},
        )

    def to_row(self):
        row = dict(self.params)
        row.update(ratio=self.value, stderr=self.stderr, n=self.n, seed=self.seed)
        return row


def independent_ratio(num, den):
    """Ratio of Two Independent Estimates, Delta-Method Standard Error"""
    if den.mean == 0 or num.mean == 0:
        return float("nan"), float("nan")
    value = num.mean / den.mean
    rel = (num.stderr / num.mean) ** 2 + (den.stderr / den.mean) ** 2
    return value, abs(value) * math.sqrt(rel)


def tv_distance(x, y):
    """Total Variation Distance Between the Empirical Laws of Two Key Sequences"""
    px, py = Counter(x), Counter(y)
    nx, ny = sum(px.values()), sum(py.values())
    if not nx or not ny:
        raise ValueError("total variation needs two non-empty samples")
    return 0.5 * sum(abs(px[key] / nx - py[key] / ny) for key in set(px) | set(py))


@dataclass(frozen=True)
class TVEstimate:
    """Plug-In Total Variation with Bootstrap Error and Permutation Null Level"""

    value: float
    stderr: float
    null_mean: float
    null_stderr: float
    n_x: int
    n_y: int

    @property
    def excess(self):
        """Distance Above the Level Expected Between Two Samples of One Law"""
        return self.value - self.null_mean

    def to_row(self):
        return {
            "tv": self.value,
            "tv_stderr": self.stderr,
            "tv_null": self.null_mean,
            "tv_null_stderr": self.null_stderr,
            "tv_excess": self.excess,
            "n_a": self.n_x,
            "n_b": self.n_y,
        }


def tv_estimate(x, y, seed, n_boot=200):
    """Total Variation Between Two Samples with Resampling Diagnostics

    Parameters
    ----------
    x, y : sequence of hashable
        Fingerprints Under the Two Conditionings
    seed : int
        Seed for the Resampling
    n_boot : int
        Bootstrap and Permutation Replicates

    Returns
    -------
    TVEstimate
    """
    x, y = list(x), list(y)
    value = tv_distance(x, y)
    rng = np.random.default_rng(seed)
    boot = np.empty(n_boot)
    null = np.empty(n_boot)
    pooled = x + y
    for i in range(n_boot):
        bx = [x[j] for j in rng.integers(0, len(x), len(x))]
        by = [y[j] for j in rng.integers(0, len(y), len(y))]
        boot[i] = tv_distance(bx, by)
        perm = rng.permutation(len(pooled))
        null[i] = tv_distance([pooled[j] for j in perm[: len(x)]], [pooled[j] for j in perm[len(x):]])
    return TVEstimate(value, float(boot.std()), float(null.mean()), float(null.std()), len(x), len(y))
