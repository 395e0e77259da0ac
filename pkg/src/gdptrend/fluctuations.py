"""Pooled increment residuals and their distribution diagnostics.

Residuals from all countries are pooled, binned into fixed-width
histograms (default width 200 currency units, bin centers at integer
multiples of the width so that 0 is a bin center), and compared against
a normal distribution with the pool's own mean and standard deviation.
A Pearson chi-square statistic quantifies the fit and a tail-excess
ratio flags heavier-than-normal tails.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .numerics import chi_square_sf, normal_cdf
from .trendlab import IncrementSeries, mean_increment


class Centering(Enum):
    PER_COUNTRY_MEAN_SUBTRACTED = "PER_COUNTRY_MEAN_SUBTRACTED"
    UNCENTERED = "UNCENTERED"


@dataclass(frozen=True)
class ResidualPool:
    """Pooled (country, year, value) residuals.

    With PER_COUNTRY_MEAN_SUBTRACTED centering each country's own mean
    increment has been removed, so its residuals sum to zero; with
    UNCENTERED the raw increments are pooled.
    """

    residuals: tuple
    centering: Centering

    @property
    def n(self) -> int:
        return len(self.residuals)

    def values(self) -> np.ndarray:
        return np.array([v for _, _, v in self.residuals], dtype=float)

    def mean(self) -> float:
        if not self.residuals:
            raise ValueError("empty pool has no mean")
        return float(self.values().mean())

    def countries(self) -> list:
        return sorted({c for c, _, _ in self.residuals})


def pool_residuals(analyses: Iterable[IncrementSeries],
                   centering: Centering = Centering.PER_COUNTRY_MEAN_SUBTRACTED
                   ) -> ResidualPool:
    """Concatenate per-country residuals into one pool.

    When centered, each country's own mean increment is subtracted from
    its increments before pooling; when uncentered, increments are
    pooled as they are.
    """
    analyses = list(analyses)
    if not analyses:
        raise ValueError("need at least one country to pool")
    residuals = []
    for inc in analyses:
        offset = (mean_increment(inc)
                  if centering is Centering.PER_COUNTRY_MEAN_SUBTRACTED
                  else 0.0)
        for year, (_, d) in zip(inc.years(), inc.pairs):
            residuals.append((inc.country, year, d - offset))
    return ResidualPool(residuals=tuple(residuals), centering=centering)


def subset_pool(analyses: Iterable[IncrementSeries], excluded,
                centering: Centering = Centering.UNCENTERED) -> ResidualPool:
    """Pool only the countries not in ``excluded``.

    ``excluded`` must be a subset of the analyzed countries and must not
    remove all of them. The default uncentered mode leaves the pooled
    mean (see ``ResidualPool.mean``) as the headline statistic.
    """
    analyses = list(analyses)
    have = {a.country for a in analyses}
    excluded = set(excluded)
    unknown = sorted(excluded - have)
    if unknown:
        raise ValueError(f"excluded countries not in the panel: {unknown}")
    kept = [a for a in analyses if a.country not in excluded]
    if not kept:
        raise ValueError("exclusion removes every country")
    return pool_residuals(kept, centering=centering)


@dataclass(frozen=True)
class Histogram:
    """Equal-width bins with centers at integer multiples of the width.

    Bin k covers [k*width - width/2, k*width + width/2), left-closed and
    right-open, so every residual lands in exactly one bin and 0 is a
    bin center. Centers run contiguously from the lowest to the highest
    occupied bin; interior bins may hold zero counts.
    """

    width: float
    centers: tuple
    counts: tuple

    @property
    def n(self) -> int:
        return int(sum(self.counts))

    def edges(self) -> list:
        """(lo, hi) edge pairs, one per bin."""
        half = self.width / 2.0
        return [(c - half, c + half) for c in self.centers]


def histogram(pool: ResidualPool, width: float = 200.0) -> Histogram:
    """Bin the pooled residuals into fixed-width bins."""
    if width <= 0:
        raise ValueError(f"bin width must be positive, got {width}")
    if pool.n == 0:
        raise ValueError("cannot histogram an empty pool")
    values = pool.values()
    idx = np.floor((values + width / 2.0) / width).astype(np.int64)
    k_min, k_max = int(idx.min()), int(idx.max())
    counts = np.bincount(idx - k_min, minlength=k_max - k_min + 1)
    centers = tuple(k * width for k in range(k_min, k_max + 1))
    return Histogram(width=width, centers=centers,
                     counts=tuple(int(c) for c in counts))


def normal_fit(pool: ResidualPool):
    """Sample mean and population standard deviation (divide by n)."""
    if pool.n < 2:
        raise ValueError(f"need at least 2 residuals to fit, got {pool.n}")
    values = pool.values()
    mu = float(values.mean())
    sigma = float(np.sqrt(np.mean((values - mu) ** 2)))
    if sigma == 0.0:
        raise ValueError("residuals are all equal; normal fit is degenerate")
    return mu, sigma


def expected_counts(fit, bins: Histogram, n: int) -> list:
    """Per-bin expected counts under the fitted normal.

    n * (Phi((hi - mu)/sigma) - Phi((lo - mu)/sigma)) for each bin; the
    total falls short of n by exactly the fitted mass outside the binned
    range.
    """
    mu, sigma = fit
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    out = []
    for lo, hi in bins.edges():
        p = normal_cdf((hi - mu) / sigma) - normal_cdf((lo - mu) / sigma)
        out.append(n * p)
    return out


def _merge_sparse_bins(observed, expected, min_expected: float = 5.0):
    """Pool bins until every merged bin expects at least ``min_expected``.

    Tail bins are folded inward from each end first; any interior
    stragglers are then merged into their right neighbor. Deterministic.
    """
    obs = [float(o) for o in observed]
    exp = [float(e) for e in expected]
    while len(exp) > 1 and exp[0] < min_expected:
        exp[1] += exp[0]
        obs[1] += obs[0]
        del exp[0], obs[0]
    while len(exp) > 1 and exp[-1] < min_expected:
        exp[-2] += exp[-1]
        obs[-2] += obs[-1]
        del exp[-1], obs[-1]
    i = 0
    while i < len(exp):
        if exp[i] < min_expected and len(exp) > 1:
            j = i + 1 if i + 1 < len(exp) else i - 1
            exp[j] += exp[i]
            obs[j] += obs[i]
            del exp[i], obs[i]
            i = 0  # rescan; merges can re-expose small bins
        else:
            i += 1
    return obs, exp


def gof_chi_square(observed: Sequence[float], expected: Sequence[float]):
    """Pearson goodness-of-fit against the fitted normal.

    Bins expecting fewer than 5 are pooled first. Degrees of freedom are
    merged_bins - 3 (two fitted parameters plus the normalization);
    fewer than 4 merged bins leave no degrees of freedom and raise.
    Returns (statistic, dof, p_value).
    """
    if len(observed) != len(expected):
        raise ValueError(f"observed and expected lengths differ: "
                         f"{len(observed)} vs {len(expected)}")
    obs, exp = _merge_sparse_bins(observed, expected)
    if len(exp) < 4:
        raise ValueError(f"only {len(exp)} merged bins; need at least 4 "
                         f"for a chi-square test")
    stat = float(sum((o - e) ** 2 / e for o, e in zip(obs, exp)))
    dof = len(exp) - 3
    return stat, dof, chi_square_sf(stat, dof)


@dataclass(frozen=True)
class TailReport:
    """Counts beyond k fitted standard deviations vs the normal
    prediction. ratio is inf when the prediction underflows to zero
    while observations remain, nan when both are zero."""

    k: float
    observed: int
    expected: float

    @property
    def ratio(self) -> float:
        if self.expected > 0.0:
            return self.observed / self.expected
        return math.inf if self.observed > 0 else math.nan


def tail_excess(pool: ResidualPool, fit, k: float = 3.0) -> TailReport:
    """Count residuals with |r - mu| > k*sigma against n*2*(1 - Phi(k))."""
    mu, sigma = fit
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if k < 0:
        raise ValueError(f"k must be nonnegative, got {k}")
    values = pool.values()
    observed = int(np.count_nonzero(np.abs(values - mu) > k * sigma))
    expected = pool.n * 2.0 * (1.0 - normal_cdf(k))
    return TailReport(k=k, observed=observed, expected=expected)


@dataclass(frozen=True)
class DistributionSummary:
    """Histogram, normal fit, goodness of fit, and tail diagnostics."""

    bin_width: float
    bin_centers: tuple
    counts: tuple
    fit_mu: float
    fit_sigma: float
    expected_counts: tuple
    chi_square: float
    dof: int
    p_value: float
    tail_report: TailReport

    @property
    def n(self) -> int:
        return int(sum(self.counts))


def summarize(pool: ResidualPool, width: float = 200.0,
              tail_k: float = 3.0) -> DistributionSummary:
    """Run the full distribution pipeline on one pool."""
    bins = histogram(pool, width=width)
    fit = normal_fit(pool)
    exp = expected_counts(fit, bins, pool.n)
    stat, dof, p = gof_chi_square(bins.counts, exp)
    tail = tail_excess(pool, fit, k=tail_k)
    return DistributionSummary(bin_width=width, bin_centers=bins.centers,
                               counts=bins.counts, fit_mu=fit[0],
                               fit_sigma=fit[1], expected_counts=tuple(exp),
                               chi_square=stat, dof=dof, p_value=p,
                               tail_report=tail)


def emit_distribution_csv(summary: DistributionSummary) -> str:
    """CSV with columns bin_center,observed,expected."""
    lines = ["bin_center,observed,expected"]
    for c, o, e in zip(summary.bin_centers, summary.counts,
                       summary.expected_counts):
        lines.append(f"{c!r},{o},{e!r}")
    return "\n".join(lines) + "\n"


def distribution_json_dict(summary: DistributionSummary, **extra) -> dict:
    """JSON-ready document with fit, chi-square triple, and tail report.

    Keyword extras (variant labels, basis tags) are merged in; the tail
    ratio is serialized as the string "inf"/"nan" when not finite.
    """
    tail = summary.tail_report
    ratio = tail.ratio
    doc = {
        "n": summary.n,
        "bin_width": summary.bin_width,
        "fit": {"mu": summary.fit_mu, "sigma": summary.fit_sigma},
        "chi_square": {"statistic": summary.chi_square, "dof": summary.dof,
                       "p_value": summary.p_value},
        "tail": {"k": tail.k, "observed": tail.observed,
                 "expected": tail.expected,
                 "ratio": ratio if math.isfinite(ratio) else
                 ("inf" if math.isinf(ratio) else "nan")},
        "bins": [{"center": c, "observed": o, "expected": e}
                 for c, o, e in zip(summary.bin_centers, summary.counts,
                                    summary.expected_counts)],
    }
    doc.update(extra)
    return doc


def distribution_json(summary: DistributionSummary, **extra) -> str:
    return json.dumps(distribution_json_dict(summary, **extra),
                      sort_keys=True, indent=2) + "\n"
