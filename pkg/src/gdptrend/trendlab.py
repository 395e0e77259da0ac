"""Annual increments and their cross-country statistics.

The increment for year t is G(t) - G(t-1), paired with the attained
level G(t-1) it grew from. The mean increment estimates the constant
trend; the OLS fit of increment on attained level measures how far a
country departs from that constant-increment picture (an exactly linear
series has slope 0 and intercept equal to the increment).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .correction import CorrectedSeries
from .datastore import AnnualSeries


@dataclass(frozen=True)
class IncrementSeries:
    """Per-year (attained_level, increment) pairs for one country.

    ``pairs[i]`` belongs to year ``first_year + i`` and holds
    (G(year-1), G(year) - G(year-1)). A series of n levels yields n-1
    pairs, and the increments telescope to G(last) - G(first).
    """

    country: str
    first_year: int
    pairs: tuple

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(tuple(p) for p in self.pairs))

    @property
    def n(self) -> int:
        return len(self.pairs)

    def years(self) -> range:
        return range(self.first_year, self.first_year + self.n)

    def levels(self) -> np.ndarray:
        return np.array([p[0] for p in self.pairs], dtype=float)

    def increments(self) -> np.ndarray:
        return np.array([p[1] for p in self.pairs], dtype=float)


@dataclass(frozen=True)
class TrendFit:
    """OLS of increment on attained level.

    mean_increment is the trend estimate; slope is dimensionless
    (currency per currency) and intercept shares the increment's units.
    """

    mean_increment: float
    intercept: float
    slope: float
    n: int


def _as_series(series) -> AnnualSeries:
    if isinstance(series, CorrectedSeries):
        return series.as_series()
    if isinstance(series, AnnualSeries):
        return series
    raise TypeError(f"expected AnnualSeries or CorrectedSeries, "
                    f"got {type(series).__name__}")


def increments(series) -> IncrementSeries:
    """Year-over-year increments paired with the prior year's level.

    Accepts an AnnualSeries or a CorrectedSeries (the corrected values
    are used). The series must be complete and at least two years long.
    """
    s = _as_series(series)
    if not s.is_complete:
        raise ValueError(f"{s.country}: series has unfilled gaps")
    if len(s) < 2:
        raise ValueError(f"{s.country}: need at least 2 years to form "
                         f"increments, got {len(s)}")
    pairs = tuple((s.values[i], s.values[i + 1] - s.values[i])
                  for i in range(len(s) - 1))
    return IncrementSeries(country=s.country, first_year=s.start_year + 1,
                           pairs=pairs)


def mean_increment(inc: IncrementSeries) -> float:
    """Arithmetic mean of the increments; telescopes to
    (G_last - G_first) / n."""
    if inc.n < 1:
        raise ValueError(f"{inc.country}: no increments to average")
    return float(np.mean(inc.increments()))


def linear_trend(inc: IncrementSeries) -> TrendFit:
    """Ordinary least squares of increment on attained level.

    slope = cov(level, increment) / var(level); requires at least two
    pairs and non-degenerate level variance.
    """
    if inc.n < 2:
        raise ValueError(f"{inc.country}: need at least 2 increments for a "
                         f"trend, got {inc.n}")
    x = inc.levels()
    y = inc.increments()
    xc = x - x.mean()
    sxx = float(np.dot(xc, xc))
    if sxx == 0.0:
        raise ValueError(f"{inc.country}: attained levels are all equal; "
                         f"trend is undefined")
    slope = float(np.dot(xc, y - y.mean()) / sxx)
    ymean = float(y.mean())
    intercept = ymean - slope * float(x.mean())
    return TrendFit(mean_increment=ymean, intercept=intercept, slope=slope,
                    n=inc.n)


def max_deviation(inc: IncrementSeries, mean: float):
    """Increment with the largest |increment - mean|.

    Returns (year, signed deviation); ties break to the earliest year.
    """
    if inc.n < 1:
        raise ValueError(f"{inc.country}: no increments")
    best_year, best_dev = None, None
    for year, (_, d) in zip(inc.years(), inc.pairs):
        dev = d - mean
        if best_dev is None or abs(dev) > abs(best_dev):
            best_year, best_dev = year, dev
    return best_year, best_dev


def normalize_to_reference(means: Mapping[str, float], reference: str) -> dict:
    """Divide every country's value by the reference country's value."""
    if reference not in means:
        raise ValueError(f"reference country {reference!r} absent")
    ref = means[reference]
    if ref == 0:
        raise ValueError(f"reference country {reference!r} has a zero value")
    return {country: v / ref for country, v in means.items()}


@dataclass(frozen=True)
class AgeAdjustment:
    """A mean increment rescaled by a specific-age adjustment factor.

    ``adjusted`` is the raw product, never rounded; ``rounded`` is the
    whole-currency-unit display value. When a published rounded figure
    is supplied, ``matches_published`` flags whether it agrees with the
    computed product (reports surface mismatches rather than hiding
    them).
    """

    mean: float
    factor: float
    adjusted: float
    rounded: int
    published: int | None = None

    @property
    def matches_published(self) -> bool | None:
        if self.published is None:
            return None
        return self.rounded == self.published


def specific_age_adjustment(mean: float, factor: float,
                            published: int | None = None) -> AgeAdjustment:
    """Rescale a mean increment by a per-country adjustment factor."""
    if not factor > 0:
        raise ValueError(f"adjustment factor must be positive, got {factor}")
    product = mean * factor
    return AgeAdjustment(mean=mean, factor=factor, adjusted=product,
                         rounded=round(product), published=published)


@dataclass(frozen=True)
class CountrySummaryRow:
    """One row of the cross-country summary table.

    Mean increments on both bases plus the OLS trend slopes for the
    2002$ variants. Absent data is None, never a silent zero.
    """

    country: str
    mean_original: float | None
    mean_corrected: float | None
    trend_original: float | None
    trend_corrected: float | None
    mean_original_gk: float | None
    mean_corrected_gk: float | None


def _mean_or_none(series) -> float | None:
    return None if series is None else mean_increment(increments(series))


def _slope_or_none(series) -> float | None:
    return None if series is None else linear_trend(increments(series)).slope


def country_table(eks_original: Mapping[str, AnnualSeries],
                  eks_corrected: Mapping | None = None,
                  gk_original: Mapping | None = None,
                  gk_corrected: Mapping | None = None) -> list:
    """Per-country means and trend slopes, alphabetically ordered.

    Every country must appear in ``eks_original``; the other panels are
    optional and contribute cells where present.
    """
    eks_corrected = eks_corrected or {}
    gk_original = gk_original or {}
    gk_corrected = gk_corrected or {}
    rows = []
    for country in sorted(eks_original):
        orig = eks_original[country]
        corr = eks_corrected.get(country)
        rows.append(CountrySummaryRow(
            country=country,
            mean_original=_mean_or_none(orig),
            mean_corrected=_mean_or_none(corr),
            trend_original=_slope_or_none(orig),
            trend_corrected=_slope_or_none(corr),
            mean_original_gk=_mean_or_none(gk_original.get(country)),
            mean_corrected_gk=_mean_or_none(gk_corrected.get(country)),
        ))
    return rows


TABLE_COLUMNS = ("country", "mean_original", "mean_corrected",
                 "trend_original", "trend_corrected",
                 "mean_original_gk", "mean_corrected_gk")


def render_table_csv(rows: Iterable[CountrySummaryRow]) -> str:
    """Full-precision CSV; absent cells are empty."""
    lines = [",".join(TABLE_COLUMNS)]
    for r in rows:
        cells = [r.country]
        for col in TABLE_COLUMNS[1:]:
            v = getattr(r, col)
            cells.append("" if v is None else repr(v))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def render_table_text(rows: Iterable[CountrySummaryRow]) -> str:
    """Aligned text table; means shown to whole units, slopes to four
    decimals. Underlying values are never rounded, only the display."""
    rows = list(rows)
    header = ("country", "mean_orig", "mean_corr", "trend_orig",
              "trend_corr", "mean_orig_gk", "mean_corr_gk")

    def fmt_mean(v):
        return "-" if v is None else f"{v:.0f}"

    def fmt_slope(v):
        return "-" if v is None else f"{v:.4f}"

    body = [(r.country, fmt_mean(r.mean_original), fmt_mean(r.mean_corrected),
             fmt_slope(r.trend_original), fmt_slope(r.trend_corrected),
             fmt_mean(r.mean_original_gk), fmt_mean(r.mean_corrected_gk))
            for r in rows]
    widths = [max(len(h), *(len(b[i]) for b in body)) if body else len(h)
              for i, h in enumerate(header)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
    for b in body:
        lines.append("  ".join(c.ljust(w) for c, w in zip(b, widths)).rstrip())
    return "\n".join(lines) + "\n"


def emit_increments_csv(series: Iterable[IncrementSeries]) -> str:
    """CSV with columns country,year,level,increment (one row per pair)."""
    lines = ["country,year,level,increment"]
    for inc in series:
        for year, (level, d) in zip(inc.years(), inc.pairs):
            lines.append(f"{inc.country},{year},{level!r},{d!r}")
    return "\n".join(lines) + "\n"


def amplitude(inc: IncrementSeries) -> float:
    """Largest absolute deviation of an increment from the series mean."""
    _, dev = max_deviation(inc, mean_increment(inc))
    return abs(dev)
