"""Constant-increment growth model: fit, project, and compare.

A level series following G(t) = base_level + increment * (t - base_year)
grows by the same absolute amount every year, so its relative growth
rate increment / G(t) decays toward zero as the level rises. Two
economies with equal increments keep a constant absolute gap forever,
even though the one behind shows the higher relative rate throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

from .datastore import AnnualSeries, PppBasis
from .trendlab import increments, mean_increment


class ProjectionError(ValueError):
    """A projection would emit a nonpositive level."""


@dataclass(frozen=True)
class ModelParams:
    """Fitted trend: per-year increment and the level at the base year."""

    increment: float
    base_level: float
    base_year: int

    def __post_init__(self):
        if not self.base_level > 0:
            raise ValueError(f"base level must be positive, "
                             f"got {self.base_level}")


def fit_model(series) -> ModelParams:
    """Estimate the trend as the mean annual increment.

    The increment estimate telescopes to the endpoint slope
    (G_last - G_first) / (n - 1); the base level is the first value.
    """
    inc = increments(series)
    first = inc.pairs[0][0]
    return ModelParams(increment=mean_increment(inc), base_level=first,
                       base_year=inc.first_year - 1)


def project(params: ModelParams, horizon: int,
            country: str = "projection") -> AnnualSeries:
    """Levels base_level + increment * k for k = 0..horizon.

    Raises ProjectionError rather than emitting a nonpositive level
    (possible when the increment is negative).
    """
    if horizon < 0:
        raise ValueError(f"horizon must be >= 0, got {horizon}")
    values = []
    for k in range(horizon + 1):
        v = params.base_level + params.increment * k
        if v <= 0:
            raise ProjectionError(
                f"projection reaches nonpositive level {v!r} at year "
                f"{params.base_year + k}")
        values.append(v)
    return AnnualSeries(country=country, start_year=params.base_year,
                        values=tuple(values), ppp_basis=PppBasis.OTHER)


def relative_rate(increment: float, level: float) -> float:
    """Relative growth rate increment / level at the attained level."""
    if level <= 0:
        raise ValueError(f"level must be positive, got {level}")
    return increment / level


@dataclass(frozen=True)
class GapPoint:
    year: int
    gap: float
    rate1: float
    rate2: float


def gap_trajectory(p1: ModelParams, p2: ModelParams, horizon: int) -> list:
    """Absolute level gap and both relative rates, year by year.

    The two projections are aligned by offset from their base years;
    the reported calendar year follows ``p1``. Rates are nan where a
    projected level is nonpositive.
    """
    if horizon < 0:
        raise ValueError(f"horizon must be >= 0, got {horizon}")
    out = []
    for k in range(horizon + 1):
        l1 = p1.base_level + p1.increment * k
        l2 = p2.base_level + p2.increment * k
        r1 = p1.increment / l1 if l1 > 0 else float("nan")
        r2 = p2.increment / l2 if l2 > 0 else float("nan")
        out.append(GapPoint(year=p1.base_year + k, gap=l1 - l2,
                            rate1=r1, rate2=r2))
    return out


def emit_projection_csv(series: AnnualSeries) -> str:
    """CSV with columns year,value."""
    lines = ["year,value"]
    for year, v in zip(series.years(), series.values):
        lines.append(f"{year},{v!r}")
    return "\n".join(lines) + "\n"


def emit_gap_csv(points) -> str:
    """CSV with columns year,gap,rate1,rate2."""
    lines = ["year,gap,rate1,rate2"]
    for p in points:
        lines.append(f"{p.year},{p.gap!r},{p.rate1!r},{p.rate2!r}")
    return "\n".join(lines) + "\n"
