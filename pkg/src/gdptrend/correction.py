"""Population-ratio correction and PPP-basis comparison.

Published GDP per capita divides output by the whole population; the
income-earning population is the part aged 15 and over. Multiplying each
year's published level by the ratio total/adults restates the series per
economically active person. The ratio is computed year by year, never
period-averaged.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .datastore import AnnualSeries, PopulationTable


class CoverageError(ValueError):
    """The population table does not cover a year the series needs."""


def population_ratio(pop: PopulationTable, country: str, year: int) -> float:
    """Total population divided by population aged 15 and over.

    Raises KeyError when the (country, year) entry is absent; run
    ``fill_missing`` first if the table has holes.
    """
    e = pop.get(country, year)
    return e.total / e.adults


@dataclass(frozen=True)
class CorrectedSeries:
    """A series together with its per-year ratios and corrected levels.

    corrected_values[i] == base.values[i] * ratios[i], exactly.
    """

    base: AnnualSeries
    ratios: tuple
    corrected_values: tuple

    def as_series(self) -> AnnualSeries:
        return AnnualSeries(country=self.base.country,
                            start_year=self.base.start_year,
                            values=self.corrected_values,
                            ppp_basis=self.base.ppp_basis)

    @property
    def country(self) -> str:
        return self.base.country


def correct_series(gdp: AnnualSeries, pop: PopulationTable) -> CorrectedSeries:
    """Multiply each year's level by that year's population ratio.

    The input series must be complete (no unfilled gaps) and the
    population table must cover its whole span.
    """
    if not gdp.is_complete:
        raise CoverageError(f"{gdp.country}: series has unfilled gaps; "
                            f"run fill_missing first")
    ratios = []
    for year in gdp.years():
        if not pop.has(gdp.country, year):
            raise CoverageError(f"{gdp.country}: population table has no "
                                f"entry for year {year}")
        ratios.append(population_ratio(pop, gdp.country, year))
    corrected = tuple(v * r for v, r in zip(gdp.values, ratios))
    return CorrectedSeries(base=gdp, ratios=tuple(ratios),
                           corrected_values=corrected)


def emit_corrected_csv(corrected: CorrectedSeries) -> str:
    """CSV with columns country,year,original,ratio,corrected."""
    lines = ["country,year,original,ratio,corrected"]
    s = corrected.base
    for year, v, r, c in zip(s.years(), s.values, corrected.ratios,
                             corrected.corrected_values):
        lines.append(f"{s.country},{year},{v!r},{r!r},{c!r}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class PppEntry:
    country: str
    mean_a: float
    mean_b: float
    normalized_a: float
    normalized_b: float
    relative_difference: float


@dataclass(frozen=True)
class PppComparison:
    """Cross-basis comparison of per-country mean increments.

    Both bases are normalized to the reference country (which maps to
    exactly 1 on each); relative_difference is
    normalized_a / normalized_b - 1.
    """

    reference: str
    entries: tuple

    def by_country(self) -> dict:
        return {e.country: e for e in self.entries}

    def extremes(self, k: int = 3) -> list:
        """Countries ranked by |relative_difference|, largest first."""
        ranked = sorted(self.entries,
                        key=lambda e: (-abs(e.relative_difference), e.country))
        return [e.country for e in ranked[:k]]


def ppp_delta(means_a: Mapping[str, float], means_b: Mapping[str, float],
              reference: str) -> PppComparison:
    """Compare per-country mean increments across two PPP bases.

    ``means_a`` and ``means_b`` must cover the same countries and include
    the reference with a nonzero mean on both bases.
    """
    if set(means_a) != set(means_b):
        only_a = sorted(set(means_a) - set(means_b))
        only_b = sorted(set(means_b) - set(means_a))
        raise ValueError(f"country sets differ between bases: "
                         f"only in a: {only_a}, only in b: {only_b}")
    if reference not in means_a:
        raise ValueError(f"reference country {reference!r} not in the panel")
    ref_a, ref_b = means_a[reference], means_b[reference]
    if ref_a == 0 or ref_b == 0:
        raise ValueError(f"reference country {reference!r} has a zero mean")
    entries = []
    for country in sorted(means_a):
        na = means_a[country] / ref_a
        nb = means_b[country] / ref_b
        entries.append(PppEntry(country=country,
                                mean_a=means_a[country],
                                mean_b=means_b[country],
                                normalized_a=na, normalized_b=nb,
                                relative_difference=na / nb - 1.0))
    return PppComparison(reference=reference, entries=tuple(entries))
