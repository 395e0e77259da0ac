"""Input panels: parsing, validation, and repair.

Two file formats are supported, both UTF-8 comma-delimited CSV with a
mandatory header row (LF or CRLF):

* GDP per capita panel: ``country,year,value`` with one row per
  country-year and strictly positive values.
* Population table, either the flat form ``country,year,total,pop15plus``
  or the pyramid form ``country,year,age,count`` (integer ages 0..100,
  where 100 means "100 and over"). Pyramid rows are reduced to
  (total = sum over all ages, adults = sum over ages >= 15).

Parsed structures are immutable after construction and safe to share
across workers. Missing years are repaired by ``fill_missing``, which
copies the nearest available *later* observation (forward-looking only,
never interpolation); every substitution is recorded in a
ValidationReport.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping


class ParseError(ValueError):
    """Malformed input file; the message names the offending line."""


class FillError(ValueError):
    """A missing year has no later observation to copy from."""


class PppBasis(Enum):
    EKS_2002 = "EKS_2002"
    GK_1990 = "GK_1990"
    OTHER = "OTHER"


@dataclass(frozen=True)
class AnnualSeries:
    """One country's yearly real GDP per capita levels.

    ``values[i]`` is the level for ``start_year + i``; a ``None`` entry
    marks a year with no observation (pending ``fill_missing``). A valid
    series has no ``None`` entries and every value strictly positive;
    use ``validate_series`` to diagnose violations.
    """

    country: str
    start_year: int
    values: tuple
    ppp_basis: PppBasis = PppBasis.OTHER

    def __post_init__(self):
        if not self.values:
            raise ValueError(f"series for {self.country!r} has no values")
        object.__setattr__(self, "values", tuple(self.values))

    def __len__(self) -> int:
        return len(self.values)

    @property
    def end_year(self) -> int:
        return self.start_year + len(self.values) - 1

    def years(self) -> range:
        return range(self.start_year, self.end_year + 1)

    def value_for(self, year: int):
        if not self.start_year <= year <= self.end_year:
            raise KeyError(f"{self.country}: year {year} outside "
                           f"{self.start_year}..{self.end_year}")
        return self.values[year - self.start_year]

    @property
    def is_complete(self) -> bool:
        return all(v is not None for v in self.values)


@dataclass(frozen=True)
class PopulationEntry:
    total: int
    adults: int  # population aged 15 and over


@dataclass(frozen=True)
class PopulationTable:
    """Per country-year total population and population aged 15+.

    Every entry satisfies total >= adults > 0 (enforced at parse and
    construction time).
    """

    entries: Mapping[tuple, PopulationEntry]

    def __post_init__(self):
        object.__setattr__(self, "entries", dict(self.entries))
        for (country, year), e in self.entries.items():
            if not (e.total >= e.adults > 0):
                raise ValueError(
                    f"population invariant violated for ({country}, {year}): "
                    f"total {e.total} < adults {e.adults} or adults <= 0")

    def get(self, country: str, year: int) -> PopulationEntry:
        try:
            return self.entries[(country, year)]
        except KeyError:
            raise KeyError(f"no population entry for ({country}, {year})") from None

    def has(self, country: str, year: int) -> bool:
        return (country, year) in self.entries

    def countries(self) -> list:
        return sorted({c for c, _ in self.entries})

    def years(self, country: str) -> list:
        return sorted(y for c, y in self.entries if c == country)

    def __len__(self) -> int:
        return len(self.entries)


@dataclass
class ValidationReport:
    """Diagnostics from parsing, validation, and repair.

    gaps        (country, missing_year) pairs still unobserved
    nonpositive (country, year) pairs with value <= 0
    filled      (country, year, source_year) substitutions performed
    """

    gaps: list = field(default_factory=list)
    nonpositive: list = field(default_factory=list)
    filled: list = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not (self.gaps or self.nonpositive or self.filled)

    def extend(self, other: "ValidationReport") -> None:
        self.gaps.extend(other.gaps)
        self.nonpositive.extend(other.nonpositive)
        self.filled.extend(other.filled)

    def sorted(self) -> "ValidationReport":
        return ValidationReport(gaps=sorted(self.gaps),
                                nonpositive=sorted(self.nonpositive),
                                filled=sorted(self.filled))

    def to_json(self) -> str:
        doc = {
            "gaps": [{"country": c, "year": y} for c, y in sorted(self.gaps)],
            "nonpositive": [{"country": c, "year": y}
                            for c, y in sorted(self.nonpositive)],
            "filled": [{"country": c, "year": y, "source_year": s}
                       for c, y, s in sorted(self.filled)],
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"

    def to_text(self) -> str:
        lines = []
        for c, y in sorted(self.gaps):
            lines.append(f"gap: {c} {y}")
        for c, y in sorted(self.nonpositive):
            lines.append(f"nonpositive: {c} {y}")
        for c, y, s in sorted(self.filled):
            lines.append(f"filled: {c} {y} <- {s}")
        if not lines:
            lines.append("clean")
        return "\n".join(lines) + "\n"


GDP_HEADER = ["country", "year", "value"]
POPULATION_HEADER = ["country", "year", "total", "pop15plus"]
PYRAMID_HEADER = ["country", "year", "age", "count"]


def _rows(text: str, expected_header: list, what: str):
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError(f"{what}: empty input, expected header "
                         f"{','.join(expected_header)}") from None
    if [h.strip().lstrip("﻿") for h in header] != expected_header:
        raise ParseError(f"{what}: line 1: expected header "
                         f"{','.join(expected_header)}, got {','.join(header)}")
    for row in reader:
        if not row:
            continue  # tolerate trailing blank line
        if len(row) != len(expected_header):
            raise ParseError(f"{what}: line {reader.line_num}: expected "
                             f"{len(expected_header)} fields, got {len(row)}")
        yield reader.line_num, [f.strip() for f in row]


def _parse_int(text: str, what: str, line: int, name: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ParseError(f"{what}: line {line}: {name} {text!r} is not an "
                         f"integer") from None


def _parse_value(text: str, what: str, line: int) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ParseError(f"{what}: line {line}: value {text!r} is not a "
                         f"number") from None
    if not math.isfinite(v):
        raise ParseError(f"{what}: line {line}: value {text!r} is not finite")
    return v


def parse_gdp_csv(text: str, ppp_basis: PppBasis = PppBasis.OTHER) -> list:
    """Parse a ``country,year,value`` panel into one series per country.

    Duplicate (country, year) rows, nonpositive values, non-integer
    years, and malformed rows are errors that name the offending line.
    Years need not arrive sorted; missing interior years become ``None``
    holes the caller can repair with ``fill_missing``.
    """
    what = "gdp csv"
    by_country: dict = {}
    for line, (country, year_s, value_s) in _rows(text, GDP_HEADER, what):
        year = _parse_int(year_s, what, line, "year")
        value = _parse_value(value_s, what, line)
        if value <= 0:
            raise ParseError(f"{what}: line {line}: nonpositive value {value!r} "
                             f"for ({country}, {year})")
        seen = by_country.setdefault(country, {})
        if year in seen:
            raise ParseError(f"{what}: line {line}: duplicate entry for "
                             f"({country}, {year})")
        seen[year] = value

    out = []
    for country in sorted(by_country):
        obs = by_country[country]
        start, end = min(obs), max(obs)
        values = tuple(obs.get(y) for y in range(start, end + 1))
        out.append(AnnualSeries(country=country, start_year=start,
                                values=values, ppp_basis=ppp_basis))
    return out


def parse_population_csv(text: str) -> PopulationTable:
    """Parse a population file in the flat or the pyramid schema.

    The header row determines the schema; files mixing the two are
    rejected when the row shape stops matching the header.
    """
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = [h.strip().lstrip("﻿") for h in next(reader)]
    except StopIteration:
        raise ParseError("population csv: empty input") from None

    if header == POPULATION_HEADER:
        return _parse_population_flat(text)
    if header == PYRAMID_HEADER:
        return _parse_population_pyramid(text)
    raise ParseError(
        "population csv: line 1: header must be "
        f"{','.join(POPULATION_HEADER)} or {','.join(PYRAMID_HEADER)}, "
        f"got {','.join(header)}")


def _parse_population_flat(text: str) -> PopulationTable:
    what = "population csv"
    entries: dict = {}
    for line, (country, year_s, total_s, adults_s) in _rows(
            text, POPULATION_HEADER, what):
        year = _parse_int(year_s, what, line, "year")
        total = _parse_int(total_s, what, line, "total")
        adults = _parse_int(adults_s, what, line, "pop15plus")
        if adults <= 0:
            raise ParseError(f"{what}: line {line}: pop15plus must be positive "
                             f"for ({country}, {year}), got {adults}")
        if total < adults:
            raise ParseError(f"{what}: line {line}: total {total} < pop15plus "
                             f"{adults} for ({country}, {year})")
        key = (country, year)
        if key in entries:
            raise ParseError(f"{what}: line {line}: duplicate entry for "
                             f"({country}, {year})")
        entries[key] = PopulationEntry(total=total, adults=adults)
    return PopulationTable(entries=entries)


def _parse_population_pyramid(text: str) -> PopulationTable:
    what = "population csv (pyramid)"
    totals: dict = {}
    adults: dict = {}
    seen: set = set()
    for line, (country, year_s, age_s, count_s) in _rows(
            text, PYRAMID_HEADER, what):
        year = _parse_int(year_s, what, line, "year")
        age = _parse_int(age_s, what, line, "age")
        count = _parse_int(count_s, what, line, "count")
        if not 0 <= age <= 100:
            raise ParseError(f"{what}: line {line}: age must be in 0..100, "
                             f"got {age}")
        if count < 0:
            raise ParseError(f"{what}: line {line}: negative count {count} "
                             f"for ({country}, {year}, age {age})")
        key = (country, year, age)
        if key in seen:
            raise ParseError(f"{what}: line {line}: duplicate entry for "
                             f"({country}, {year}, age {age})")
        seen.add(key)
        k = (country, year)
        totals[k] = totals.get(k, 0) + count
        if age >= 15:
            adults[k] = adults.get(k, 0) + count

    entries: dict = {}
    for k in totals:
        country, year = k
        a = adults.get(k, 0)
        if a <= 0:
            raise ParseError(f"{what}: ({country}, {year}) has no population "
                             f"aged 15 and over")
        entries[k] = PopulationEntry(total=totals[k], adults=a)
    return PopulationTable(entries=entries)


def emit_gdp_csv(series: Iterable[AnnualSeries]) -> str:
    """Inverse of ``parse_gdp_csv``; unobserved (None) years are omitted.

    Values are written in shortest round-trip decimal form, so
    emit-parse-emit is byte-stable.
    """
    lines = [",".join(GDP_HEADER)]
    rows = []
    for s in series:
        for year, v in zip(s.years(), s.values):
            if v is not None:
                rows.append((s.country, year, v))
    for country, year, v in sorted(rows):
        lines.append(f"{country},{year},{v!r}")
    return "\n".join(lines) + "\n"


def emit_population_csv(table: PopulationTable) -> str:
    """Emit the flat 4-column form, sorted by country then year."""
    lines = [",".join(POPULATION_HEADER)]
    for (country, year) in sorted(table.entries):
        e = table.entries[(country, year)]
        lines.append(f"{country},{year},{e.total},{e.adults}")
    return "\n".join(lines) + "\n"


def validate_series(series: AnnualSeries) -> ValidationReport:
    """Report gaps and nonpositive values; a clean series yields an
    empty report. Purely diagnostic, never raises."""
    report = ValidationReport()
    for year, v in zip(series.years(), series.values):
        if v is None:
            report.gaps.append((series.country, year))
        elif v <= 0:
            report.nonpositive.append((series.country, year))
    return report


def fill_missing(series_or_table, year_range=None):
    """Repair missing years by copying the nearest later observation.

    The fill rule is strictly forward-looking: a missing year takes the
    value of the closest year *after* it. A missing year with no later
    observation within reach is a FillError, never an extrapolation.

    ``year_range`` is an inclusive (first, last) pair of years that must
    be covered; when omitted, the observed span is used (per country for
    tables). Returns ``(repaired, ValidationReport)`` where the report's
    ``filled`` list records every substitution as
    (country, year, source_year). Idempotent: filling a filled input is
    the identity with an empty report.
    """
    if isinstance(series_or_table, AnnualSeries):
        return _fill_series(series_or_table, year_range)
    if isinstance(series_or_table, PopulationTable):
        return _fill_table(series_or_table, year_range)
    raise TypeError(f"cannot fill object of type "
                    f"{type(series_or_table).__name__}")


def _fill_span(observed: dict, span: range, country: str, filled: list) -> dict:
    """Forward-fill helper over one country's year->value map."""
    out = dict(observed)
    later = sorted(observed)
    for year in span:
        if year in out:
            continue
        source = next((y for y in later if y > year), None)
        if source is None:
            raise FillError(f"{country}: missing year {year} has no later "
                            f"observation to copy from")
        out[year] = observed[source]
        filled.append((country, year, source))
    return out


def _fill_series(series: AnnualSeries, year_range):
    observed = {y: v for y, v in zip(series.years(), series.values)
                if v is not None}
    if not observed:
        raise FillError(f"{series.country}: no observations to fill from")
    first, last = series.start_year, series.end_year
    if year_range is not None:
        first, last = min(year_range[0], first), max(year_range[1], last)
    report = ValidationReport()
    full = _fill_span(observed, range(first, last + 1), series.country,
                      report.filled)
    values = tuple(full[y] for y in range(first, last + 1))
    repaired = AnnualSeries(country=series.country, start_year=first,
                            values=values, ppp_basis=series.ppp_basis)
    return repaired, report.sorted()


def _fill_table(table: PopulationTable, year_range):
    report = ValidationReport()
    entries: dict = {}
    for country in table.countries():
        observed = {y: table.entries[(country, y)]
                    for y in table.years(country)}
        if year_range is None:
            first, last = min(observed), max(observed)
        else:
            first, last = year_range
            first, last = min(first, min(observed)), max(last, max(observed))
        full = _fill_span(observed, range(first, last + 1), country,
                          report.filled)
        for y, e in full.items():
            entries[(country, y)] = e
    return PopulationTable(entries=entries), report.sorted()
