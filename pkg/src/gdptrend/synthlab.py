"""Deterministic synthetic economies: the ground-truth oracle.

Every estimator in the toolkit is testable against panels generated
here, because generation records exactly what it did. Noise is applied
to the *increments* (increment_k = trend + eps_k), never to the levels,
so the residuals recovered downstream are exactly the generated
increment sequence.

Determinism contract: the generator is splitmix64 (Steele, Lea &
Flood's 2014 mix function), producing uniforms from the top 53 bits,
with normal variates obtained by the inverse-CDF transform (AS 241).
Both algorithms are implemented in this repository, so a (params,
noise, years) triple yields bit-identical output on every platform and
library version. Do not change either algorithm without versioning the
streams.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

from .datastore import AnnualSeries, PopulationEntry, PopulationTable, PppBasis
from .growthmodel import ModelParams
from .numerics import normal_quantile

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """splitmix64 stream; uniform() yields doubles strictly inside (0,1)."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        # top 53 bits, offset by half an ulp so 0 and 1 are unreachable
        return (float(self.next_u64() >> 11) + 0.5) * 2.0 ** -53

    def normal(self, sigma: float = 1.0) -> float:
        return sigma * normal_quantile(self.uniform())


class NoiseKind(Enum):
    NONE = "NONE"
    NORMAL = "NORMAL"
    MIXTURE = "MIXTURE"


@dataclass(frozen=True)
class NoiseSpec:
    """Increment noise: none, normal, or a two-normal heavy-tail mixture.

    MIXTURE draws each residual from N(0, sigma_tail) with probability
    tail_fraction and from N(0, sigma_core) otherwise, consuming two
    uniforms per draw (selector first, then variate). NORMAL consumes
    one uniform per draw.
    """

    kind: NoiseKind
    seed: int = 0
    sigma: float = 0.0
    sigma_core: float = 0.0
    sigma_tail: float = 0.0
    tail_fraction: float = 0.0

    def __post_init__(self):
        if not 0 <= self.seed <= _MASK64:
            raise ValueError(f"seed must fit in 64 bits, got {self.seed}")
        if self.kind is NoiseKind.NORMAL and not self.sigma > 0:
            raise ValueError(f"normal noise needs sigma > 0, got {self.sigma}")
        if self.kind is NoiseKind.MIXTURE:
            if not (self.sigma_core > 0 and self.sigma_tail > 0):
                raise ValueError("mixture noise needs positive sigma_core "
                                 "and sigma_tail")
            if not 0.0 <= self.tail_fraction <= 1.0:
                raise ValueError(f"tail_fraction must be in [0, 1], "
                                 f"got {self.tail_fraction}")

    @classmethod
    def none(cls) -> "NoiseSpec":
        return cls(kind=NoiseKind.NONE)

    @classmethod
    def normal(cls, sigma: float, seed: int = 0) -> "NoiseSpec":
        return cls(kind=NoiseKind.NORMAL, sigma=sigma, seed=seed)

    @classmethod
    def mixture(cls, sigma_core: float, sigma_tail: float,
                tail_fraction: float, seed: int = 0) -> "NoiseSpec":
        return cls(kind=NoiseKind.MIXTURE, sigma_core=sigma_core,
                   sigma_tail=sigma_tail, tail_fraction=tail_fraction,
                   seed=seed)

    def to_json_dict(self) -> dict:
        doc = {"kind": self.kind.value, "seed": self.seed}
        if self.kind is NoiseKind.NORMAL:
            doc["sigma"] = self.sigma
        elif self.kind is NoiseKind.MIXTURE:
            doc.update(sigma_core=self.sigma_core, sigma_tail=self.sigma_tail,
                       tail_fraction=self.tail_fraction)
        return doc


def _draw_epsilons(noise: NoiseSpec, count: int) -> tuple:
    if noise.kind is NoiseKind.NONE:
        return (0.0,) * count
    rng = SplitMix64(noise.seed)
    if noise.kind is NoiseKind.NORMAL:
        return tuple(rng.normal(noise.sigma) for _ in range(count))
    eps = []
    for _ in range(count):
        in_tail = rng.uniform() < noise.tail_fraction
        eps.append(rng.normal(noise.sigma_tail if in_tail
                              else noise.sigma_core))
    return tuple(eps)


@dataclass(frozen=True)
class GroundTruth:
    """What the generator actually emitted.

    ``epsilons`` are the raw noise draws; ``increments`` are the
    realized year-over-year differences of the emitted series (the two
    agree to within float rounding, and downstream recovery is checked
    bit-exactly against ``increments``).
    """

    country: str
    params: ModelParams
    noise: NoiseSpec
    years: int
    epsilons: tuple
    increments: tuple

    @property
    def mean_increment(self) -> float:
        return sum(self.increments) / len(self.increments)

    def to_json_dict(self) -> dict:
        return {
            "country": self.country,
            "params": {"increment": self.params.increment,
                       "base_level": self.params.base_level,
                       "base_year": self.params.base_year},
            "noise": self.noise.to_json_dict(),
            "years": self.years,
            "epsilons": list(self.epsilons),
            "increments": list(self.increments),
            "mean_increment": self.mean_increment,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n"


def generate(params: ModelParams, noise: NoiseSpec, years: int,
             country: str = "synthetic",
             ppp_basis: PppBasis = PppBasis.OTHER):
    """Generate one economy: level k+1 = level k + (increment + eps_k).

    Returns (AnnualSeries, GroundTruth). Identical (params, noise,
    years) are bit-identical across runs. Raises if a level would go
    nonpositive or years < 2.
    """
    if years < 2:
        raise ValueError(f"need at least 2 years, got {years}")
    eps = _draw_epsilons(noise, years - 1)
    values = [params.base_level]
    for e in eps:
        v = values[-1] + (params.increment + e)
        if v <= 0:
            raise ValueError(f"{country}: generated level {v!r} at year "
                             f"{params.base_year + len(values)} is not "
                             f"positive; lower the noise or raise the base")
        values.append(v)
    series = AnnualSeries(country=country, start_year=params.base_year,
                          values=tuple(values), ppp_basis=ppp_basis)
    realized = tuple(values[i + 1] - values[i] for i in range(len(values) - 1))
    truth = GroundTruth(country=country, params=params, noise=noise,
                        years=years, epsilons=eps, increments=realized)
    return series, truth


def generate_population(country: str, start_year: int, ratio_path,
                        base_adult: int) -> PopulationTable:
    """Population table realizing a scripted total/adult ratio path.

    The adult population stays constant at ``base_adult``; each year's
    total is round(base_adult * ratio), so the recovered ratio matches
    the script to within 1/base_adult.
    """
    if base_adult <= 0:
        raise ValueError(f"base_adult must be positive, got {base_adult}")
    ratio_path = tuple(float(r) for r in ratio_path)
    if not ratio_path:
        raise ValueError("ratio path is empty")
    entries = {}
    for i, r in enumerate(ratio_path):
        if r < 1.0:
            raise ValueError(f"ratio must be >= 1, got {r} at index {i}")
        entries[(country, start_year + i)] = PopulationEntry(
            total=int(round(base_adult * r)), adults=base_adult)
    return PopulationTable(entries=entries)


def linear_ratio_path(start: float, end: float, years: int) -> tuple:
    """Evenly spaced ratio script from ``start`` to ``end`` inclusive."""
    if years < 1:
        raise ValueError(f"need at least 1 year, got {years}")
    if years == 1:
        return (start,)
    step = (end - start) / (years - 1)
    return tuple(start + step * i for i in range(years))
