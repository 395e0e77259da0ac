"""Command-line front end.

Subcommands: validate, table1, dist, compare, simulate. Flags beat
config-file values, which beat defaults; the config file is a flat
``key = value`` text document (same keys as the long flags, with
underscores). Every command is deterministic: identical inputs produce
byte-identical outputs, diagnostics go to stderr, data to files and
stdout.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass
from pathlib import Path

from .correction import CoverageError, correct_series
from .datastore import (AnnualSeries, FillError, ParseError, PopulationTable,
                        PppBasis, ValidationReport, emit_gdp_csv,
                        emit_population_csv, fill_missing, parse_gdp_csv,
                        parse_population_csv, validate_series)
from .fluctuations import (Centering, distribution_json, emit_distribution_csv,
                           pool_residuals, subset_pool, summarize)
from .growthmodel import ModelParams
from .synthlab import NoiseKind, NoiseSpec, generate, generate_population, \
    linear_ratio_path
from .trendlab import (country_table, increments, mean_increment,
                       render_table_csv, render_table_text,
                       specific_age_adjustment)

DEFAULT_REFERENCE = "USA"
DEFAULT_BIN_WIDTH = 200.0
DEFAULT_EXCLUDE = ("Greece", "Ireland", "Norway", "New Zealand", "Portugal",
                   "USA")
DEFAULT_FACTORS = (("France", 0.97), ("USA", 0.82))


class CliError(Exception):
    """User-facing configuration or data error."""


@dataclass(frozen=True)
class RunConfig:
    """Resolved configuration for one command invocation."""

    gdp_eks: Path | None = None
    gdp_gk: Path | None = None
    population: Path | None = None
    reference: str = DEFAULT_REFERENCE
    bin_width: float = DEFAULT_BIN_WIDTH
    exclude: tuple = DEFAULT_EXCLUDE
    out: Path = Path(".")
    seed: int = 0
    adjustment_factors: tuple = DEFAULT_FACTORS

    def factors(self) -> dict:
        return dict(self.adjustment_factors)


CONFIG_KEYS = ("gdp_eks", "gdp_gk", "population", "reference", "bin_width",
               "exclude", "out", "seed", "adjustment_factors")


def parse_config_file(path: Path) -> dict:
    """Flat ``key = value`` file; '#' starts a comment, blanks ignored."""
    values = {}
    for i, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise CliError(f"{path}: line {i}: expected 'key = value', "
                           f"got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in CONFIG_KEYS:
            raise CliError(f"{path}: line {i}: unknown key {key!r}")
        values[key] = value.strip()
    return values


def _parse_exclude(text: str) -> tuple:
    return tuple(c.strip() for c in text.split(",") if c.strip())


def _parse_factors(text: str) -> tuple:
    pairs = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        country, sep, value = item.rpartition(":")
        if not sep:
            raise CliError(f"adjustment factor {item!r} is not COUNTRY:VALUE")
        try:
            pairs.append((country.strip(), float(value)))
        except ValueError:
            raise CliError(f"adjustment factor value {value!r} is not a "
                           f"number") from None
    return tuple(sorted(pairs))


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge flag > config file > default, per key."""
    file_values: dict = {}
    if getattr(args, "config", None) is not None:
        path = Path(args.config)
        if not path.exists():
            raise CliError(f"config file not found: {path}")
        file_values = parse_config_file(path)

    def pick(key, flag_value, convert, default):
        if flag_value is not None:
            return flag_value
        if key in file_values:
            return convert(file_values[key])
        return default

    return RunConfig(
        gdp_eks=pick("gdp_eks", args.gdp_eks, Path, None),
        gdp_gk=pick("gdp_gk", args.gdp_gk, Path, None),
        population=pick("population", args.population, Path, None),
        reference=pick("reference", args.reference, str, DEFAULT_REFERENCE),
        bin_width=pick("bin_width", args.bin_width, float, DEFAULT_BIN_WIDTH),
        exclude=pick("exclude",
                     _parse_exclude(args.exclude) if args.exclude is not None
                     else None,
                     _parse_exclude, DEFAULT_EXCLUDE),
        out=pick("out", args.out, Path, Path(".")),
        seed=pick("seed", args.seed, int, 0),
        adjustment_factors=pick("adjustment_factors", None, _parse_factors,
                                DEFAULT_FACTORS),
    )


def _read(path: Path) -> str:
    if not path.exists():
        raise CliError(f"input file not found: {path}")
    return path.read_text(encoding="utf-8")


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    print(f"wrote {path}", file=sys.stderr)


def _load_gdp(path: Path, basis: PppBasis) -> dict:
    """Parse a GDP panel into {country: AnnualSeries}; gaps are fatal
    here (run validate to locate and repair them)."""
    panel = {s.country: s for s in parse_gdp_csv(_read(path), ppp_basis=basis)}
    for s in panel.values():
        if not s.is_complete:
            gaps = [y for y, v in zip(s.years(), s.values) if v is None]
            raise CliError(f"{path}: {s.country} is missing years {gaps}; "
                           f"run 'gdptrend validate' for a full report")
    return panel


def _population_for(panel: dict, pop: PopulationTable) -> PopulationTable:
    """Fill the population table so it covers each panel country's span."""
    entries: dict = {}
    for country, series in sorted(panel.items()):
        observed = {(c, y): e for (c, y), e in pop.entries.items()
                    if c == country}
        if not observed:
            raise CoverageError(f"population file has no data for {country}")
        sub = PopulationTable(entries=observed)
        filled, _ = fill_missing(sub, (series.start_year, series.end_year))
        entries.update(filled.entries)
    return PopulationTable(entries=entries)


def _corrected_panel(panel: dict, pop: PopulationTable) -> dict:
    filled = _population_for(panel, pop)
    return {c: correct_series(s, filled).as_series()
            for c, s in sorted(panel.items())}


def _slug(country: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "_", country).strip("_")


def cmd_validate(config: RunConfig, args) -> int:
    """Parse, repair, and validate the given files; exit 0 iff clean."""
    if not (config.gdp_eks or config.gdp_gk or config.population):
        raise CliError("validate needs at least one of --gdp-eks, --gdp-gk, "
                       "--population")
    report = ValidationReport()
    failed = False
    gdp_panels = []
    for path, basis in ((config.gdp_eks, PppBasis.EKS_2002),
                        (config.gdp_gk, PppBasis.GK_1990)):
        if path is None:
            continue
        series_list = parse_gdp_csv(_read(path), ppp_basis=basis)
        gdp_panels.append(series_list)
        for s in series_list:
            report.extend(validate_series(s))
            try:
                filled, fill_report = fill_missing(s)
            except FillError as e:
                print(f"error: {path}: {e}", file=sys.stderr)
                failed = True
                continue
            report.filled.extend(fill_report.filled)
            # gaps that were filled are no longer open
            repaired = {(c, y) for c, y, _ in fill_report.filled}
            report.gaps = [g for g in report.gaps if g not in repaired]

    if config.population is not None:
        pop = parse_population_csv(_read(config.population))
        spans: dict = {}
        for series_list in gdp_panels:
            for s in series_list:
                lo, hi = spans.get(s.country, (s.start_year, s.end_year))
                spans[s.country] = (min(lo, s.start_year),
                                    max(hi, s.end_year))
        for country in pop.countries():
            observed = {(c, y): e for (c, y), e in pop.entries.items()
                        if c == country}
            sub = PopulationTable(entries=observed)
            try:
                _, fill_report = fill_missing(sub, spans.get(country))
            except FillError as e:
                print(f"error: {config.population}: {e}", file=sys.stderr)
                failed = True
                continue
            report.filled.extend(fill_report.filled)
        missing = sorted(set(spans) - set(pop.countries()))
        if missing:
            print(f"warning: population file has no data for: "
                  f"{', '.join(missing)}", file=sys.stderr)

    report = report.sorted()
    if report.gaps or report.nonpositive:
        failed = True
    _write(config.out / "validation_report.txt", report.to_text())
    _write(config.out / "validation_report.json", report.to_json())
    sys.stdout.write(report.to_text())
    return 1 if failed else 0


def cmd_table1(config: RunConfig, args) -> int:
    """Cross-country means and trend slopes, CSV plus aligned text."""
    if config.gdp_eks is None:
        raise CliError("table1 needs --gdp-eks")
    eks = _load_gdp(config.gdp_eks, PppBasis.EKS_2002)
    pop = (parse_population_csv(_read(config.population))
           if config.population else None)
    eks_corr = _corrected_panel(eks, pop) if pop else None
    gk = _load_gdp(config.gdp_gk, PppBasis.GK_1990) if config.gdp_gk else None
    gk_corr = _corrected_panel(gk, pop) if (gk and pop) else None

    rows = country_table(eks, eks_corrected=eks_corr, gk_original=gk,
                         gk_corrected=gk_corr)
    _write(config.out / "table1.csv", render_table_csv(rows))
    text = render_table_text(rows)
    _write(config.out / "table1.txt", text)
    sys.stdout.write(text)

    factors = config.factors()
    applicable = [r for r in rows if r.country in factors]
    if applicable:
        lines = ["country,ppp_basis,mean_increment,factor,adjusted,"
                 "adjusted_rounded"]
        for r in applicable:
            mean = (r.mean_corrected if r.mean_corrected is not None
                    else r.mean_original)
            adj = specific_age_adjustment(mean, factors[r.country])
            lines.append(f"{r.country},{PppBasis.EKS_2002.value},{mean!r},"
                         f"{adj.factor!r},{adj.adjusted!r},{adj.rounded}")
        _write(config.out / "age_adjustments.csv", "\n".join(lines) + "\n")
    return 0


VARIANTS = ("eks_original", "eks_corrected", "gk_original", "subset")


def _dist_pool(config: RunConfig, variant: str):
    """Build the residual pool and its metadata for one variant."""
    if variant in ("eks_original", "eks_corrected", "subset"):
        if config.gdp_eks is None:
            raise CliError(f"dist {variant} needs --gdp-eks")
        panel = _load_gdp(config.gdp_eks, PppBasis.EKS_2002)
        basis = PppBasis.EKS_2002
    else:
        if config.gdp_gk is None:
            raise CliError("dist gk_original needs --gdp-gk")
        panel = _load_gdp(config.gdp_gk, PppBasis.GK_1990)
        basis = PppBasis.GK_1990

    if variant in ("eks_corrected", "subset"):
        if config.population is None:
            raise CliError(f"dist {variant} needs --population")
        pop = parse_population_csv(_read(config.population))
        panel = _corrected_panel(panel, pop)

    analyses = [increments(s) for _, s in sorted(panel.items())]
    meta = {"variant": variant, "ppp_basis": basis.value}
    if variant == "subset":
        pool = subset_pool(analyses, set(config.exclude),
                           centering=Centering.UNCENTERED)
        meta["excluded"] = sorted(config.exclude)
    else:
        pool = pool_residuals(
            analyses, centering=Centering.PER_COUNTRY_MEAN_SUBTRACTED)
    meta["centering"] = pool.centering.value
    meta["pool_mean"] = pool.mean()
    return pool, meta


def cmd_dist(config: RunConfig, args) -> int:
    """Histogram, normal fit, goodness of fit, tails for one variant."""
    variant = args.variant
    pool, meta = _dist_pool(config, variant)
    summary = summarize(pool, width=config.bin_width)
    _write(config.out / f"dist_{variant}.csv", emit_distribution_csv(summary))
    doc = distribution_json(summary, **meta)
    _write(config.out / f"dist_{variant}.json", doc)
    sys.stdout.write(doc)
    return 0


def cmd_compare(config: RunConfig, args) -> int:
    """Per-year increments of target countries against a reference mean.

    Runs on the 1990$ panel, the one basis available for non-member
    economies.
    """
    if config.gdp_gk is None:
        raise CliError("compare needs --gdp-gk (the 1990$ panel)")
    panel = _load_gdp(config.gdp_gk, PppBasis.GK_1990)
    if config.reference not in panel:
        raise CliError(f"reference country {config.reference!r} not in "
                       f"{config.gdp_gk}")
    unknown = sorted(set(args.targets) - set(panel))
    if unknown:
        raise CliError(f"target countries not in {config.gdp_gk}: "
                       f"{', '.join(unknown)}")

    ref_inc = increments(panel[config.reference])
    ref_mean = mean_increment(ref_inc)
    ratio_lines = ["country,ppp_basis,mean_increment,"
                   "reference_mean_increment,ratio"]
    for target in sorted(set(args.targets)):
        inc = increments(panel[target])
        lines = ["year,target_increment,reference_mean"]
        for year, (_, d) in zip(inc.years(), inc.pairs):
            lines.append(f"{year},{d!r},{ref_mean!r}")
        _write(config.out / f"compare_{_slug(target)}.csv",
               "\n".join(lines) + "\n")
        m = mean_increment(inc)
        ratio_lines.append(f"{target},{PppBasis.GK_1990.value},{m!r},"
                           f"{ref_mean!r},{m / ref_mean!r}")
    text = "\n".join(ratio_lines) + "\n"
    _write(config.out / "compare_ratios.csv", text)
    sys.stdout.write(text)
    return 0


def _noise_from_spec(doc: dict, seed: int) -> NoiseSpec:
    kind = str(doc.get("kind", "NONE")).upper()
    try:
        kind = NoiseKind(kind)
    except ValueError:
        raise CliError(f"unknown noise kind {doc.get('kind')!r}; expected "
                       f"one of {[k.value for k in NoiseKind]}") from None
    if kind is NoiseKind.NONE:
        return NoiseSpec.none()
    if kind is NoiseKind.NORMAL:
        return NoiseSpec.normal(sigma=float(doc["sigma"]), seed=seed)
    return NoiseSpec.mixture(sigma_core=float(doc["sigma_core"]),
                             sigma_tail=float(doc["sigma_tail"]),
                             tail_fraction=float(doc["tail_fraction"]),
                             seed=seed)


def cmd_simulate(config: RunConfig, args) -> int:
    """Generate a synthetic panel (and optional population) from a JSON
    simulation spec; see the README for the schema."""
    spec_path = Path(args.spec)
    try:
        spec = json.loads(_read(spec_path))
    except json.JSONDecodeError as e:
        raise CliError(f"{spec_path}: not valid JSON: {e}") from None
    try:
        years = int(spec["years"])
        start_year = int(spec.get("start_year", 1950))
        countries = spec["countries"]
    except KeyError as e:
        raise CliError(f"{spec_path}: missing required key {e}") from None
    if not countries:
        raise CliError(f"{spec_path}: 'countries' is empty")
    top_seed = args.seed if args.seed is not None else int(spec.get("seed", 0))
    default_noise = spec.get("noise", {"kind": "NONE"})

    series_list = []
    truths = []
    try:
        for i, c in enumerate(countries):
            name = c["country"]
            params = ModelParams(increment=float(c["increment"]),
                                 base_level=float(c["base_level"]),
                                 base_year=start_year)
            seed = int(c.get("seed", top_seed + i))
            noise = _noise_from_spec(c.get("noise", default_noise), seed)
            series, truth = generate(params, noise, years, country=name)
            series_list.append(series)
            truths.append(truth)
    except (KeyError, ValueError) as e:
        raise CliError(f"{spec_path}: bad country spec: {e}") from None

    _write(config.out / "gdp.csv", emit_gdp_csv(series_list))
    doc = {"seed": top_seed, "start_year": start_year, "years": years,
           "countries": [t.to_json_dict() for t in truths]}

    if "population" in spec:
        p = spec["population"]
        try:
            base_adult = int(p["base_adult"])
            path = linear_ratio_path(float(p["ratio_start"]),
                                     float(p["ratio_end"]), years)
        except (KeyError, ValueError) as e:
            raise CliError(f"{spec_path}: bad population spec: {e}") from None
        entries: dict = {}
        for s in series_list:
            table = generate_population(s.country, start_year, path,
                                        base_adult)
            entries.update(table.entries)
        _write(config.out / "population.csv",
               emit_population_csv(PopulationTable(entries=entries)))
        doc["population"] = {"base_adult": base_adult, "ratio_path": list(path)}

    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    _write(config.out / "ground_truth.json", text)
    sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None,
                        help="flat key=value config file")
    common.add_argument("--gdp-eks", dest="gdp_eks", type=Path, default=None,
                        help="GDP per capita panel at EKS PPPs (2002$)")
    common.add_argument("--gdp-gk", dest="gdp_gk", type=Path, default=None,
                        help="GDP per capita panel at Geary-Khamis PPPs "
                             "(1990$)")
    common.add_argument("--population", type=Path, default=None,
                        help="population file (flat or pyramid form)")
    common.add_argument("--reference", type=str, default=None,
                        help=f"reference country (default "
                             f"{DEFAULT_REFERENCE})")
    common.add_argument("--bin-width", dest="bin_width", type=float,
                        default=None,
                        help=f"histogram bin width (default "
                             f"{DEFAULT_BIN_WIDTH:g})")
    common.add_argument("--exclude", type=str, default=None,
                        help="comma-separated countries for the subset "
                             "variant")
    common.add_argument("--out", type=Path, default=None,
                        help="output directory (default .)")
    common.add_argument("--seed", type=int, default=None,
                        help="seed override for simulate")

    parser = argparse.ArgumentParser(
        prog="gdptrend",
        description="Decompose real GDP per capita growth into a "
                    "constant-increment trend and residual fluctuations.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common],
                       help="parse, repair, and validate input files")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("table1", parents=[common],
                       help="cross-country mean-increment and trend table")
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("dist", parents=[common],
                       help="residual histogram and normality diagnostics")
    p.add_argument("variant", type=str.lower, choices=VARIANTS)
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("compare", parents=[common],
                       help="per-year increments vs a reference country "
                            "(1990$ panel)")
    p.add_argument("targets", nargs="+", help="target countries")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("simulate", parents=[common],
                       help="generate a synthetic panel from a JSON spec")
    p.add_argument("spec", type=Path, help="simulation spec (JSON)")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = resolve_config(args)
        return args.func(config, args)
    except (CliError, ParseError, FillError, CoverageError, ValueError,
            OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
