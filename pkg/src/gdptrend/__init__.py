"""Two-component decomposition of real GDP per capita growth.

Growth is modeled as a constant annual increment (the trend) plus
zero-mean fluctuations. The toolkit parses GDP and population panels,
applies the total/adult population-ratio correction, fits per-country
increment trends, pools residuals into histogram diagnostics against a
normal fit, projects the trend model, and ships a deterministic
synthetic-data generator so every estimator is testable without
licensed datasets.
"""

from .correction import (CorrectedSeries, CoverageError, PppComparison,
                         PppEntry, correct_series, emit_corrected_csv,
                         population_ratio, ppp_delta)
from .datastore import (AnnualSeries, FillError, ParseError, PopulationEntry,
                        PopulationTable, PppBasis, ValidationReport,
                        emit_gdp_csv, emit_population_csv, fill_missing,
                        parse_gdp_csv, parse_population_csv, validate_series)
from .fluctuations import (Centering, DistributionSummary, Histogram,
                           ResidualPool, TailReport, emit_distribution_csv,
                           distribution_json, expected_counts, gof_chi_square,
                           histogram, normal_fit, pool_residuals, subset_pool,
                           summarize, tail_excess)
from .growthmodel import (GapPoint, ModelParams, ProjectionError,
                          emit_gap_csv, emit_projection_csv, fit_model,
                          gap_trajectory, project, relative_rate)
from .synthlab import (GroundTruth, NoiseKind, NoiseSpec, SplitMix64,
                       generate, generate_population, linear_ratio_path)
from .trendlab import (AgeAdjustment, CountrySummaryRow, IncrementSeries,
                       TrendFit, amplitude, country_table,
                       emit_increments_csv, increments, linear_trend,
                       max_deviation, mean_increment, normalize_to_reference,
                       render_table_csv, render_table_text,
                       specific_age_adjustment)

__version__ = "0.1.0"
