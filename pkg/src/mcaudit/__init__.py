"""Seed-controlled Monte Carlo core plus a PRNG suitability audit battery.

The library half provides deterministic generators (``rng_core``),
distribution sampling and replication management (``mc_engine``), the
statistical test battery (``stat_tests``) and the special functions
behind it (``special_functions``).  The ``mcaudit`` command line wraps
all of it into audit, bench, simulate and export workflows.
"""

from ._version import __version__
from .errors import (BudgetExceeded, DomainError, EmptySample,
                     InsufficientSample, InvalidSeed, LengthMismatch,
                     McAuditError, OutOfRangeSample, SampleTooSmall,
                     ZeroVariance)
from .rng_core import (GeneratorKind, GeneratorState, PeriodDescriptor,
                       RealConversion, default_conversion, new_generator,
                       period_of)
from .special_functions import (Probability, chi_square_cdf, chi_square_inv_sf,
                                chi_square_sf, ln_gamma, normal_cdf,
                                normal_inv, regularized_lower_gamma,
                                regularized_upper_gamma)
from .stat_tests import (ChiSquareReport, CorrelationReport, Histogram,
                         TestVerdict, chi_square_uniformity, export_scatter,
                         histogram, lag_correlation, serial_test, write_table)
from .mc_engine import (BudgetPolicy, BudgetReport, BudgetRule, Distribution,
                        Exponential, ModelFn, Normal, ReproducibilityManifest,
                        SimulationConfig, SummaryStats, Triangular, Uniform,
                        budget_check, confidence_interval,
                        derive_replication_seed, digest_outputs, fnv1a64,
                        pearson, rerun_from_manifest, run_simulation, sample,
                        summarize)

__all__ = [name for name in dir() if not name.startswith("_")]
