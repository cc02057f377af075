# Authors: selfnormlab contributors
#
# License: 3-clause BSD
from .rng import RandomSource, replicate

from .stable_laws import StableParams, NumericalFailure, DegenerateLaw, UnsupportedConfiguration, cf_eval, \
    sample_stable, cdf_stable, ppf_stable, stable_cdf, tabulated_cdf
from .doa_models import DistributionModel, UnknownModel, get_model, catalog, sample_iid
from .norming import NormingError, NormingOverflow, BranchInapplicable, DivisionDomainError, compute_an, compute_bn, \
    feller_gamma, feller_sequence, norming_table, km_ratio
from .levy_sim import LevyMeasureSpec, GaussianSpec, LevyPath, ResourceError, levy_measure_for, limit_spec_for, \
    simulate_path, quadratic_variation, biggest_jump, limit_statistic_sample, limit_path_sample
from .selfnorm import DegenerateSample, sn_path, self_normalized_sum, student_process, student_from_selfnormalized, \
    max_ratios, scalar_triple
from .stats import EmpiricalSample, PointLimit, ConvergenceReport, GeneratorFailure, ks_one_sample, ks_two_sample, \
    convergence_verdict, convergence_scan, concentration_scan, fdd_check

from .config import GlobalConfig, ExperimentConfig, RunConfig, ConfigError, ConfigTemplateSyntaxError, \
    load_run_config, default_jobs
from .experiments import experiment, ExperimentReport, HypothesisViolation, CoherenceCheck, EXPERIMENTS, \
    DEFAULT_THRESHOLDS, run_experiment, run_all, coherence_checks

try:
    # Distribution mode : import from _version.py generated by setuptools_scm during release
    from ._version import version as __version__
except ImportError:
    # Source mode : use setuptools_scm to get the current version from src using git
    try:
        from setuptools_scm import get_version as _gv
        from os import path as _path
        __version__ = _gv(_path.join(_path.dirname(__file__), _path.pardir))
    except (ImportError, LookupError):
        # neither installed nor in a git checkout
        __version__ = '0.0.0+unknown'

__all__ = [
    '__version__',
    # submodules
    'rng', 'stable_laws', 'doa_models', 'norming', 'levy_sim', 'selfnorm', 'stats', 'config', 'experiments',
    'io_utils', 'cli',
    # symbols imported above
    # -- rng
    'RandomSource', 'replicate',
    # -- stable_laws
    'StableParams', 'NumericalFailure', 'DegenerateLaw', 'UnsupportedConfiguration', 'cf_eval', 'sample_stable',
    'cdf_stable', 'ppf_stable', 'stable_cdf', 'tabulated_cdf',
    # -- doa_models
    'DistributionModel', 'UnknownModel', 'get_model', 'catalog', 'sample_iid',
    # -- norming
    'NormingError', 'NormingOverflow', 'BranchInapplicable', 'DivisionDomainError', 'compute_an', 'compute_bn',
    'feller_gamma', 'feller_sequence', 'norming_table', 'km_ratio',
    # -- levy_sim
    'LevyMeasureSpec', 'GaussianSpec', 'LevyPath', 'ResourceError', 'levy_measure_for', 'limit_spec_for',
    'simulate_path', 'quadratic_variation', 'biggest_jump', 'limit_statistic_sample', 'limit_path_sample',
    # -- selfnorm
    'DegenerateSample', 'sn_path', 'self_normalized_sum', 'student_process', 'student_from_selfnormalized',
    'max_ratios', 'scalar_triple',
    # -- stats
    'EmpiricalSample', 'PointLimit', 'ConvergenceReport', 'GeneratorFailure', 'ks_one_sample', 'ks_two_sample',
    'convergence_verdict', 'convergence_scan', 'concentration_scan', 'fdd_check',
    # -- config
    'GlobalConfig', 'ExperimentConfig', 'RunConfig', 'ConfigError', 'ConfigTemplateSyntaxError', 'load_run_config',
    'default_jobs',
    # -- experiments
    'experiment', 'ExperimentReport', 'HypothesisViolation', 'CoherenceCheck', 'EXPERIMENTS', 'DEFAULT_THRESHOLDS',
    'run_experiment', 'run_all', 'coherence_checks',
]
