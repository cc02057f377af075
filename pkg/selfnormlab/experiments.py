# Authors: selfnormlab contributors
#
# License: 3-clause BSD
"""
Named experiments. Each one binds a catalog model, the norming constants, the finite-n statistics and the simulated
limit objects into a set of convergence reports.

Experiments are registered with `@experiment`, which checks the hypotheses of the convergence statement on the model
before anything is simulated.
"""
import os
import re
from collections import OrderedDict
from time import perf_counter

try:  # python 3.5+
    from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple
    from logging import Logger
except ImportError:
    pass

import numpy as np
import pandas as pd
from autoclass import autodict
from decopatch import function_decorator, DECORATED
from makefun import wraps
from scipy.stats import norm

from .config import ConfigError, ExperimentConfig, RunConfig
from .doa_models import DistributionModel, get_model
from .io_utils import default_logger, write_csv, write_json
from .levy_sim import limit_path_sample, limit_spec_for, limit_statistic_sample
from .norming import compute_an, compute_bn, feller_gamma, feller_sequence, km_ratio, KM_GRID
from .rng import RandomSource
from .selfnorm import max_ratios, scalar_triple, self_normalized_sum, sn_path, student_process
from .stable_laws import StableParams, tabulated_cdf
from .stats import ConvergenceReport, PointLimit, concentration_scan, convergence_scan, draw_replicates, \
    fdd_check, fdd_times, joint_convergence_scan, kolmogorov_critical


EXPERIMENT_ID = '__selfnormlab_experiment__'

EXPERIMENTS = OrderedDict()  # type: Dict[str, Callable]
"""The registry of experiments, by name"""

DEFAULT_THRESHOLDS = OrderedDict([
    ('gaussian', 0.025),
    ('fdd', 0.04),
    ('cross', 0.03),
    ('triple', 0.04),
    ('max_ratio', 0.04),
    ('in_probability', 0.01),
    ('lemma', 0.03),
    ('degenerate', 0.1),
    ('degenerate_tolerance', 0.1),
    ('raikov_tolerance', 0.05),
    ('km_bounded_rtol', 0.05),
])
"""Default thresholds by name. Configuration blocks override them with `threshold_<name>` fields."""

THRESHOLD_INFLATION = 1.5
"""Distance thresholds are at least this multiple of the 95% Kolmogorov critical value"""

SCALAR_REPLICATES = 20000
PATH_REPLICATES = 5000

COHERENCE_FACTOR = 2.
"""S_n / V_n distances measured by two experiments on the same model agree within this factor"""

IN_PROBABILITY_DELTAS = (0.1, 0.05)

# streams below an experiment stream
FINITE_STREAM = 0
LIMIT_STREAM = 1
CROSS_STREAM = 2


# ---- hypotheses

class Clause(object):
    """A named hypothesis on a catalog model"""
    __slots__ = ('text', 'check')

    def __init__(self,
                 text,   # type: str
                 check   # type: Callable[[DistributionModel], bool]
                 ):
        self.text = text
        self.check = check

    def __repr__(self):
        return "Clause(%r)" % self.text


IN_STABLE_DOMAIN = Clause("alpha in (0, 2]", lambda m: m.alpha_attractor is not None)
ZERO_MEAN = Clause("EX = 0 if alpha > 1", lambda m: m.alpha_attractor <= 1 or m.mean == 0)
FELLER = Clause("n E sin(X / a_n) converges if alpha = 1",
                lambda m: m.alpha_attractor != 1 or bool(m.feller_condition))
ALPHA_ABOVE_ONE = Clause("alpha in (1, 2]", lambda m: m.alpha_attractor > 1)
FINITE_MEAN = Clause("EX finite", lambda m: m.mean is not None)
SLOWLY_VARYING = Clause("P(|X| > x) slowly varying", lambda m: m.slowly_varying_tail)

MAIN_CLAUSES = (IN_STABLE_DOMAIN, ZERO_MEAN, FELLER)


class HypothesisViolation(Exception):
    """
    Raised when an experiment is run on a model that violates one of its hypotheses.
    """
    def __init__(self,
                 experiment,  # type: str
                 model,       # type: str
                 clause       # type: str
                 ):
        self.experiment = experiment
        self.model = model
        self.clause = clause
        super(HypothesisViolation, self).__init__()

    def __str__(self):
        return "Experiment '%s' can not run on model '%s': hypothesis '%s' is violated" \
               % (self.experiment, self.model, self.clause)


def check_hypotheses(experiment_name,  # type: str
                     model,            # type: DistributionModel
                     clauses           # type: Sequence[Clause]
                     ):
    """
    Raises a `HypothesisViolation` naming the first clause of `clauses` that `model` violates.

    :param experiment_name:
    :param model:
    :param clauses:
    :return:
    """
    for clause in clauses:
        if not clause.check(model):
            raise HypothesisViolation(experiment_name, model.name, clause.text)


@function_decorator
def experiment(name=None,   # type: str
               clauses=(),  # type: Sequence[Clause]
               f=DECORATED
               ):
    """
    A decorator to register an experiment function `f(config, rng, jobs, logger)` under `name` (default: the function
    name).

    The wrapper resolves the model of the configuration and checks `clauses` on it before calling `f`, so that
    hypothesis violations are raised before any simulation. When no `rng` is provided, one is created from the
    configuration seed.

    :param name: the experiment name used in configuration files
    :param clauses: the hypotheses that the model must satisfy
    """
    exp_name = name if name is not None else f.__name__

    @wraps(f)
    def run_checked(config,                # type: ExperimentConfig
                    rng=None,              # type: RandomSource
                    jobs=1,                # type: int
                    logger=default_logger  # type: Logger
                    ):
        check_hypotheses(exp_name, get_model(config.model), clauses)
        if rng is None:
            rng = RandomSource(config.seed if config.seed is not None else 0)
        return f(config, rng=rng, jobs=jobs, logger=logger)

    setattr(run_checked, EXPERIMENT_ID, exp_name)
    run_checked.clauses = tuple(clauses)
    EXPERIMENTS[exp_name] = run_checked
    return run_checked


def get_experiment(name  # type: str
                   ):
    # type: (...) -> Callable
    """
    Returns the registered experiment `name`.
    """
    try:
        return EXPERIMENTS[name]
    except KeyError:
        raise ConfigError("unknown experiment '%s'. Available experiments: %s" % (name, list(EXPERIMENTS)),
                          field='experiment')


# ---- reports

@autodict
class ExperimentReport:
    """
    The result of an experiment: its convergence reports, the overall verdict, and the constants that were used.
    The verdict is 'pass' when all reports pass, 'fail' otherwise, or 'excluded' when the model is out of scope of a
    diagnostic.
    """
    def __init__(self,
                 experiment,        # type: str
                 model,             # type: str
                 alpha,             # type: Optional[float]
                 n_grid,            # type: List[int]
                 reports,           # type: Dict[str, ConvergenceReport]
                 verdict,           # type: str
                 seeds,             # type: List
                 block=None,        # type: str
                 notes=None,        # type: List[str]
                 constants=None,    # type: Dict[str, Any]
                 table=None         # type: List[Dict[str, Any]]
                 ):
        self.experiment = experiment
        self.model = model
        self.alpha = alpha
        self.n_grid = n_grid
        self.reports = reports
        self.verdict = verdict
        self.seeds = seeds
        self.block = block
        self.notes = notes if notes is not None else []
        self.constants = constants if constants is not None else OrderedDict()
        self.table = table
        self.samples = None

    @property
    def passed(self):
        # type: (...) -> bool
        return self.verdict != 'fail'

    def to_json_dict(self):
        # type: (...) -> Dict[str, Any]
        """The json representation of the report. Raw samples are not included."""
        return OrderedDict([
            ('experiment', self.experiment),
            ('block', self.block),
            ('model', self.model),
            ('alpha', self.alpha),
            ('n_grid', list(self.n_grid)),
            ('verdict', self.verdict),
            ('seeds', self.seeds),
            ('constants', self.constants),
            ('notes', self.notes),
            ('reports', OrderedDict((name, dict(r)) for name, r in self.reports.items())),
            ('table', self.table),
        ])


def _finish(exp_name,     # type: str
            config,       # type: ExperimentConfig
            model,        # type: DistributionModel
            reports,      # type: Dict[str, ConvergenceReport]
            rng,          # type: RandomSource
            constants,    # type: Dict[str, Any]
            dump,         # type: Optional[Dict]
            logger,       # type: Logger
            notes=None    # type: List[str]
            ):
    # type: (...) -> ExperimentReport
    verdict = 'pass' if all(r.passed for r in reports.values()) else 'fail'
    report = ExperimentReport(experiment=exp_name, model=model.name, alpha=model.alpha_attractor,
                              n_grid=list(config.n_grid), reports=reports, verdict=verdict,
                              seeds=[rng.provenance], notes=notes, constants=constants)
    report.samples = dump
    logger.info("%s on %s: %s" % (exp_name, model.name, verdict))
    return report


# ---- shared helpers

def _threshold(config,            # type: ExperimentConfig
               name,              # type: str
               M=None,            # type: int
               two_sample=False   # type: bool
               ):
    # type: (...) -> float
    """The threshold `name`: the configured one, else the default raised to 1.5x the Kolmogorov critical value"""
    if name in config.thresholds:
        return config.thresholds[name]
    default = DEFAULT_THRESHOLDS[name]
    if M is None:
        return default
    crit = kolmogorov_critical(M, two_sample_with=M if two_sample else None)
    return max(default, THRESHOLD_INFLATION * crit)


def _replicates(config, default):
    return config.replicates if config.replicates is not None else default


def _norming_constants(model,     # type: DistributionModel
                       n_grid,    # type: Sequence[int]
                       an_scale,  # type: float
                       logger     # type: Logger
                       ):
    # type: (...) -> Dict[int, float]
    a_ns = OrderedDict()
    for n in n_grid:
        a_ns[n] = compute_an(model, n) * an_scale
    logger.info("a_n for %s%s: %s" % (model.name, " (scaled by %g)" % an_scale if an_scale != 1 else "",
                                      ', '.join("n=%s: %.6g" % (n, a) for n, a in a_ns.items())))
    return a_ns


def _gamma_prime(model,   # type: DistributionModel
                 n_grid,  # type: Sequence[int]
                 logger   # type: Logger
                 ):
    # type: (...) -> float
    """The location of the limit: n E sin(X / a_n) at the largest n for alpha = 1, 0 otherwise"""
    if model.alpha_attractor != 1:
        return 0.
    n_max = max(n_grid)
    gp = feller_gamma(model, n_max)
    logger.info("gamma' for %s estimated at n=%s: %.6g" % (model.name, n_max, gp))
    return gp


def _brownian_increment_cdf(s, t):
    return norm(scale=np.sqrt(t - s)).cdf


def _self_normalized_paths(model):
    def generate(n, count, times, rng):
        rows, _ = model.sample_scaled(rng, (count, n))
        return sn_path(rows, times).values
    return generate


def _fdd_limit(model,   # type: DistributionModel
               config,  # type: ExperimentConfig
               M,       # type: int
               rng,     # type: RandomSource
               jobs,    # type: int
               logger,  # type: Logger
               constants  # type: Dict[str, Any]
               ):
    """The limit of the self-normalized process and the threshold of its fdd check"""
    alpha = model.alpha_attractor
    if alpha == 2:
        # X(t) / sqrt([X]_1) is a standard brownian motion
        return _brownian_increment_cdf, _threshold(config, 'gaussian', M)

    gp = _gamma_prime(model, config.n_grid, logger)
    constants['gamma_prime'] = gp
    spec = limit_spec_for(alpha, model.p_balance)
    limit = limit_path_sample(spec, gp, fdd_times(config.t_set), M, rng.split(LIMIT_STREAM),
                              epsilon=config.epsilon, jobs=jobs)
    return limit, _threshold(config, 'fdd', M, two_sample=True)


# ---- experiments

@experiment(clauses=MAIN_CLAUSES)
def exp_theorem_main(config,                # type: ExperimentConfig
                     rng=None,              # type: RandomSource
                     jobs=1,                # type: int
                     logger=default_logger  # type: Logger
                     ):
    # type: (...) -> ExperimentReport
    """
    Functional convergence of t -> S_[nt] / V_n to t -> X(t) / sqrt([X]_1), checked on finite-dimensional marginals
    and on the increment between t = 1/2 and t = 1.

    :param config:
    :param rng:
    :param jobs:
    :param logger:
    :return:
    """
    model = get_model(config.model)
    M = _replicates(config, PATH_REPLICATES)
    constants = OrderedDict()
    limit, threshold = _fdd_limit(model, config, M, rng, jobs, logger, constants)

    dump = OrderedDict() if config.dump else None
    reports = fdd_check(_self_normalized_paths(model), limit, config.n_grid, M, rng.split(FINITE_STREAM), threshold,
                        t_set=config.t_set, label=model.name, jobs=jobs, logger=logger, dump=dump)
    return _finish('exp_theorem_main', config, model, reports, rng, constants, dump, logger)


@experiment(clauses=(IN_STABLE_DOMAIN, ALPHA_ABOVE_ONE, FINITE_MEAN))
def exp_student(config,                # type: ExperimentConfig
                rng=None,              # type: RandomSource
                jobs=1,                # type: int
                logger=default_logger  # type: Logger
                ):
    # type: (...) -> ExperimentReport
    """
    Convergence of the student process T_{n,t}(X - mu) to X(t) / sqrt([X]_1), plus a cross check at the largest n:
    the student statistic of the model and S_n / V_n of the centered model have the same limit.

    :param config:
    :param rng:
    :param jobs:
    :param logger:
    :return:
    """
    model = get_model(config.model)
    mu = model.mean
    M = _replicates(config, PATH_REPLICATES)
    constants = OrderedDict([('mu', mu)])
    limit, threshold = _fdd_limit(model, config, M, rng, jobs, logger, constants)

    def student_paths(n, count, times, r):
        return student_process(model.sample(r, (count, n)), mu, times)

    dump = OrderedDict() if config.dump else None
    reports = fdd_check(student_paths, limit, config.n_grid, M, rng.split(FINITE_STREAM), threshold,
                        t_set=config.t_set, label="%s student" % model.name, jobs=jobs, logger=logger, dump=dump)

    # two routes to the same limit
    n_max = max(config.n_grid)
    centered = model.centered()

    def centered_sn(n, count, r):
        rows, _ = centered.sample_scaled(r, (count, n))
        return self_normalized_sum(rows)

    def student_at_one(n, count, r):
        return student_process(model.sample(r, (count, n)), mu, 1.)

    cross_rng = rng.split(CROSS_STREAM)
    reference = draw_replicates(centered_sn, n_max, M, cross_rng.split(0), jobs=jobs)
    reports['cross'] = convergence_scan(student_at_one, reference, [n_max], M, cross_rng.split(1),
                                        _threshold(config, 'cross', M, two_sample=True),
                                        label="%s cross" % model.name, jobs=jobs, logger=logger)
    return _finish('exp_student', config, model, reports, rng, constants, dump, logger)


@experiment(clauses=MAIN_CLAUSES)
def exp_triple_raikov(config,                # type: ExperimentConfig
                      rng=None,              # type: RandomSource
                      jobs=1,                # type: int
                      logger=default_logger  # type: Logger
                      ):
    # type: (...) -> ExperimentReport
    """
    Joint convergence of (S_n / a_n, V_n^2 / a_n^2, max |X_i| / a_n) to (X(1), [X]_1, J), checked on each marginal,
    plus S_n / V_n against X(1) / sqrt([X]_1). With `an_scale` != 1 this is a negative control.

    :param config:
    :param rng:
    :param jobs:
    :param logger:
    :return:
    """
    model = get_model(config.model)
    M = _replicates(config, SCALAR_REPLICATES)
    a_ns = _norming_constants(model, config.n_grid, config.an_scale, logger)
    constants = OrderedDict([('a_n', a_ns), ('an_scale', config.an_scale)])

    def triples(n, count, r):
        rows, log_m = model.sample_scaled(r, (count, n))
        tr = scalar_triple(rows, a_ns[n], scale=np.exp(log_m))
        return np.column_stack([tr.s_over_a, tr.v2_over_a2, tr.max_over_a, self_normalized_sum(rows)])

    if model.alpha_attractor == 2:
        tol = _threshold(config, 'raikov_tolerance')
        limits = OrderedDict([('s_over_a', norm.cdf),
                              ('v2_over_a2', PointLimit(1., tol)),
                              ('max_over_a', PointLimit(0., tol)),
                              ('self_normalized', norm.cdf)])
        ks_thr = _threshold(config, 'gaussian', M)
        thresholds = OrderedDict([('s_over_a', ks_thr), ('v2_over_a2', _threshold(config, 'triple')),
                                  ('max_over_a', _threshold(config, 'triple')), ('self_normalized', ks_thr)])
    else:
        gp = _gamma_prime(model, config.n_grid, logger)
        constants['gamma_prime'] = gp
        spec = limit_spec_for(model.alpha_attractor, model.p_balance)
        ls = limit_statistic_sample(spec, gp, M, rng.split(LIMIT_STREAM), epsilon=config.epsilon, jobs=jobs)
        limits = OrderedDict([('s_over_a', ls.sample('x1')),
                              ('v2_over_a2', ls.sample('qv')),
                              ('max_over_a', ls.sample('big_jump')),
                              ('self_normalized', ls.sample('self_normalized'))])
        thresholds = _threshold(config, 'triple', M, two_sample=True)

    dump = OrderedDict() if config.dump else None
    reports = joint_convergence_scan(triples, limits, config.n_grid, M, rng.split(FINITE_STREAM), thresholds,
                                     label=model.name, jobs=jobs, logger=logger, dump=dump)
    return _finish('exp_triple_raikov', config, model, reports, rng, constants, dump, logger)


@experiment(clauses=MAIN_CLAUSES)
def exp_max_ratios(config,                # type: ExperimentConfig
                   rng=None,              # type: RandomSource
                   jobs=1,                # type: int
                   logger=default_logger  # type: Logger
                   ):
    # type: (...) -> ExperimentReport
    """
    Convergence of max |X_i| / S_n to J / X(1) and of max |X_i| / V_n to J / sqrt([X]_1). For alpha = 2 the limits
    are zero and max |X_i| / V_n is checked in probability: P(ratio > delta) for each delta of IN_PROBABILITY_DELTAS.

    :param config:
    :param rng:
    :param jobs:
    :param logger:
    :return:
    """
    model = get_model(config.model)
    M = _replicates(config, SCALAR_REPLICATES)
    constants = OrderedDict()
    notes = []

    if model.alpha_attractor == 2:
        names = ["max_over_v@%g" % d for d in IN_PROBABILITY_DELTAS]
        limits = OrderedDict((name, PointLimit(0., d)) for name, d in zip(names, IN_PROBABILITY_DELTAS))
        thresholds = _threshold(config, 'in_probability')

        def ratios(n, count, r):
            rows, _ = model.sample_scaled(r, (count, n))
            over_v = max_ratios(rows)[1]
            return np.column_stack([over_v] * len(names))
    else:
        gp = _gamma_prime(model, config.n_grid, logger)
        constants['gamma_prime'] = gp
        spec = limit_spec_for(model.alpha_attractor, model.p_balance)
        ls = limit_statistic_sample(spec, gp, M, rng.split(LIMIT_STREAM), epsilon=config.epsilon, jobs=jobs)
        j_over_x1 = ls.sample('jump_over_x1')
        if len(j_over_x1) < M:
            notes.append("limit J / X(1): %s undefined replicates excluded" % (M - len(j_over_x1)))
        limits = OrderedDict([('max_over_s', j_over_x1), ('max_over_v', ls.sample('jump_over_root_qv'))])
        thresholds = _threshold(config, 'max_ratio', M, two_sample=True)

        def ratios(n, count, r):
            rows, _ = model.sample_scaled(r, (count, n))
            return np.column_stack(max_ratios(rows))

    dump = OrderedDict() if config.dump else None
    reports = joint_convergence_scan(ratios, limits, config.n_grid, M, rng.split(FINITE_STREAM), thresholds,
                                     label=model.name, jobs=jobs, logger=logger, dump=dump)
    return _finish('exp_max_ratios', config, model, reports, rng, constants, dump, logger, notes=notes)


@experiment(clauses=(IN_STABLE_DOMAIN, ))
def exp_lemma_scalar(config,                # type: ExperimentConfig
                     rng=None,              # type: RandomSource
                     jobs=1,                # type: int
                     logger=default_logger  # type: Logger
                     ):
    # type: (...) -> ExperimentReport
    """
    Convergence of S_n / a_n - b_n to the stable law S(alpha, 0, 1, p, q), with a one-sample Kolmogorov-Smirnov
    distance against its cdf.

    :param config:
    :param rng:
    :param jobs:
    :param logger:
    :return:
    """
    model = get_model(config.model)
    M = _replicates(config, SCALAR_REPLICATES)
    a_ns = _norming_constants(model, config.n_grid, config.an_scale, logger)
    b_ns = OrderedDict((n, compute_bn(model, n, a_n=a_ns[n])) for n in config.n_grid)
    logger.info("b_n for %s: %s" % (model.name, ', '.join("n=%s: %.6g" % (n, b) for n, b in b_ns.items())))
    constants = OrderedDict([('a_n', a_ns), ('b_n', b_ns)])
    if model.alpha_attractor == 1 and config.an_scale == 1:
        constants['feller_sequence'] = dict(feller_sequence(model, config.n_grid, logger=logger))

    def centered_sums(n, count, r):
        rows, log_m = model.sample_scaled(r, (count, n))
        return rows.sum(axis=-1) * (np.exp(log_m) / a_ns[n]) - b_ns[n]

    params = StableParams(model.alpha_attractor, 0., 1., model.p_balance, model.q_balance)
    limit = tabulated_cdf(params)

    dump = OrderedDict() if config.dump else None
    report = convergence_scan(centered_sums, limit, config.n_grid, M, rng.split(FINITE_STREAM),
                              _threshold(config, 'lemma', M), label="%s centered sum" % model.name, jobs=jobs,
                              logger=logger, dump=dump)
    return _finish('exp_lemma_scalar', config, model, OrderedDict([('centered_sum', report)]), rng, constants, dump,
                   logger)


def degenerate_scan(model,     # type: DistributionModel
                    config,    # type: ExperimentConfig
                    rng,       # type: RandomSource
                    jobs=1,    # type: int
                    logger=default_logger,  # type: Logger
                    dump=None  # type: Dict
                    ):
    # type: (...) -> ConvergenceReport
    """
    The concentration of |S_n / V_n| at 1, measured by P(||S_n / V_n| - 1| > tolerance), for any model. This is not
    gated, so that it can be used on models for which it is expected to fail.

    :param model:
    :param config:
    :param rng:
    :param jobs:
    :param logger:
    :param dump:
    :return:
    """
    def abs_sn(n, count, r):
        rows, _ = model.sample_scaled(r, (count, n))
        return np.abs(self_normalized_sum(rows))

    return concentration_scan(abs_sn, 1., _threshold(config, 'degenerate_tolerance'), config.n_grid,
                              _replicates(config, SCALAR_REPLICATES), rng, _threshold(config, 'degenerate'),
                              label="%s |S_n / V_n|" % model.name, jobs=jobs, logger=logger, dump=dump)


@experiment(clauses=(SLOWLY_VARYING, ))
def exp_degenerate(config,                # type: ExperimentConfig
                   rng=None,              # type: RandomSource
                   jobs=1,                # type: int
                   logger=default_logger  # type: Logger
                   ):
    # type: (...) -> ExperimentReport
    """
    For a slowly varying tail, |S_n / V_n| converges to 1 in probability.

    :param config:
    :param rng:
    :param jobs:
    :param logger:
    :return:
    """
    model = get_model(config.model)
    dump = OrderedDict() if config.dump else None
    report = degenerate_scan(model, config, rng.split(FINITE_STREAM), jobs=jobs, logger=logger, dump=dump)
    return _finish('exp_degenerate', config, model, OrderedDict([('abs_self_normalized', report)]), rng,
                   OrderedDict(), dump, logger)


def km_table(model,       # type: DistributionModel
             x_grid=KM_GRID  # type: Sequence[float]
             ):
    # type: (...) -> List[Dict[str, float]]
    """The ratio of `km_ratio` at each x of the grid, as a list of records"""
    return [OrderedDict([('x', float(x)), ('ratio', km_ratio(model, x))]) for x in x_grid]


@experiment
def exp_km_diagnostic(config,                # type: ExperimentConfig
                      rng=None,              # type: RandomSource
                      jobs=1,                # type: int
                      logger=default_logger  # type: Logger
                      ):
    # type: (...) -> ExperimentReport
    """
    Tabulates (x |E[X 1{|X| <= x}]| + l(x)) / (x^2 P(|X| > x)) on x = 10, ..., 10^4. The verdict checks the expected
    behaviour: growth (max |X_i| / |S_n| -> 0) for alpha = 2 or when the truncated mean does not vanish, a finite
    limit for the other stable cases, decrease for a slowly varying tail. Bounded-support models are excluded.

    :param config:
    :param rng:
    :param jobs:
    :param logger:
    :return:
    """
    model = get_model(config.model)
    notes, constants = [], OrderedDict()
    if model.bounded_support:
        notes.append("model %s has a bounded support: P(|X| > x) = 0 on the grid, the ratio is undefined"
                     % model.name)
        report = ExperimentReport('exp_km_diagnostic', model.name, model.alpha_attractor, list(config.n_grid),
                                  OrderedDict(), 'excluded', seeds=[], notes=notes, constants=constants)
        logger.info("exp_km_diagnostic on %s: excluded" % model.name)
        return report

    table = km_table(model)
    ratios = [row['ratio'] for row in table]
    diffs = np.diff(ratios)
    alpha = model.alpha_attractor
    if alpha is not None and 1 <= alpha < 2:
        # x |E[X 1{|X| <= x}]| dominates when the truncated mean does not vanish
        centered = model.mean == 0 if alpha > 1 else model.p_balance == model.q_balance
    else:
        centered = True
    if alpha == 2 or not centered:
        expected, ok = 'growth', bool(np.all(diffs > 0))
    elif alpha is None:
        expected, ok = 'decrease', bool(np.all(diffs < 0))
    else:
        rtol = _threshold(config, 'km_bounded_rtol')
        expected, ok = 'finite limit', abs(ratios[-1] - ratios[-2]) <= rtol * abs(ratios[-1])
    constants['expected'] = expected
    constants['monotone_growth'] = bool(np.all(diffs > 0))
    logger.info("km ratio for %s: %s" % (model.name, ', '.join("x=%g: %.6g" % (r['x'], r['ratio']) for r in table)))

    report = ExperimentReport('exp_km_diagnostic', model.name, alpha, list(config.n_grid), OrderedDict(),
                              'pass' if ok else 'fail', seeds=[], notes=notes, constants=constants, table=table)
    logger.info("exp_km_diagnostic on %s: %s" % (model.name, report.verdict))
    return report


# ---- runs

def _slug(name):
    return re.sub(r'[^A-Za-z0-9.]+', '_', name).strip('_')


def write_dumps(block,       # type: str
                report,      # type: ExperimentReport
                output_dir,  # type: str
                logger=default_logger  # type: Logger
                ):
    # type: (...) -> List[str]
    """
    Writes the raw samples of `report` as `<block>_<label>.csv` files with columns `n,value`.

    :return: the list of written paths
    """
    paths = []
    for name, entries in (report.samples or dict()).items():
        df = pd.concat([pd.DataFrame({'n': np.full(len(values), n, dtype=int), 'value': values})
                        for n, values in entries], ignore_index=True)
        path = os.path.join(output_dir, "%s_%s.csv" % (block, _slug(name)))
        write_csv(df, path, logger=logger)
        paths.append(path)
    return paths


def run_experiment(block,        # type: str
                   config,       # type: ExperimentConfig
                   rng,          # type: RandomSource
                   output_dir,   # type: str
                   jobs=1,       # type: int
                   logger=default_logger  # type: Logger
                   ):
    # type: (...) -> Tuple[ExperimentReport, str]
    """
    Runs the experiment of block `block` and writes its json report (and raw samples when `config.dump` is set) to
    `output_dir`.

    :return: the report and the path of the json file
    """
    func = get_experiment(config.experiment)
    logger.info("---- [%s] %s on %s" % (block, config.experiment, config.model))
    start = perf_counter()
    report = func(config, rng=rng, jobs=jobs, logger=logger)
    report.block = block
    logger.debug("[%s] done in %.1fs" % (block, perf_counter() - start))

    path = os.path.join(output_dir, config.output or "%s.json" % block)
    write_json(report.to_json_dict(), path, logger=logger)
    if config.dump:
        write_dumps(block, report, output_dir, logger=logger)
    return report, path


def run_all(run_config,            # type: RunConfig
            logger=default_logger  # type: Logger
            ):
    # type: (...) -> List[Tuple[str, ExperimentReport, str]]
    """
    Runs all experiment blocks of `run_config` in order. Block i uses the stream i below its seed (the block seed or
    the global one).

    :return: a list of (block, report, report path)
    """
    run_config.assert_valid_for_experiments(EXPERIMENTS.keys())
    run_config.check_budget()
    glob = run_config.global_config
    results = []
    for i, (block, exp_cfg) in enumerate(run_config.experiments.items()):
        rng = RandomSource(run_config.seed_for(block)).split(i)
        report, path = run_experiment(block, exp_cfg, rng, glob.output, jobs=glob.jobs, logger=logger)
        results.append((block, report, path))
    return results


# ---- coherence between experiments

@autodict
class CoherenceCheck:
    """
    S_n / V_n at the largest common n, seen through two harnesses: the t = 1 marginal of an `exp_theorem_main` block
    and the `self_normalized` check of an `exp_triple_raikov` block on the same model. Both distances should be within
    a factor `COHERENCE_FACTOR` of each other, unless both are below the noise floor.
    """
    def __init__(self,
                 main_block,       # type: str
                 triple_block,     # type: str
                 model,            # type: str
                 n,                # type: int
                 main_distance,    # type: float
                 triple_distance,  # type: float
                 noise_floor       # type: float
                 ):
        self.main_block = main_block
        self.triple_block = triple_block
        self.model = model
        self.n = n
        self.main_distance = main_distance
        self.triple_distance = triple_distance
        self.noise_floor = noise_floor

    @property
    def coherent(self):
        # type: (...) -> bool
        hi = max(self.main_distance, self.triple_distance)
        lo = min(self.main_distance, self.triple_distance)
        return hi <= self.noise_floor or hi <= COHERENCE_FACTOR * lo


def _distance_at(report,  # type: ConvergenceReport
                 n        # type: int
                 ):
    return report.distances[report.n_grid.index(n)]


def coherence_checks(results,               # type: Sequence[Tuple[str, ExperimentReport, str]]
                     logger=default_logger  # type: Logger
                     ):
    # type: (...) -> List[CoherenceCheck]
    """
    Compares every `exp_theorem_main` block with every `exp_triple_raikov` block run on the same model with at least
    one common sample size.

    :param results: the (block, report, path) list returned by `run_all`
    :param logger:
    :return: one `CoherenceCheck` per compared pair
    """
    mains = [(b, r) for b, r, _ in results if r.experiment == 'exp_theorem_main' and 't=1' in r.reports]
    triples = [(b, r) for b, r, _ in results if r.experiment == 'exp_triple_raikov']
    checks = []
    for main_block, main in mains:
        for triple_block, triple in triples:
            if main.model != triple.model:
                continue
            at_one, sn = main.reports['t=1'], triple.reports['self_normalized']
            common = set(at_one.n_grid) & set(sn.n_grid)
            if not common:
                continue
            n = max(common)
            check = CoherenceCheck(main_block, triple_block, main.model, n, _distance_at(at_one, n),
                                   _distance_at(sn, n), max(at_one.noise_floor, sn.noise_floor))
            if check.coherent:
                logger.info("[%s] t=1 and [%s] S_n/V_n are coherent at n=%s: %.4f vs %.4f"
                            % (main_block, triple_block, n, check.main_distance, check.triple_distance))
            else:
                logger.warning("[%s] t=1 and [%s] S_n/V_n disagree at n=%s: %.4f vs %.4f"
                               % (main_block, triple_block, n, check.main_distance, check.triple_distance))
            checks.append(check)
    return checks
