# Authors: selfnormlab contributors
#
# License: 3-clause BSD
"""
Distributional distances and convergence verdicts.

A limit is described by one of

 - a cdf (a callable): finite-n samples are compared with a one-sample Kolmogorov-Smirnov distance,
 - a sample of the limit (an array or an `EmpiricalSample`): two-sample Kolmogorov-Smirnov distance,
 - a `PointLimit`: the distance is the concentration distance P(|stat - point| > tolerance).
"""
from collections import OrderedDict

try:  # python 3.5+
    from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union
    from logging import Logger
except ImportError:
    pass

import numpy as np
from autoclass import autodict
from scipy.stats import kstest, ks_2samp, kstwobign
from valid8 import validate

from .io_utils import default_logger
from .rng import RandomSource, as_random_source, replicate


MIN_REPLICATES = 1000
"""Minimum number of replicates for a convergence scan"""

CHUNK_BUDGET = 2 ** 21
"""Maximum number of scalar draws per replicate chunk"""

TREND_TOLERANCE = 0.2
"""Distances may not increase by more than this fraction from one n to the next"""


class GeneratorFailure(Exception):
    """
    Raised when a statistic generator fails. The sample size is attached, and the original error is the cause.
    """
    def __init__(self,
                 n,      # type: int
                 cause   # type: Exception
                 ):
        self.n = n
        self.cause = cause
        super(GeneratorFailure, self).__init__()

    def __str__(self):
        return "Statistic generator failed for n=%s: %s: %s" % (self.n, type(self.cause).__name__, self.cause)


class EmpiricalSample(object):
    """
    A labelled collection of finite replicates of a scalar statistic, with the provenance of the random streams used
    to produce it.
    """
    __slots__ = ('label', 'values', 'seed_provenance', 'n_inner', '_sorted')

    def __init__(self,
                 label,                # type: str
                 values,               # type: Union[np.ndarray, Sequence[float]]
                 seed_provenance=(),   # type: Sequence[Tuple[int, Tuple[int, ...]]]
                 n_inner=None          # type: Optional[int]
                 ):
        """

        :param label: an identifier of the sample
        :param values: the replicates. They must all be finite
        :param seed_provenance: a list of (seed, streams) pairs
        :param n_inner: the sample size used to compute each replicate, if any
        """
        values = np.asarray(values, dtype=float).ravel()
        validate('values', values, custom=lambda v: v.size > 0 and bool(np.isfinite(v).all()),
                 help_msg="values should be a non-empty array of finite reals")
        self.label = label
        self.values = values
        self.seed_provenance = list(seed_provenance)
        self.n_inner = n_inner
        self._sorted = None

    def __repr__(self):
        return "EmpiricalSample(label=%r, size=%s, n_inner=%r)" % (self.label, self.values.size, self.n_inner)

    def __len__(self):
        return self.values.size

    @property
    def sorted_values(self):
        # type: (...) -> np.ndarray
        """A sorted copy of the values, computed once"""
        if self._sorted is None:
            self._sorted = np.sort(self.values)
        return self._sorted


def _values_of(sample):
    if isinstance(sample, EmpiricalSample):
        return sample.sorted_values
    return np.asarray(sample, dtype=float).ravel()


def ks_one_sample(sample,  # type: Union[EmpiricalSample, np.ndarray]
                  cdf      # type: Callable
                  ):
    # type: (...) -> float
    """
    Returns sup_x |F_M(x) - F(x)| where F_M is the empirical cdf of the sample. `cdf` must be vectorized.

    >>> from scipy.stats import norm
    >>> ks_one_sample([0.], norm.cdf)
    0.5

    :param sample:
    :param cdf:
    :return:
    """
    return float(kstest(_values_of(sample), cdf).statistic)


def ks_two_sample(a,  # type: Union[EmpiricalSample, np.ndarray]
                  b   # type: Union[EmpiricalSample, np.ndarray]
                  ):
    # type: (...) -> float
    """
    Returns sup_x |F_a(x) - F_b(x)|.

    >>> ks_two_sample([1., 2.], [3., 4.])
    1.0

    :param a:
    :param b:
    :return:
    """
    return float(ks_2samp(_values_of(a), _values_of(b)).statistic)


def kolmogorov_critical(M,                     # type: int
                        level=0.95,            # type: float
                        two_sample_with=None   # type: Optional[int]
                        ):
    # type: (...) -> float
    """
    Returns the asymptotic critical value of the Kolmogorov-Smirnov distance at `level`, for a one-sample test with
    `M` replicates or a two-sample test with sizes `M` and `two_sample_with`.

    >>> round(kolmogorov_critical(10000), 4)
    0.0136

    :param M:
    :param level:
    :param two_sample_with:
    :return:
    """
    validate('M', M, min_value=1)
    validate('level', level, min_value=0, min_strict=True, max_value=1, max_strict=True)
    m_eff = M if two_sample_with is None else M * two_sample_with / (M + two_sample_with)
    return float(kstwobign.ppf(level) / np.sqrt(m_eff))


def concentration_distance(values,    # type: Union[EmpiricalSample, np.ndarray]
                           point,     # type: float
                           tolerance  # type: float
                           ):
    # type: (...) -> float
    """
    Returns P(|stat - point| > tolerance), estimated on the sample. Used for point limits.

    >>> concentration_distance([1., 1.05, 2.], point=1., tolerance=0.1)
    0.3333333333333333
    """
    validate('tolerance', tolerance, min_value=0)
    v = _values_of(values)
    return float(np.mean(np.abs(v - point) > tolerance))


@autodict
class PointLimit:
    """A degenerate limit: the statistic converges in probability to `point`"""
    def __init__(self,
                 point,     # type: float
                 tolerance  # type: float
                 ):
        self.point = point
        self.tolerance = tolerance


def _distance_kind(limit):
    if isinstance(limit, PointLimit):
        return 'concentration'
    elif callable(limit):
        return 'ks_one_sample'
    else:
        return 'ks_two_sample'


def distance_to_limit(sample,  # type: Union[EmpiricalSample, np.ndarray]
                      limit    # type: Union[Callable, EmpiricalSample, np.ndarray, PointLimit]
                      ):
    # type: (...) -> float
    """
    The distance between a finite-n sample and a limit, depending on how the limit is described.

    :param sample:
    :param limit: a cdf, a limit sample or a PointLimit
    :return:
    """
    kind = _distance_kind(limit)
    if kind == 'concentration':
        return concentration_distance(sample, limit.point, limit.tolerance)
    elif kind == 'ks_one_sample':
        return ks_one_sample(sample, limit)
    else:
        return ks_two_sample(sample, limit)


def convergence_verdict(distances,                        # type: Sequence[float]
                        threshold,                        # type: float
                        trend_tolerance=TREND_TOLERANCE,  # type: float
                        noise_floor=0.                    # type: float
                        ):
    # type: (...) -> bool
    """
    Returns True iff the last distance is below `threshold` and no distance increases by more than `trend_tolerance`
    (relative) from one n to the next. Increases that stay below `noise_floor` are tolerated.

    >>> convergence_verdict([0.1, 0.05, 0.02], threshold=0.025)
    True
    >>> convergence_verdict([0.01, 0.05, 0.02], threshold=0.025)
    False
    """
    if len(distances) == 0:
        return False
    if not distances[-1] < threshold:
        return False
    for d0, d1 in zip(distances[:-1], distances[1:]):
        if d1 > max(d0 * (1. + trend_tolerance), noise_floor):
            return False
    return True


@autodict
class ConvergenceReport:
    """
    The distances between a finite-n statistic and its limit along a grid of sample sizes, and the resulting verdict.
    The verdict can be recomputed from the other fields with `convergence_verdict`.
    """
    def __init__(self,
                 label,            # type: str
                 kind,             # type: str
                 n_grid,           # type: List[int]
                 distances,        # type: List[float]
                 threshold,        # type: float
                 verdict,          # type: str
                 replicates,       # type: int
                 trend_tolerance=TREND_TOLERANCE,  # type: float
                 noise_floor=0.,   # type: float
                 notes=None        # type: List[str]
                 ):
        """

        :param label: what is compared, e.g. 't=0.5'
        :param kind: 'ks_one_sample', 'ks_two_sample' or 'concentration'
        :param n_grid: the increasing sample sizes
        :param distances: the distance for each sample size
        :param threshold: the threshold that the last distance must be below
        :param verdict: 'pass' or 'fail'
        :param replicates: number of replicates per sample size
        :param trend_tolerance: the relative increase tolerated between consecutive distances
        :param noise_floor: increases below this distance are tolerated
        :param notes: free text notes
        """
        self.label = label
        self.kind = kind
        self.n_grid = n_grid
        self.distances = distances
        self.threshold = threshold
        self.verdict = verdict
        self.replicates = replicates
        self.trend_tolerance = trend_tolerance
        self.noise_floor = noise_floor
        self.notes = notes if notes is not None else []

    @property
    def passed(self):
        # type: (...) -> bool
        return self.verdict == 'pass'

    @property
    def final_distance(self):
        # type: (...) -> float
        return self.distances[-1]

    def recompute_verdict(self):
        # type: (...) -> str
        ok = convergence_verdict(self.distances, self.threshold, self.trend_tolerance, self.noise_floor)
        return 'pass' if ok else 'fail'


def make_report(label,        # type: str
                limit,        # type: Union[Callable, EmpiricalSample, np.ndarray, PointLimit]
                n_grid,       # type: Sequence[int]
                distances,    # type: Sequence[float]
                threshold,    # type: float
                replicates,   # type: int
                trend_tolerance=TREND_TOLERANCE,  # type: float
                noise_floor=None,  # type: float
                notes=None,   # type: List[str]
                logger=default_logger  # type: Logger
                ):
    # type: (...) -> ConvergenceReport
    """
    Builds a `ConvergenceReport`. The noise floor defaults to the 95% Kolmogorov critical value of the comparison.
    """
    kind = _distance_kind(limit)
    if noise_floor is None:
        other = None if kind != 'ks_two_sample' else len(_values_of(limit))
        noise_floor = kolmogorov_critical(replicates, two_sample_with=other)
    distances = [float(d) for d in distances]
    ok = convergence_verdict(distances, threshold, trend_tolerance, noise_floor)
    report = ConvergenceReport(label=label, kind=kind, n_grid=[int(n) for n in n_grid], distances=distances,
                               threshold=threshold, verdict='pass' if ok else 'fail', replicates=replicates,
                               trend_tolerance=trend_tolerance, noise_floor=noise_floor, notes=notes)
    logger.info("[%s] %s distances %s (threshold %.4g): %s"
                % (label, kind, ', '.join("n=%s: %.4f" % (n, d) for n, d in zip(n_grid, distances)), threshold,
                   report.verdict))
    return report


def chunk_size_for(n  # type: int
                   ):
    # type: (...) -> int
    """Number of replicates per chunk for statistics computed on samples of size n"""
    return max(1, CHUNK_BUDGET // max(1, n))


def draw_replicates(stat_generator,  # type: Callable[[int, int, RandomSource], np.ndarray]
                    n,               # type: int
                    M,               # type: int
                    rng,             # type: RandomSource
                    jobs=1           # type: int
                    ):
    # type: (...) -> np.ndarray
    """
    Draws `M` replicates of `stat_generator(n, count, rng)` over chunks of independent streams. Errors raised by the
    generator are wrapped in a `GeneratorFailure` with `n` attached.

    :param stat_generator:
    :param n:
    :param M:
    :param rng:
    :param jobs:
    :return:
    """
    def draw(count, chunk_rng):
        return stat_generator(n, count, chunk_rng)

    try:
        return replicate(draw, M, rng, chunk_size=chunk_size_for(n), jobs=jobs)
    except GeneratorFailure:
        raise
    except Exception as err:
        raise GeneratorFailure(n, err) from err


def _finite_sample(label, values, rng, n, logger):
    """Drops undefined (non-finite) replicates, and returns the sample together with the undefined fraction"""
    values = np.asarray(values, dtype=float)
    finite = np.isfinite(values)
    undefined = 1. - float(np.mean(finite))
    if undefined > 0:
        logger.info("[%s] n=%s: %.3g%% undefined replicates excluded" % (label, n, 100 * undefined))
    return EmpiricalSample(label, values[finite], seed_provenance=[rng.provenance], n_inner=n), undefined


def joint_convergence_scan(stat_generator,  # type: Callable[[int, int, RandomSource], np.ndarray]
                           limits,          # type: Dict[str, Union[Callable, EmpiricalSample, np.ndarray, PointLimit]]
                           n_grid,          # type: Sequence[int]
                           M,               # type: int
                           rng,             # type: Union[RandomSource, int]
                           thresholds,      # type: Union[float, Dict[str, float]]
                           label='',        # type: str
                           trend_tolerance=TREND_TOLERANCE,  # type: float
                           noise_floor=None,  # type: float
                           jobs=1,          # type: int
                           logger=default_logger,  # type: Logger
                           dump=None        # type: Dict[str, List[Tuple[int, np.ndarray]]]
                           ):
    # type: (...) -> Dict[str, ConvergenceReport]
    """
    A convergence scan of several statistics computed on the same replicates: `stat_generator(n, count, rng)` returns
    an array of shape (count, len(limits)), column j being compared with the j-th limit of the ordered dict `limits`.

    For each n in `n_grid` (k-th entry on stream `rng.split(k)`), `M` replicates are drawn. Undefined replicates (NaN)
    are excluded column by column, their fraction is logged and noted in the report.

    :param stat_generator: a function (n, count, rng) -> array of shape (count, len(limits))
    :param limits: an ordered dict of name -> limit (a cdf, a limit sample or a PointLimit)
    :param n_grid: the increasing sample sizes
    :param M: number of replicates per sample size, at least MIN_REPLICATES
    :param rng:
    :param thresholds: the final distance threshold, or a dict of thresholds by name
    :param label: a prefix for the report labels
    :param trend_tolerance:
    :param noise_floor:
    :param jobs: number of worker threads
    :param logger:
    :param dump: an optional dict that receives, for each name, the list of (n, finite replicates)
    :return: an ordered dict name -> report
    """
    validate('n_grid', list(n_grid), min_len=1, custom=lambda g: all(a < b for a, b in zip(g[:-1], g[1:])),
             help_msg="n_grid should be increasing")
    validate('M', M, min_value=MIN_REPLICATES)
    validate('limits', limits, min_len=1)
    rng = as_random_source(rng)
    names = list(limits.keys())

    distances = OrderedDict((name, []) for name in names)
    notes = OrderedDict((name, []) for name in names)
    for k, n in enumerate(n_grid):
        sub_rng = rng.split(k)
        values = np.asarray(draw_replicates(stat_generator, n, M, sub_rng, jobs=jobs), dtype=float)
        values = values.reshape(values.shape[0], -1)
        if values.shape[1] != len(names):
            raise GeneratorFailure(n, ValueError("expected %s columns, got %s" % (len(names), values.shape[1])))
        for j, name in enumerate(names):
            full_label = "%s%s" % (label + ' ' if label else '', name)
            sample, undefined = _finite_sample(full_label, values[:, j], sub_rng, n, logger)
            if undefined > 0:
                notes[name].append("n=%s: undefined fraction %.3g" % (n, undefined))
            distances[name].append(distance_to_limit(sample, limits[name]))
            if dump is not None:
                dump.setdefault(name, []).append((n, sample.values))

    reports = OrderedDict()
    for name in names:
        full_label = "%s%s" % (label + ' ' if label else '', name)
        thr = thresholds[name] if isinstance(thresholds, dict) else thresholds
        reports[name] = make_report(full_label, limits[name], n_grid, distances[name], thr, M,
                                    trend_tolerance=trend_tolerance, noise_floor=noise_floor, notes=notes[name],
                                    logger=logger)
    return reports


def convergence_scan(stat_generator,  # type: Callable[[int, int, RandomSource], np.ndarray]
                     limit,           # type: Union[Callable, EmpiricalSample, np.ndarray, PointLimit]
                     n_grid,          # type: Sequence[int]
                     M,               # type: int
                     rng,             # type: Union[RandomSource, int]
                     threshold,       # type: float
                     label='stat',    # type: str
                     trend_tolerance=TREND_TOLERANCE,  # type: float
                     noise_floor=None,  # type: float
                     jobs=1,          # type: int
                     logger=default_logger,  # type: Logger
                     dump=None        # type: Dict[str, List[Tuple[int, np.ndarray]]]
                     ):
    # type: (...) -> ConvergenceReport
    """
    For each n in `n_grid`, draws `M` replicates of `stat_generator(n, count, rng)` (n-th entry of the grid on stream
    `rng.split(k)`) and measures their distance to `limit`. See `joint_convergence_scan`.

    :param stat_generator: a function (n, count, rng) -> array of `count` replicates
    :param limit: a cdf, a limit sample or a PointLimit
    :param n_grid: the increasing sample sizes
    :param M: number of replicates per sample size, at least MIN_REPLICATES
    :param rng:
    :param threshold: the final distance threshold
    :param label:
    :param trend_tolerance:
    :param noise_floor:
    :param jobs: number of worker threads
    :param logger:
    :param dump:
    :return:
    """
    reports = joint_convergence_scan(stat_generator, OrderedDict([(label, limit)]), n_grid, M, rng, threshold,
                                     trend_tolerance=trend_tolerance, noise_floor=noise_floor, jobs=jobs,
                                     logger=logger, dump=dump)
    return reports[label]


def concentration_scan(stat_generator,  # type: Callable[[int, int, RandomSource], np.ndarray]
                       point,           # type: float
                       tolerance,       # type: float
                       n_grid,          # type: Sequence[int]
                       M,               # type: int
                       rng,             # type: Union[RandomSource, int]
                       threshold,       # type: float
                       label='concentration',  # type: str
                       jobs=1,          # type: int
                       logger=default_logger,  # type: Logger
                       dump=None        # type: Dict[str, List[Tuple[int, np.ndarray]]]
                       ):
    # type: (...) -> ConvergenceReport
    """
    A `convergence_scan` against the point limit `point`: the distance is P(|stat - point| > tolerance). This scan
    does not check any hypothesis on the statistic, it can be used on any generator.

    :return:
    """
    return convergence_scan(stat_generator, PointLimit(point, tolerance), n_grid, M, rng, threshold, label=label,
                            jobs=jobs, logger=logger, dump=dump)


def fdd_times(t_set  # type: Sequence[float]
              ):
    # type: (...) -> List[float]
    """
    The times where paths are evaluated by `fdd_check`: the sorted union of `t_set` and {0.5, 1}.

    >>> fdd_times([0.25, 1.])
    [0.25, 0.5, 1.0]
    """
    validate('t_set', list(t_set), min_len=1, custom=lambda ts: all(0 < t <= 1 for t in ts),
             help_msg="t_set should be a subset of (0, 1]")
    return sorted(set(float(t) for t in t_set) | {0.5, 1.})


def fdd_check(path_generator,    # type: Callable[[int, int, Sequence[float], RandomSource], np.ndarray]
              limit,             # type: Union[np.ndarray, Callable[[float, float], Callable]]
              n_grid,            # type: Sequence[int]
              M,                 # type: int
              rng,               # type: Union[RandomSource, int]
              threshold,         # type: float
              t_set=(0.25, 0.5, 0.75, 1.),  # type: Sequence[float]
              label='',          # type: str
              jobs=1,            # type: int
              logger=default_logger,  # type: Logger
              dump=None          # type: Dict[str, List[Tuple[int, np.ndarray]]]
              ):
    # type: (...) -> Dict[str, ConvergenceReport]
    """
    Finite-dimensional check of a functional convergence. The path statistic is evaluated at `fdd_times(t_set)`, then
    for each t in `t_set` the marginal at t is compared with the limit, as well as the increment between t = 0.5 and
    t = 1.

    :param path_generator: a function (n, count, times, rng) -> array of shape (count, len(times))
    :param limit: either an array of shape (M', len(times)) of limit paths evaluated at `times`, or a function
        `increment_cdf(s, t)` returning the cdf of the limit's X(t) - X(s) (s = 0 for the marginals)
    :param n_grid:
    :param M:
    :param rng:
    :param threshold:
    :param t_set: times in (0, 1]
    :param label: a prefix for the report labels
    :param jobs:
    :param logger:
    :param dump:
    :return: an ordered dict of reports: one per t ('t=0.25', ...) and one for the increment ('increment')
    """
    times = fdd_times(t_set)
    idx = {t: i for i, t in enumerate(times)}
    checks = [("t=%g" % t, None, idx[float(t)]) for t in t_set] + [("increment", idx[0.5], idx[1.])]

    def limit_for(first, second):
        if callable(limit):
            s = 0. if first is None else times[first]
            return limit(s, times[second])
        lim = np.asarray(limit, dtype=float)
        return lim[:, second] if first is None else lim[:, second] - lim[:, first]

    limits = OrderedDict((name, limit_for(first, second)) for name, first, second in checks)

    def draw(n, count, chunk_rng):
        paths = np.asarray(path_generator(n, count, times, chunk_rng), dtype=float)
        return np.column_stack([paths[:, second] if first is None else paths[:, second] - paths[:, first]
                                for _, first, second in checks])

    return joint_convergence_scan(draw, limits, n_grid, M, rng, threshold, label=label, jobs=jobs, logger=logger,
                                  dump=dump)
