# Authors: selfnormlab contributors
#
# License: 3-clause BSD
"""
Simulation of the alpha-stable Levy process X on [0, 1] from its Levy-Ito decomposition, and of the limit objects
X(t) / sqrt([X]_1), the quadratic variation [X]_1 and the biggest jump J.

For 0 < alpha < 2 the Levy measure is nu(dx) = C alpha (p 1{x > 0} + q 1{x < 0}) |x|^(-alpha - 1) dx with
C = c (2 - alpha) / alpha, so that X(1) ~ S(alpha, gamma', c, p, q). With a truncation level eps, X is simulated as

    X(t) = b_eps t + (sum of the jumps of size |x| > eps up to t) + (small jumps)

where the jumps above eps form a compound Poisson process of rate C eps^-alpha, and the small jumps are either
replaced by a brownian motion of the same variance (when that standard deviation is at least 10 eps) or dropped.
"""

try:  # python 3.5+
    from typing import Sequence, Tuple, Union
except ImportError:
    pass

import numpy as np
import pandas as pd
from autoclass import autodict
from valid8 import validate

from .rng import RandomSource, as_random_source, replicate
from .stable_laws import StableParams
from .stats import EmpiricalSample


MAX_EXPECTED_JUMPS = 1e7
"""Maximum expected number of jumps per path"""

SMALL_JUMPS_RULE = 10.
"""For alpha < 1, small jumps are replaced by a brownian motion when their standard deviation is at least this multiple
of eps, and dropped otherwise. For alpha >= 1 they are always replaced."""

DEFAULT_EPSILON = 0.01
DEFAULT_GRID_SIZE = 1024

JUMPS_PER_CHUNK = 2 ** 21
"""Expected number of jumps drawn per replicate chunk"""


class NoJumpMeasure(ValueError):
    """Raised when a Levy measure is requested for alpha = 2: the limit is brownian"""
    def __init__(self, alpha):
        self.alpha = alpha
        super(NoJumpMeasure, self).__init__("alpha=%r: the gaussian limit has no jump measure" % alpha)


class ResourceError(Exception):
    """Raised when the truncation level leads to too many expected jumps"""
    def __init__(self, expected_jumps, epsilon):
        self.expected_jumps = expected_jumps
        self.epsilon = epsilon
        super(ResourceError, self).__init__()

    def __str__(self):
        return "epsilon=%g leads to %.3g expected jumps per path, above the limit of %.3g. Please use a larger " \
               "truncation level" % (self.epsilon, self.expected_jumps, MAX_EXPECTED_JUMPS)


@autodict
class LevyMeasureSpec:
    """
    The power-law Levy measure nu(dx) = scale_const alpha (p 1{x > 0} + q 1{x < 0}) |x|^(-alpha - 1) dx, so that
    nu(|x| > r) = scale_const r^-alpha.
    """
    def __init__(self,
                 alpha,        # type: float
                 p,            # type: float
                 scale_const   # type: float
                 ):
        validate('alpha', alpha, min_value=0, min_strict=True, max_value=2, max_strict=True)
        validate('p', p, min_value=0, max_value=1)
        validate('scale_const', scale_const, min_value=0, min_strict=True)
        self.alpha = alpha
        self.p = p
        self.scale_const = scale_const

    @property
    def q(self):
        # type: (...) -> float
        return 1. - self.p

    def tail_mass(self, eps):
        # type: (...) -> float
        """nu(|x| > eps)"""
        return self.scale_const * eps ** -self.alpha

    def small_jumps_variance(self, eps):
        # type: (...) -> float
        """the integral of x^2 nu(dx) over |x| < eps"""
        a = self.alpha
        return self.scale_const * a * eps ** (2 - a) / (2 - a)

    def drift(self,
              gamma_prime,  # type: float
              eps           # type: float
              ):
        # type: (...) -> float
        """
        The drift b_eps such that b_eps t + uncompensated jumps above eps + compensated jumps below eps has X(1) with
        location gamma_prime in the Feller parameterization.
        """
        a, c_nu, skew = self.alpha, self.scale_const, self.p - self.q
        if a == 1:
            return gamma_prime + c_nu * skew * (np.log(eps) - 1. + np.euler_gamma)
        else:
            return gamma_prime + c_nu * a * skew * eps ** (1 - a) / (1 - a)


@autodict
class GaussianSpec:
    """The alpha = 2 limit: a brownian motion with standard deviation `sigma` at t = 1"""
    def __init__(self,
                 sigma=1.  # type: float
                 ):
        validate('sigma', sigma, min_value=0, min_strict=True)
        self.sigma = sigma

    @property
    def alpha(self):
        return 2.


def levy_measure_for(params  # type: StableParams
                     ):
    # type: (...) -> LevyMeasureSpec
    """
    Returns the Levy measure of the stable law `params`, 0 < alpha < 2: scale_const = c (2 - alpha) / alpha.

    >>> levy_measure_for(StableParams(1.5, p=0.8)).scale_const
    0.3333333333333333

    :param params:
    :return:
    """
    if params.alpha == 2:
        raise NoJumpMeasure(params.alpha)
    validate('c', params.c, min_value=0, min_strict=True)
    return LevyMeasureSpec(alpha=params.alpha, p=params.p, scale_const=params.c * (2 - params.alpha) / params.alpha)


def limit_spec_for(alpha,   # type: float
                   p=0.5,   # type: float
                   c=1.     # type: float
                   ):
    # type: (...) -> Union[LevyMeasureSpec, GaussianSpec]
    """The spec of the Levy process with X(1) ~ S(alpha, ., c, p, 1 - p): a `GaussianSpec` for alpha = 2"""
    if alpha == 2:
        return GaussianSpec(sigma=np.sqrt(c))
    return levy_measure_for(StableParams(alpha, c=c, p=p))


class LevyPath(object):
    """
    A simulated path on [0, 1]: values on a time grid, the exact jump list, and the scales of the gaussian parts.
    """
    __slots__ = ('grid', 'values', 'jumps', 'sigma', 'small_jump_sigma', 'drift')

    def __init__(self,
                 grid,              # type: np.ndarray
                 values,            # type: np.ndarray
                 jumps,             # type: np.ndarray
                 sigma,             # type: float
                 small_jump_sigma,  # type: float
                 drift=0.,          # type: float
                 ):
        """

        :param grid: increasing times with grid[0] = 0 and grid[-1] = 1
        :param values: X at the grid times, right-continuous
        :param jumps: an array of shape (k, 2) of (time, size)
        :param sigma: the standard deviation at t = 1 of the brownian component
        :param small_jump_sigma: the standard deviation at t = 1 of the small jumps substitute
        :param drift: the drift of the path
        """
        self.grid = np.asarray(grid, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self.jumps = np.asarray(jumps, dtype=float).reshape(-1, 2)
        self.sigma = sigma
        self.small_jump_sigma = small_jump_sigma
        self.drift = drift

    def __repr__(self):
        return "LevyPath(grid_size=%s, jumps=%s, sigma=%r, small_jump_sigma=%r)" \
               % (self.grid.size, self.jumps.shape[0], self.sigma, self.small_jump_sigma)

    @property
    def jump_times(self):
        return self.jumps[:, 0]

    @property
    def jump_sizes(self):
        return self.jumps[:, 1]

    def value_at(self,
                 t  # type: Union[float, np.ndarray]
                 ):
        # type: (...) -> Union[float, np.ndarray]
        """
        X(t): drift and jumps are exact, the gaussian parts are linearly interpolated between grid points.

        :param t: a time or an array of times in [0, 1]
        :return:
        """
        t_arr = np.asarray(t, dtype=float)
        continuous = self.values - self._jump_part(self.grid)
        res = np.interp(t_arr, self.grid, continuous) + self._jump_part(t_arr)
        return float(res) if res.ndim == 0 else res

    def _jump_part(self, t):
        """sum of the jumps with time <= t"""
        order = np.argsort(self.jump_times, kind='stable')
        cum = np.concatenate([[0.], np.cumsum(self.jump_sizes[order])])
        return cum[np.searchsorted(self.jump_times[order], t, side='right')]

    def to_frames(self):
        # type: (...) -> Tuple[pd.DataFrame, pd.DataFrame]
        """
        Returns the path as a dataframe with columns `time, value`, and the jumps as a dataframe with columns
        `time, size`.
        """
        path_df = pd.DataFrame({'time': self.grid, 'value': self.values})
        jumps_df = pd.DataFrame({'time': self.jump_times, 'size': self.jump_sizes})
        return path_df, jumps_df


def _check_epsilon(epsilon):
    validate('epsilon', epsilon, min_value=0, min_strict=True, max_value=1)


class _Marks(object):
    """The random ingredients of a batch of paths: drift, gaussian scale, and the jumps of each path"""
    __slots__ = ('count', 'drift', 'gauss_sigma', 'small_jump_sigma', 'owners', 'times', 'sizes')

    def __init__(self, count, drift, gauss_sigma, small_jump_sigma, owners, times, sizes):
        self.count = count
        self.drift = drift
        self.gauss_sigma = gauss_sigma
        self.small_jump_sigma = small_jump_sigma
        self.owners = owners
        self.times = times
        self.sizes = sizes

    @property
    def diffusion_sigma(self):
        """total standard deviation at t = 1 of the gaussian parts"""
        return np.sqrt(self.gauss_sigma ** 2 + self.small_jump_sigma ** 2)


def _small_jump_sigma(spec, epsilon):
    sig = np.sqrt(spec.small_jumps_variance(epsilon))
    # compensated small jumps (alpha >= 1) are never dropped
    return sig if spec.alpha >= 1 or sig >= SMALL_JUMPS_RULE * epsilon else 0.


def _draw_marks(spec,         # type: Union[LevyMeasureSpec, GaussianSpec]
                gamma_prime,  # type: float
                epsilon,      # type: float
                count,        # type: int
                gen           # type: np.random.Generator
                ):
    # type: (...) -> _Marks
    if isinstance(spec, GaussianSpec):
        empty = np.zeros(0)
        return _Marks(count, gamma_prime, spec.sigma, 0., np.zeros(0, dtype=int), empty, empty)

    _check_epsilon(epsilon)
    lam = spec.tail_mass(epsilon)
    if lam > MAX_EXPECTED_JUMPS:
        raise ResourceError(lam, epsilon)

    nb = gen.poisson(lam, size=count)
    owners = np.repeat(np.arange(count), nb)
    total = owners.size
    times = gen.random(total)
    # |x| = eps U^(-1/alpha) has the normalized law of nu restricted to |x| > eps
    radii = epsilon * (1. - gen.random(total)) ** (-1. / spec.alpha)
    signs = np.where(gen.random(total) < spec.p, 1., -1.)
    return _Marks(count, spec.drift(gamma_prime, epsilon), 0., _small_jump_sigma(spec, epsilon), owners, times,
                  signs * radii)


def simulate_path(spec,                         # type: Union[LevyMeasureSpec, GaussianSpec]
                  gamma_prime,                  # type: float
                  epsilon=DEFAULT_EPSILON,      # type: float
                  grid_size=DEFAULT_GRID_SIZE,  # type: int
                  rng=0,                        # type: Union[RandomSource, int]
                  ):
    # type: (...) -> LevyPath
    """
    Simulates one path on the regular grid of `grid_size` points of [0, 1].

    :param spec: the Levy measure, or a GaussianSpec for alpha = 2
    :param gamma_prime: the location of X(1)
    :param epsilon: the truncation level in (0, 1]
    :param grid_size: number of grid points, >= 100
    :param rng:
    :return:
    """
    validate('grid_size', grid_size, min_value=100)
    gen = as_random_source(rng).generator
    marks = _draw_marks(spec, gamma_prime, epsilon, 1, gen)

    grid = np.linspace(0., 1., grid_size)
    dt = np.diff(grid)
    brownian = np.concatenate([[0.], np.cumsum(gen.standard_normal(grid_size - 1) * np.sqrt(dt))])

    order = np.argsort(marks.times, kind='stable')
    times, sizes = marks.times[order], marks.sizes[order]
    cum_jumps = np.concatenate([[0.], np.cumsum(sizes)])
    jump_part = cum_jumps[np.searchsorted(times, grid, side='right')]

    values = marks.drift * grid + marks.diffusion_sigma * brownian + jump_part
    return LevyPath(grid, values, np.column_stack([times, sizes]), sigma=marks.gauss_sigma,
                    small_jump_sigma=marks.small_jump_sigma, drift=marks.drift)


def quadratic_variation(path  # type: LevyPath
                        ):
    # type: (...) -> float
    """
    [X]_1 = sigma^2 + sum of the squared jumps + small_jump_sigma^2.

    >>> quadratic_variation(LevyPath([0., 1.], [0., 1.], [(0.3, 2.), (0.7, -1.)], 0., 0.))
    5.0
    """
    return float(path.sigma ** 2 + np.sum(path.jump_sizes ** 2) + path.small_jump_sigma ** 2)


def biggest_jump(path  # type: LevyPath
                 ):
    # type: (...) -> float
    """
    J = max |jump size|, 0 if there are no jumps.

    >>> biggest_jump(LevyPath([0., 1.], [0., 1.], [(0.3, 2.), (0.7, -1.)], 0., 0.))
    2.0
    """
    return float(np.max(np.abs(path.jump_sizes))) if path.jumps.size else 0.


def _chunk_size(spec, epsilon):
    if isinstance(spec, GaussianSpec):
        return 2 ** 16
    return int(max(1, JUMPS_PER_CHUNK // max(1., spec.tail_mass(epsilon))))


@autodict
class LimitSample:
    """
    Replicates of the limit triple (X(1), [X]_1, J)
    """
    def __init__(self,
                 x1,           # type: np.ndarray
                 qv,           # type: np.ndarray
                 big_jump,     # type: np.ndarray
                 seed_provenance=()  # type: Sequence
                 ):
        self.x1 = x1
        self.qv = qv
        self.big_jump = big_jump
        self.seed_provenance = list(seed_provenance)

    @property
    def self_normalized(self):
        """X(1) / sqrt([X]_1)"""
        return self.x1 / np.sqrt(self.qv)

    @property
    def jump_over_root_qv(self):
        """J / sqrt([X]_1)"""
        return self.big_jump / np.sqrt(self.qv)

    @property
    def jump_over_x1(self):
        """J / X(1)"""
        with np.errstate(divide='ignore', invalid='ignore'):
            return self.big_jump / self.x1

    def sample(self,
               name  # type: str
               ):
        # type: (...) -> EmpiricalSample
        """
        Returns one of 'x1', 'qv', 'big_jump', 'self_normalized', 'jump_over_root_qv', 'jump_over_x1' as an
        `EmpiricalSample`. Non-finite values are dropped.
        """
        values = np.asarray(getattr(self, name), dtype=float)
        return EmpiricalSample(name, values[np.isfinite(values)], seed_provenance=self.seed_provenance)


def _triples(spec, gamma_prime, epsilon, count, rng):
    gen = rng.generator
    marks = _draw_marks(spec, gamma_prime, epsilon, count, gen)
    jump_sum = np.bincount(marks.owners, weights=marks.sizes, minlength=count)
    jump_sq = np.bincount(marks.owners, weights=marks.sizes ** 2, minlength=count)
    big = np.zeros(count)
    if marks.owners.size:
        np.maximum.at(big, marks.owners, np.abs(marks.sizes))
    diffusion = marks.diffusion_sigma
    x1 = marks.drift + jump_sum + diffusion * gen.standard_normal(count)
    qv = jump_sq + diffusion ** 2
    return np.column_stack([x1, qv, big])


def limit_statistic_sample(spec,                     # type: Union[LevyMeasureSpec, GaussianSpec]
                           gamma_prime,              # type: float
                           M,                        # type: int
                           rng,                      # type: Union[RandomSource, int]
                           epsilon=DEFAULT_EPSILON,  # type: float
                           jobs=1,                   # type: int
                           ):
    # type: (...) -> LimitSample
    """
    Draws `M` independent replicates of the triple (X(1), [X]_1, J). Paths are not discretized: only the jumps and the
    value at t = 1 of the gaussian part are drawn.

    :param spec:
    :param gamma_prime:
    :param M:
    :param rng:
    :param epsilon:
    :param jobs:
    :return:
    """
    validate('M', M, min_value=1)
    rng = as_random_source(rng)
    res = replicate(lambda count, r: _triples(spec, gamma_prime, epsilon, count, r), M, rng,
                    chunk_size=_chunk_size(spec, epsilon), jobs=jobs)
    return LimitSample(res[:, 0], res[:, 1], res[:, 2], seed_provenance=[rng.provenance])


def _paths_at(spec, gamma_prime, epsilon, times, count, rng):
    """X at `times` divided by sqrt([X]_1), for `count` independent paths"""
    gen = rng.generator
    times = np.asarray(times, dtype=float)
    marks = _draw_marks(spec, gamma_prime, epsilon, count, gen)

    # gaussian part at the sorted times
    dt = np.diff(np.concatenate([[0.], times]))
    gauss = np.cumsum(gen.standard_normal((count, times.size)) * np.sqrt(dt), axis=1) * marks.diffusion_sigma

    jumps_at = np.zeros((count, times.size))
    for j, t in enumerate(times):
        before = marks.times <= t
        jumps_at[:, j] = np.bincount(marks.owners[before], weights=marks.sizes[before], minlength=count)

    jump_sq = np.bincount(marks.owners, weights=marks.sizes ** 2, minlength=count)
    qv = jump_sq + marks.diffusion_sigma ** 2
    values = marks.drift * times[None, :] + gauss + jumps_at
    return values / np.sqrt(qv)[:, None]


def limit_path_sample(spec,                     # type: Union[LevyMeasureSpec, GaussianSpec]
                      gamma_prime,              # type: float
                      t_points,                 # type: Sequence[float]
                      M,                        # type: int
                      rng,                      # type: Union[RandomSource, int]
                      epsilon=DEFAULT_EPSILON,  # type: float
                      jobs=1,                   # type: int
                      ):
    # type: (...) -> np.ndarray
    """
    Draws `M` replicates of (X(t) / sqrt([X]_1)) for t in `t_points`.

    :param spec:
    :param gamma_prime:
    :param t_points: increasing times in (0, 1]
    :param M:
    :param rng:
    :param epsilon:
    :param jobs:
    :return: an array of shape (M, len(t_points))
    """
    t_points = [float(t) for t in t_points]
    validate('t_points', t_points, min_len=1, custom=lambda ts: all(0 < a < b <= 1 for a, b in
                                                                   zip([0.] + ts[:-1], ts)),
             help_msg="t_points should be increasing in (0, 1]")
    validate('M', M, min_value=1)
    rng = as_random_source(rng)
    return replicate(lambda count, r: _paths_at(spec, gamma_prime, epsilon, t_points, count, r), M, rng,
                     chunk_size=_chunk_size(spec, epsilon), jobs=jobs)
