# Authors: selfnormlab contributors
#
# License: 3-clause BSD
"""
Finite-n statistics built from a sample x_1..x_n, with S_k = x_1 + ... + x_k and V_n^2 = x_1^2 + ... + x_n^2.

All functions accept a 1-d sample, or a 2-d array whose rows are independent samples: computations are vectorized
along the last axis.
"""
import numpy as np
from autoclass import autodict
from valid8 import validate

try:  # python 3.5+
    from typing import Sequence, Tuple, Union
    ArrayLike = Union[np.ndarray, Sequence[float]]
except ImportError:
    pass


class DegenerateSample(ValueError):
    """Raised by the student process when the sample variance is zero"""
    def __init__(self, n):
        self.n = n
        super(DegenerateSample, self).__init__("The sample variance is zero (n=%s): the student statistic is "
                                               "undefined" % n)


def _as_samples(xs):
    xs = np.asarray(xs, dtype=float)
    validate('xs', xs, custom=lambda a: a.ndim in (1, 2) and a.shape[-1] > 0,
             help_msg="xs should be a non-empty sample or a 2-d array of samples")
    return xs


def _floor_indices(n, times):
    """[n t] for each t, robust to representation errors such as 3 * (1 / 3) < 1"""
    times = np.asarray(times, dtype=float)
    validate('times', times, custom=lambda ts: bool(np.all((ts >= 0) & (ts <= 1))),
             help_msg="times should be in [0, 1]")
    return np.floor(np.round(n * times, 9)).astype(int)


def _partial_sums(xs):
    """S_0, S_1, ..., S_n along the last axis"""
    zeros = np.zeros(xs.shape[:-1] + (1,))
    return np.concatenate([zeros, np.cumsum(xs, axis=-1)], axis=-1)


def _root_sum_squares(xs):
    return np.sqrt(np.sum(xs * xs, axis=-1))


class StepFunctionPath(object):
    """
    The self-normalized partial sums process t -> S_[nt] / V_n evaluated on a time grid.
    """
    __slots__ = ('n', 'grid', 'values')

    def __init__(self,
                 n,       # type: int
                 grid,    # type: np.ndarray
                 values   # type: np.ndarray
                 ):
        """

        :param n: the sample size
        :param grid: the evaluation times in [0, 1]
        :param values: S_[nt] / V_n for each time of the grid (last axis), one row per sample
        """
        self.n = n
        self.grid = grid
        self.values = values

    def __repr__(self):
        return "StepFunctionPath(n=%s, grid_size=%s)" % (self.n, len(self.grid))


def sn_path(xs,   # type: ArrayLike
            grid  # type: ArrayLike
            ):
    # type: (...) -> StepFunctionPath
    """
    Computes S_[nt] / V_n at each time t of `grid`. The path is zero when V_n = 0.

    >>> sn_path([3., 4.], [0.4, 1.]).values
    array([0. , 1.4])

    :param xs: a sample, or a 2-d array of samples (one per row)
    :param grid: times in [0, 1]
    :return:
    """
    xs = _as_samples(xs)
    n = xs.shape[-1]
    grid = np.asarray(grid, dtype=float)
    sums = _partial_sums(xs)[..., _floor_indices(n, grid)]
    v = _root_sum_squares(xs)[..., None]
    with np.errstate(divide='ignore', invalid='ignore'):
        values = np.where(v > 0, sums / np.where(v > 0, v, 1.), 0.)
    return StepFunctionPath(n, grid, values)


def self_normalized_sum(xs  # type: ArrayLike
                        ):
    # type: (...) -> Union[float, np.ndarray]
    """
    S_n / V_n, zero when V_n = 0.

    >>> self_normalized_sum([1., 1., 1., 1.])
    2.0
    """
    res = sn_path(xs, [1.]).values[..., 0]
    return float(res) if res.ndim == 0 else res


def student_process(xs,  # type: ArrayLike
                    mu,  # type: float
                    t    # type: Union[float, ArrayLike]
                    ):
    # type: (...) -> Union[float, np.ndarray]
    """
    The student process (1 / sqrt(n)) sum_{i <= [nt]} (x_i - mu) / s_n where s_n^2 is the unbiased sample variance.

    >>> round(student_process([3., 4.], 0., 1.), 12)
    7.0

    :param xs: a sample of size n >= 2, or a 2-d array of such samples
    :param mu: the centering
    :param t: a time or an array of times in [0, 1]
    :return: a float for a 1-d sample and a scalar time. Otherwise an array whose last axis is the time, if `t` is
        an array.
    """
    xs = _as_samples(xs)
    n = xs.shape[-1]
    validate('n', n, min_value=2)

    s_n = np.std(xs, axis=-1, ddof=1)
    if np.any(s_n == 0):
        raise DegenerateSample(n)

    t_arr = np.asarray(t, dtype=float)
    idx = _floor_indices(n, np.atleast_1d(t_arr))
    sums = _partial_sums(xs - mu)[..., idx]
    res = sums / (np.sqrt(n) * s_n[..., None])
    if t_arr.ndim == 0:
        res = res[..., 0]
    return float(res) if np.ndim(res) == 0 else res


def student_from_selfnormalized(r,  # type: Union[float, np.ndarray]
                                n   # type: int
                                ):
    # type: (...) -> Union[float, np.ndarray]
    """
    The student statistic T_n expressed with r = S_n / V_n:

        T_n = r / sqrt((n - r^2) / (n - 1))

    >>> round(student_from_selfnormalized(1.4, 2), 12)
    7.0

    :param r: S_n / V_n
    :param n: the sample size, >= 2
    :return:
    """
    validate('n', n, min_value=2)
    res = r / np.sqrt((n - np.square(r)) / (n - 1))
    return float(res) if np.ndim(res) == 0 else res


def max_ratios(xs  # type: ArrayLike
               ):
    # type: (...) -> Tuple[Union[float, np.ndarray], Union[float, np.ndarray]]
    """
    Returns (max |x_i| / S_n, max |x_i| / V_n). The first ratio is NaN when S_n = 0, the second one is 0 when V_n = 0.

    >>> max_ratios([1., 1., 1., 1.])
    (0.25, 0.5)

    :param xs:
    :return:
    """
    xs = _as_samples(xs)
    m = np.max(np.abs(xs), axis=-1)
    s = np.sum(xs, axis=-1)
    v = _root_sum_squares(xs)
    with np.errstate(divide='ignore', invalid='ignore'):
        over_s = np.where(s != 0, m / np.where(s != 0, s, 1.), np.nan)
        over_v = np.where(v > 0, m / np.where(v > 0, v, 1.), 0.)
    if xs.ndim == 1:
        return float(over_s), float(over_v)
    return over_s, over_v


@autodict
class ScalarTriple:
    """
    (S_n / a_n, V_n^2 / a_n^2, max |x_i| / a_n), each a float or an array with one value per sample
    """
    def __init__(self,
                 s_over_a,     # type: Union[float, np.ndarray]
                 v2_over_a2,   # type: Union[float, np.ndarray]
                 max_over_a    # type: Union[float, np.ndarray]
                 ):
        self.s_over_a = s_over_a
        self.v2_over_a2 = v2_over_a2
        self.max_over_a = max_over_a


def scalar_triple(xs,       # type: ArrayLike
                  a_n,      # type: float
                  scale=1.  # type: Union[float, np.ndarray]
                  ):
    # type: (...) -> ScalarTriple
    """
    Computes (S_n / a_n, V_n^2 / a_n^2, max |x_i| / a_n).

    >>> t = scalar_triple([1., 1., 1., 1.], 2.)
    >>> t.s_over_a, t.v2_over_a2, t.max_over_a
    (2.0, 1.0, 0.5)

    :param xs:
    :param a_n: the norming constant, > 0
    :param scale: optional factor applied to each sample (one per row), for samples stored divided by their scale
    :return:
    """
    validate('a_n', a_n, min_value=0, min_strict=True)
    xs = _as_samples(xs)
    ratio = np.asarray(scale, dtype=float) / a_n
    s = np.sum(xs, axis=-1) * ratio
    v2 = np.sum(xs * xs, axis=-1) * ratio ** 2
    m = np.max(np.abs(xs), axis=-1) * ratio
    if xs.ndim == 1 and np.ndim(ratio) == 0:
        return ScalarTriple(float(s), float(v2), float(m))
    return ScalarTriple(s, v2, m)
