# Authors: selfnormlab contributors
#
# License: 3-clause BSD
"""
A catalog of i.i.d. distribution models with a known domain-of-attraction status. Every model exposes its exact
tail P(|X| > x), truncated moments E[X 1{|X| <= x}] and l(x) = E[X^2 1{|X| <= x}], and an inverse-transform sampler.

Models are addressed with strings such as `"rademacher"`, `"pareto_sym:1.5"` or `"pareto_asym:1,0.8"`.
"""
from math import e, pi

try:  # python 3.5+
    from typing import Callable, Dict, List, Optional, Tuple, Union
except ImportError:
    pass

import numpy as np
from scipy.special import expi
from valid8 import validate

from .rng import RandomSource, as_random_source


class UnknownModel(KeyError):
    """
    Raised when a model string can not be resolved in the catalog.
    """
    def __init__(self, name, reason=None):
        self.name = name
        self.reason = reason
        super(UnknownModel, self).__init__(name)

    def __str__(self):
        msg = "Unknown model %r" % self.name
        if self.reason is not None:
            msg += ": %s" % self.reason
        return msg + ". Available models: %s" % ', '.join(sorted(MODEL_FACTORIES))


def _as_float_array(x):
    return np.asarray(x, dtype=float)


def _unwrap(res):
    """0-d arrays are returned as python floats"""
    res = np.asarray(res, dtype=float)
    return float(res) if res.ndim == 0 else res


class DistributionModel(object):
    """
    Base class for catalog models. Subclasses implement `_sample`, `tail`, `trunc_first_moment` and
    `trunc_second_moment`, and declare their domain-of-attraction metadata.

    All descriptors are vectorized on `x`.
    """
    name = None               # type: str
    alpha_attractor = None    # type: Optional[float]
    p_balance = 0.5           # type: float
    atoms = ()                # type: Tuple[float, ...]
    bounded_support = False   # type: bool
    slowly_varying_tail = False  # type: bool
    abs_support_min = 0.      # type: float

    def __repr__(self):
        return "<%s %s>" % (type(self).__name__, self.name)

    def __eq__(self, other):
        return isinstance(other, DistributionModel) and other.name == self.name

    def __hash__(self):
        return hash(self.name)

    @property
    def q_balance(self):
        # type: (...) -> float
        return 1. - self.p_balance

    @property
    def mean(self):
        # type: (...) -> Optional[float]
        """E[X], or None when undefined"""
        return None

    @property
    def feller_condition(self):
        # type: (...) -> Optional[bool]
        """For alpha = 1 models, whether lim n E sin(X / a_n) exists and is finite. None for other models."""
        return None

    # ---- sampling ----

    def sample(self,
               rng,       # type: Union[RandomSource, int]
               size=None  # type: Union[int, Tuple[int, ...]]
               ):
        # type: (...) -> Union[float, np.ndarray]
        """
        Draws i.i.d. variates.

        :param rng: a RandomSource or an integer seed
        :param size: None (default) for a single float, or an output shape
        :return:
        """
        res = self._sample(as_random_source(rng).generator, 1 if size is None else size)
        return float(res[0]) if size is None else res

    def _sample(self, gen, size):
        raise NotImplementedError()

    def sample_scaled(self,
                      rng,   # type: Union[RandomSource, int]
                      shape  # type: Tuple[int, ...]
                      ):
        # type: (...) -> Tuple[np.ndarray, np.ndarray]
        """
        Draws i.i.d. variates and returns each row (last axis) divided by its maximum absolute value, together with the
        log of that maximum. Rows that are identically zero are left unscaled with a log scale of -inf.

        Self-normalized statistics are invariant under this scaling.

        :param rng:
        :param shape:
        :return: a tuple (scaled_rows, log_scales)
        """
        x = self.sample(rng, shape)
        m = np.max(np.abs(x), axis=-1, keepdims=True)
        safe_m = np.where(m > 0, m, 1.)
        with np.errstate(divide='ignore'):
            log_m = np.log(m[..., 0])
        return x / safe_m, log_m

    # ---- analytic descriptors ----

    def tail(self, x):
        """P(|X| > x)"""
        raise NotImplementedError()

    def trunc_first_moment(self, x):
        """E[X 1{|X| <= x}]"""
        raise NotImplementedError()

    def trunc_second_moment(self, x):
        """l(x) = E[X^2 1{|X| <= x}]"""
        raise NotImplementedError()

    def density(self, x):
        """The density of X, for absolutely continuous models"""
        raise NotImplementedError("%s has no density" % self.name)

    def odd_density(self, x):
        """f(x) - f(-x) for x > 0. Used for E[sin(w X)]"""
        x = _as_float_array(x)
        return _unwrap(self.density(x) - self.density(-x))

    def atom_masses(self):
        # type: (...) -> List[Tuple[float, float, float]]
        """For each positive atom x0, (x0, P(X = x0), P(X = -x0))"""
        return []

    def centered(self):
        # type: (...) -> DistributionModel
        """The model shifted by -mean, so that it has mean zero"""
        if self.mean is None:
            raise ValueError("model %s has no mean, it can not be centered" % self.name)
        elif self.mean == 0:
            return self
        raise NotImplementedError("model %s can not be centered" % self.name)


# ---------- power tails

def _power_integral(k,      # type: int
                    alpha,  # type: float
                    lo,     # type: np.ndarray
                    hi      # type: np.ndarray
                    ):
    # type: (...) -> np.ndarray
    """
    Returns the integral of alpha r^(k - alpha - 1) over [max(lo, 1), max(hi, max(lo, 1))].
    `hi` may be +inf when k < alpha.
    """
    lo = np.maximum(lo, 1.)
    hi = np.maximum(hi, lo)
    if k == alpha:
        return alpha * np.log(hi / lo)
    else:
        with np.errstate(invalid='ignore'):
            res = alpha * (hi ** (k - alpha) - lo ** (k - alpha)) / (k - alpha)
        # hi == lo == inf
        return np.where(hi == lo, 0., res)


class PowerTailModel(DistributionModel):
    """
    X = S R + shift where R >= 1 has P(R > r) = r^-alpha, and S = +1 with probability p, -1 otherwise.

    This covers the pareto_sym, pareto_asym and pareto_centered catalog entries, as well as logpareto2 (alpha = 2,
    for which l(x) = 2 log x grows without bound while the tail is x^-2).
    """
    def __init__(self,
                 name,      # type: str
                 alpha,     # type: float
                 p=0.5,     # type: float
                 shift=0.,  # type: float
                 ):
        """

        :param name: the catalog name of the model
        :param alpha: the tail index in (0, 2]
        :param p: the probability of the positive sign
        :param shift: a deterministic shift
        """
        validate('alpha', alpha, min_value=0, min_strict=True, max_value=2)
        validate('p', p, min_value=0, max_value=1)
        self.name = name
        self.alpha = float(alpha)
        self.alpha_attractor = float(alpha)
        self.p_balance = float(p)
        self.shift = float(shift)
        self.abs_support_min = 1. if shift == 0 else 0.

    @property
    def raw_mean(self):
        # type: (...) -> Optional[float]
        """The mean of the unshifted model"""
        a = self.alpha
        if a <= 1:
            return None
        return (self.p_balance - self.q_balance) * a / (a - 1)

    @property
    def mean(self):
        # type: (...) -> Optional[float]
        m = self.raw_mean
        if m is None:
            return None
        m += self.shift
        # centered models have an exact zero mean
        return 0. if abs(m) < 1e-14 else m

    @property
    def feller_condition(self):
        # type: (...) -> Optional[bool]
        if self.alpha != 1:
            return None
        # n E sin(X / a_n) ~ (p - q) log(a_n)
        return self.p_balance == self.q_balance

    def centered(self):
        # type: (...) -> PowerTailModel
        m = self.mean
        if m is None:
            raise ValueError("model %s has no mean, it can not be centered" % self.name)
        elif m == 0:
            return self
        name = "pareto_centered:%r,%r" % (self.alpha, self.p_balance)
        return PowerTailModel(name, self.alpha, self.p_balance, shift=self.shift - m)

    def _sample(self, gen, size):
        # 1 - U is in (0, 1]
        r = (1. - gen.random(size)) ** (-1. / self.alpha)
        s = np.where(gen.random(size) < self.p_balance, 1., -1.)
        return s * r + self.shift

    def _right_tail_raw(self, y):
        """P(X > y) for the unshifted model"""
        a, p, q = self.alpha, self.p_balance, self.q_balance
        y = _as_float_array(y)
        ay = np.maximum(np.abs(y), 1.)
        return np.where(y >= 0, p * ay ** -a, p + q * (1. - ay ** -a))

    def _left_tail_raw(self, y):
        """P(X < y) for the unshifted model"""
        a, p, q = self.alpha, self.p_balance, self.q_balance
        y = _as_float_array(y)
        ay = np.maximum(np.abs(y), 1.)
        return np.where(y <= 0, q * ay ** -a, q + p * (1. - ay ** -a))

    def _partial_moment_raw(self,
                            k,   # type: int
                            lo,  # type: np.ndarray
                            hi   # type: np.ndarray
                            ):
        # type: (...) -> np.ndarray
        """E[X^k 1{lo <= X <= hi}] for the unshifted model"""
        a, p, q = self.alpha, self.p_balance, self.q_balance
        pos = p * _power_integral(k, a, lo, hi)
        # X = -R: R in [-hi, -lo]
        neg = q * (-1.) ** k * _power_integral(k, a, -hi, -lo)
        return pos + neg

    def _partial_moments(self, x):
        """(M0, M1, M2) with Mk = E[Y^k 1{|Y| <= x}], Y = X + shift"""
        x = np.maximum(_as_float_array(x), 0.)
        lo, hi = -x - self.shift, x - self.shift
        m0 = self._partial_moment_raw(0, lo, hi)
        m1 = self._partial_moment_raw(1, lo, hi)
        if self.shift == 0:
            return m0, m1, self._partial_moment_raw(2, lo, hi)
        s = self.shift
        m2 = self._partial_moment_raw(2, lo, hi)
        return m0, m1 + s * m0, m2 + 2 * s * m1 + s * s * m0

    def tail(self, x):
        x = np.maximum(_as_float_array(x), 0.)
        return _unwrap(self._right_tail_raw(x - self.shift) + self._left_tail_raw(-x - self.shift))

    def right_tail(self, x):
        """P(X > x)"""
        return _unwrap(self._right_tail_raw(_as_float_array(x) - self.shift))

    def trunc_first_moment(self, x):
        return _unwrap(self._partial_moments(x)[1])

    def trunc_second_moment(self, x):
        return _unwrap(self._partial_moments(x)[2])

    def density(self, x):
        a, p, q = self.alpha, self.p_balance, self.q_balance
        y = _as_float_array(x) - self.shift
        ay = np.abs(y)
        with np.errstate(divide='ignore'):
            dens = a * np.where(ay >= 1, ay, np.inf) ** (-a - 1)
        return _unwrap(np.where(y > 0, p * dens, q * dens))


# ---------- finite variance models

class RademacherModel(DistributionModel):
    """+1 or -1 with probability 1/2: the finite variance reference, with an atom of l at x = 1"""
    name = 'rademacher'
    alpha_attractor = 2.
    atoms = (1.,)
    bounded_support = True

    @property
    def mean(self):
        return 0.

    def _sample(self, gen, size):
        return 2. * gen.integers(0, 2, size=size) - 1.

    def tail(self, x):
        return _unwrap(np.where(_as_float_array(x) < 1, 1., 0.))

    def trunc_first_moment(self, x):
        return _unwrap(np.zeros_like(_as_float_array(x)))

    def trunc_second_moment(self, x):
        return _unwrap(np.where(_as_float_array(x) >= 1, 1., 0.))

    def odd_density(self, x):
        return _unwrap(np.zeros_like(_as_float_array(x)))

    def atom_masses(self):
        return [(1., 0.5, 0.5)]


class UniformCenteredModel(DistributionModel):
    """Uniform on (-1, 1)"""
    name = 'uniform_centered'
    alpha_attractor = 2.
    bounded_support = True

    @property
    def mean(self):
        return 0.

    def _sample(self, gen, size):
        return gen.uniform(-1., 1., size=size)

    def tail(self, x):
        return _unwrap(np.clip(1. - _as_float_array(x), 0., 1.))

    def trunc_first_moment(self, x):
        return _unwrap(np.zeros_like(_as_float_array(x)))

    def trunc_second_moment(self, x):
        x = np.clip(_as_float_array(x), 0., 1.)
        return _unwrap(x ** 3 / 3.)

    def density(self, x):
        return _unwrap(np.where(np.abs(_as_float_array(x)) < 1, 0.5, 0.))


# ---------- alpha = 1 and degenerate models

class CauchySymModel(DistributionModel):
    """The standard symmetric Cauchy law"""
    name = 'cauchy_sym'
    alpha_attractor = 1.

    @property
    def feller_condition(self):
        return True

    def _sample(self, gen, size):
        return gen.standard_cauchy(size=size)

    def tail(self, x):
        x = np.maximum(_as_float_array(x), 0.)
        with np.errstate(divide='ignore'):
            return _unwrap(2. / pi * np.arctan(1. / x))

    def trunc_first_moment(self, x):
        return _unwrap(np.zeros_like(_as_float_array(x)))

    def trunc_second_moment(self, x):
        x = np.maximum(_as_float_array(x), 0.)
        return _unwrap(2. / pi * (x - np.arctan(x)))

    def density(self, x):
        return _unwrap(1. / (pi * (1. + _as_float_array(x) ** 2)))

    def odd_density(self, x):
        return _unwrap(np.zeros_like(_as_float_array(x)))


class SlowlyVaryingTailModel(DistributionModel):
    """
    |X| = exp(1 / U) with U uniform on (0, 1) and a fair sign, so that P(|X| > x) = 1 / log(x) for x > e.

    The tail is slowly varying: S_n / V_n concentrates on {-1, +1}. Most draws overflow the float range for large
    samples, use `sample_scaled` to get rows divided by their maximum, computed in log domain.
    """
    name = 'slowvar_tail'
    alpha_attractor = None
    slowly_varying_tail = True
    abs_support_min = e

    def _log_abs_and_sign(self, gen, size):
        # 1 - U is in (0, 1]
        log_abs = 1. / (1. - gen.random(size))
        sign = np.where(gen.random(size) < 0.5, 1., -1.)
        return log_abs, sign

    def _sample(self, gen, size):
        log_abs, sign = self._log_abs_and_sign(gen, size)
        with np.errstate(over='ignore'):
            return sign * np.exp(log_abs)

    def sample_scaled(self, rng, shape):
        log_abs, sign = self._log_abs_and_sign(as_random_source(rng).generator, shape)
        log_m = np.max(log_abs, axis=-1, keepdims=True)
        return sign * np.exp(log_abs - log_m), log_m[..., 0]

    def tail(self, x):
        x = _as_float_array(x)
        with np.errstate(divide='ignore', invalid='ignore'):
            return _unwrap(np.where(x > e, 1. / np.log(np.maximum(x, e)), 1.))

    def trunc_first_moment(self, x):
        return _unwrap(np.zeros_like(_as_float_array(x)))

    def trunc_second_moment(self, x):
        """l(x) = integral of e^{2s} / s^2 over s in (1, log x) = 2 Ei(2 log x) - x^2 / log x - 2 Ei(2) + e^2"""
        x = _as_float_array(x)
        big_l = np.log(np.maximum(x, e))
        res = 2. * expi(2. * big_l) - np.exp(2. * big_l) / big_l - 2. * expi(2.) + e ** 2
        return _unwrap(np.where(x > e, np.maximum(res, 0.), 0.))

    def density(self, x):
        ax = np.abs(_as_float_array(x))
        with np.errstate(divide='ignore', invalid='ignore'):
            dens = 0.5 / (ax * np.log(ax) ** 2)
        return _unwrap(np.where(ax > e, dens, 0.))

    def odd_density(self, x):
        return _unwrap(np.zeros_like(_as_float_array(x)))


# ---------- catalog

def _parse_args(name, args, nb_min, nb_max):
    if not (nb_min <= len(args) <= nb_max):
        raise UnknownModel(name, "expected between %s and %s arguments, got %s" % (nb_min, nb_max, len(args)))
    try:
        return [float(a) for a in args]
    except ValueError:
        raise UnknownModel(name, "arguments should be numbers, got %r" % (args,))


def _fmt(x):
    return repr(float(x))


def pareto_sym(alpha):
    # type: (...) -> PowerTailModel
    """density (alpha / 2) |x|^(-alpha - 1) on |x| > 1"""
    validate('alpha', alpha, min_value=0, min_strict=True, max_value=2, max_strict=True)
    return PowerTailModel("pareto_sym:%s" % _fmt(alpha), alpha, 0.5)


def pareto_asym(alpha, p):
    # type: (...) -> PowerTailModel
    """the radial law of `pareto_sym` with a positive sign with probability p"""
    validate('alpha', alpha, min_value=0, min_strict=True, max_value=2, max_strict=True)
    return PowerTailModel("pareto_asym:%s,%s" % (_fmt(alpha), _fmt(p)), alpha, p)


def pareto_centered(alpha, p):
    # type: (...) -> PowerTailModel
    """`pareto_asym` shifted by its mean, alpha in (1, 2)"""
    validate('alpha', alpha, min_value=1, min_strict=True, max_value=2, max_strict=True)
    raw = PowerTailModel("pareto_asym:%s,%s" % (_fmt(alpha), _fmt(p)), alpha, p)
    return PowerTailModel("pareto_centered:%s,%s" % (_fmt(alpha), _fmt(p)), alpha, p, shift=-raw.raw_mean)


def logpareto2():
    # type: (...) -> PowerTailModel
    """P(|X| > x) = x^-2 for x > 1 and l(x) = 2 log x: in the normal domain of attraction with infinite variance"""
    return PowerTailModel("logpareto2", 2., 0.5)


MODEL_FACTORIES = {
    'pareto_sym': (pareto_sym, 1, 1),
    'pareto_asym': (pareto_asym, 2, 2),
    'pareto_centered': (pareto_centered, 2, 2),
    'rademacher': (RademacherModel, 0, 0),
    'uniform_centered': (UniformCenteredModel, 0, 0),
    'logpareto2': (logpareto2, 0, 0),
    'slowvar_tail': (SlowlyVaryingTailModel, 0, 0),
    'cauchy_sym': (CauchySymModel, 0, 0),
}  # type: Dict[str, Tuple[Callable[..., DistributionModel], int, int]]
"""name -> (factory, min number of arguments, max number of arguments)"""


def get_model(model_str  # type: Union[str, DistributionModel]
              ):
    # type: (...) -> DistributionModel
    """
    Resolves a model string `name` or `name:arg1,arg2` into a catalog model.

    >>> get_model("pareto_sym:1.5").tail(2.) == 2 ** -1.5
    True

    :param model_str:
    :return:
    """
    if isinstance(model_str, DistributionModel):
        return model_str

    name, _, args_str = model_str.strip().partition(':')
    try:
        factory, nb_min, nb_max = MODEL_FACTORIES[name]
    except KeyError:
        raise UnknownModel(model_str)

    args = [a for a in args_str.split(',') if a.strip() != ''] if args_str else []
    args = _parse_args(model_str, args, nb_min, nb_max)
    try:
        return factory(*args)
    except ValueError as err:
        raise UnknownModel(model_str, str(err))


def catalog():
    # type: (...) -> List[DistributionModel]
    """
    Returns one instance of each catalog entry, with representative parameters.

    :return:
    """
    return [pareto_sym(1.5), pareto_sym(0.8), pareto_asym(1.5, 0.8), pareto_asym(1., 0.8), pareto_centered(1.5, 0.8),
            RademacherModel(), UniformCenteredModel(), logpareto2(), SlowlyVaryingTailModel(), CauchySymModel()]


def sample_iid(model,  # type: Union[str, DistributionModel]
               n,      # type: int
               rng     # type: Union[RandomSource, int]
               ):
    # type: (...) -> np.ndarray
    """
    Draws `n` i.i.d. variates from `model`.

    :param model: a model or a model string
    :param n:
    :param rng: a RandomSource or an integer seed
    :return:
    """
    validate('n', n, min_value=1)
    return get_model(model).sample(rng, n)
