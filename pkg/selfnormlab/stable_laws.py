# Authors: selfnormlab contributors
#
# License: 3-clause BSD
"""
Stable laws S(alpha, gamma, c, p, q) in the Feller parameterization, where for alpha != 1

    log f(t) = i gamma t + c |t|^alpha Gamma(3 - alpha) / (alpha (alpha - 1)) (cos(pi alpha / 2)
               - i (p - q) sign(t) sin(pi alpha / 2))

and for alpha == 1

    log f(t) = i gamma t - c |t| (pi / 2 + i (p - q) sign(t) log |t|)

`p` is the weight of the right tail: P(X > x) / P(|X| > x) -> p. S(2, gamma, c, ., .) is the normal law N(gamma, c).
"""
from functools import partial
from math import pi

try:  # python 3.5+
    from typing import Callable, Optional, Tuple, Union
except ImportError:
    pass

import numpy as np
from autoclass import autodict
from scipy.integrate import quad
from scipy.optimize import bisect
from scipy.special import gamma as gamma_fn
from scipy.stats import cauchy, norm
from valid8 import validate

from .rng import RandomSource, as_random_source


CF_CUTOFF = 1e-12
"""The Gil-Pelaez integral is truncated at the first T where |f(T)| < CF_CUTOFF"""

CDF_TOLERANCE = 1e-6
"""Maximum tolerated quadrature error estimate on a cdf value"""

QUAD_LIMIT = 200
"""Maximum number of subintervals for each QUADPACK call"""

NEAR_ONE = 1e-9
"""alpha values closer than this to 1 (but not equal) are refused: the alpha != 1 branch is numerically singular"""


class NumericalFailure(Exception):
    """
    Raised when a quadrature does not reach the requested accuracy.
    """
    def __init__(self,
                 what,       # type: str
                 residual,   # type: float
                 tolerance,  # type: float
                 ):
        self.what = what
        self.residual = residual
        self.tolerance = tolerance
        super(NumericalFailure, self).__init__()

    def __str__(self):
        return "Numerical failure while computing %s: error estimate %.3g exceeds tolerance %.3g" \
               % (self.what, self.residual, self.tolerance)


class DegenerateLaw(ValueError):
    """Raised when a sampler or a cdf receives a law with c = 0 (a point mass)"""
    def __init__(self, params):
        self.params = params
        super(DegenerateLaw, self).__init__("Degenerate stable law (c = 0): %r" % (params,))


class UnsupportedConfiguration(ValueError):
    """Raised when a parameter combination can not be mapped to the standard parameterization reliably"""
    def __init__(self, params, reason):
        self.params = params
        self.reason = reason
        super(UnsupportedConfiguration, self).__init__("Unsupported stable law %r: %s" % (params, reason))


def _is_finite(x):
    return bool(np.isfinite(x))


@autodict
class StableParams:
    """
    The parameters (alpha, gamma, c, p, q) of a stable law in the Feller parameterization.
    """
    def __init__(self,
                 alpha,      # type: float
                 gamma=0.,   # type: float
                 c=1.,       # type: float
                 p=0.5,      # type: float
                 q=None      # type: float
                 ):
        """

        :param alpha: the stability index in (0, 2]
        :param gamma: the location
        :param c: the scale weight, non-negative. c = 0 is a point mass at gamma
        :param p: the right tail balance in [0, 1]
        :param q: the left tail balance in [0, 1]. Defaults to 1 - p
        """
        validate('alpha', alpha, min_value=0, min_strict=True, max_value=2)
        validate('gamma', gamma, custom=_is_finite)
        validate('c', c, min_value=0, custom=_is_finite)
        validate('p', p, min_value=0, max_value=1)
        if q is None:
            q = 1. - p
        validate('q', q, min_value=0, max_value=1)
        validate('p + q', p + q, custom=lambda s: abs(s - 1) <= 1e-12)

        self.alpha = float(alpha)
        self.gamma = float(gamma)
        self.c = float(c)
        self.p = float(p)
        self.q = float(q)

    @property
    def beta(self):
        # type: (...) -> float
        """The skewness of the law, p - q"""
        return self.p - self.q

    @property
    def is_symmetric(self):
        # type: (...) -> bool
        return self.gamma == 0 and self.p == self.q

    def exponent_coefficient(self):
        # type: (...) -> float
        """Gamma(3 - alpha) / (alpha (alpha - 1)), the factor of the alpha != 1 branch"""
        a = self.alpha
        return gamma_fn(3 - a) / (a * (a - 1))

    def standard_form(self):
        # type: (...) -> Tuple[float, float, float]
        """
        Returns (sigma, beta, mu) such that this law is S1(alpha, beta, sigma, mu) in the usual (Zolotarev "A" /
        Samorodnitsky-Taqqu) parameterization, where the log-characteristic function is
        -sigma^alpha |t|^alpha (1 - i beta sign(t) tan(pi alpha / 2)) + i mu t for alpha != 1 and
        -sigma |t| (1 + i beta (2 / pi) sign(t) log |t|) + i mu t for alpha == 1.

        :return:
        """
        a = self.alpha
        if a == 1:
            return self.c * pi / 2, self.beta, self.gamma
        elif a == 2:
            return np.sqrt(self.c / 2), 0., self.gamma
        else:
            if abs(a - 1) < NEAR_ONE:
                raise UnsupportedConfiguration(self, "alpha too close to 1 (use alpha=1 exactly)")
            sigma_alpha = -self.c * self.exponent_coefficient() * np.cos(pi * a / 2)
            if not (sigma_alpha >= 0 and np.isfinite(sigma_alpha)):
                raise UnsupportedConfiguration(self, "invalid scale %r" % sigma_alpha)
            return sigma_alpha ** (1 / a), self.beta, self.gamma


def cf_eval(params,  # type: StableParams
            t        # type: Union[float, np.ndarray]
            ):
    # type: (...) -> Union[complex, np.ndarray]
    """
    Evaluates the characteristic function f(t) of the law. Vectorized on `t`.

    >>> abs(cf_eval(StableParams(2), 1.) - np.exp(-0.5)) < 1e-15
    True
    >>> cf_eval(StableParams(0.7, p=1), 0.)
    (1+0j)

    :param params:
    :param t: a real or an array of reals
    :return:
    """
    t_arr = np.asarray(t, dtype=float)
    if np.isnan(t_arr).any():
        raise ValueError("cf_eval can not be evaluated at NaN")

    a, c, beta = params.alpha, params.c, params.beta
    abs_t = np.abs(t_arr)
    sgn = np.sign(t_arr)

    if a == 1:
        # |t| log |t| -> 0 when t -> 0
        safe_t = np.where(abs_t > 0, abs_t, 1.)
        t_log_t = np.where(abs_t > 0, safe_t * np.log(safe_t), 0.)
        real_part = -c * pi / 2 * abs_t
        imag_part = params.gamma * t_arr - c * beta * sgn * t_log_t
    else:
        k = params.exponent_coefficient()
        real_coef = c * k * np.cos(pi * a / 2)
        assert real_coef <= 0
        imag_coef = 0. if a == 2 else c * k * beta * np.sin(pi * a / 2)
        t_pow = abs_t ** a
        real_part = real_coef * t_pow
        imag_part = params.gamma * t_arr - imag_coef * sgn * t_pow

    res = np.exp(real_part) * (np.cos(imag_part) + 1j * np.sin(imag_part))
    if res.ndim == 0:
        return complex(res)
    return res


def sample_stable(params,    # type: StableParams
                  rng,       # type: Union[RandomSource, int]
                  size=None  # type: Union[int, Tuple[int, ...]]
                  ):
    # type: (...) -> Union[float, np.ndarray]
    """
    Draws variates from the law with the Chambers-Mallows-Stuck transform applied to the standard form of the law.
    alpha = 2 is sampled directly from the gaussian.

    :param params:
    :param rng: a RandomSource or an integer seed
    :param size: None (default) to get a single float, or an output shape
    :return:
    """
    if params.c == 0:
        raise DegenerateLaw(params)

    gen = as_random_source(rng).generator
    a = params.alpha
    if a == 2:
        res = params.gamma + np.sqrt(params.c) * gen.standard_normal(size)
        return res if size is not None else float(res)

    sigma, beta, mu = params.standard_form()
    u = pi * (gen.random(size) - 0.5)
    w = gen.standard_exponential(size)

    if a == 1:
        half_pi_bu = pi / 2 + beta * u
        z = (2 / pi) * (half_pi_bu * np.tan(u) - beta * np.log((pi / 2) * w * np.cos(u) / half_pi_bu))
        # the log term of the alpha = 1 branch does not scale linearly: zolotarev correction
        res = sigma * z + (2 / pi) * beta * sigma * np.log(sigma) + mu
    else:
        b = np.arctan(beta * np.tan(pi * a / 2)) / a
        z = np.sin(a * (u + b)) / (np.cos(a * b) * np.cos(u)) ** (1 / a) \
            * (np.cos(a * b + (a - 1) * u) / w) ** ((1 - a) / a)
        res = sigma * z + mu

    return res if size is not None else float(res)


def _gil_pelaez_integral(params,  # type: StableParams
                         x        # type: float
                         ):
    # type: (...) -> Tuple[float, float]
    """
    Returns the integral I of Im(exp(-itx) f(t)) / t over (0, +inf) together with its error estimate, so that
    F(x) = 1/2 - I / pi.

    For t > 0 write log f(t) = R(t) + i (gamma t + J(t)). Then with A = gamma - x,
    Im(exp(-itx) f(t)) = exp(R) (cos(J) sin(A t) + sin(J) cos(A t)).
    The integral is truncated where exp(R) < CF_CUTOFF, computed with plain adaptive quadrature below the first
    half-period of the oscillation and with QUADPACK's oscillatory (QAWO) rules above it.
    """
    a, c, beta = params.alpha, params.c, params.beta
    if a == 1:
        r_coef = -c * pi / 2

        def r_fun(t):
            return r_coef * t

        def j_fun(t):
            return -c * beta * t * np.log(t)

        t_max = -np.log(CF_CUTOFF) / -r_coef
    else:
        k = params.exponent_coefficient()
        r_coef = c * k * np.cos(pi * a / 2)
        j_coef = -c * k * beta * np.sin(pi * a / 2)

        def r_fun(t):
            return r_coef * t ** a

        def j_fun(t):
            return j_coef * t ** a

        t_max = (-np.log(CF_CUTOFF) / -r_coef) ** (1 / a)

    big_a = params.gamma - x

    def full_integrand(t):
        return np.exp(r_fun(t)) * np.sin(j_fun(t) + big_a * t) / t

    # QAWO weights with a non-negative frequency: sin(A t) = sign(A) sin(|A| t)
    omega, sign_a = abs(big_a), np.sign(big_a)

    def sin_envelope(t):
        return sign_a * np.exp(r_fun(t)) * np.cos(j_fun(t)) / t

    def cos_envelope(t):
        return np.exp(r_fun(t)) * np.sin(j_fun(t)) / t

    t_split = t_max if big_a == 0 else min(t_max, pi / abs(big_a))

    value, error = quad(full_integrand, 0., t_split, limit=QUAD_LIMIT, epsabs=1e-10, epsrel=1e-10)
    if t_split < t_max:
        v_sin, e_sin = quad(sin_envelope, t_split, t_max, weight='sin', wvar=omega, limit=QUAD_LIMIT,
                            epsabs=1e-10, epsrel=1e-10)
        v_cos, e_cos = quad(cos_envelope, t_split, t_max, weight='cos', wvar=omega, limit=QUAD_LIMIT,
                            epsabs=1e-10, epsrel=1e-10)
        value += v_sin + v_cos
        error += e_sin + e_cos

    return value, error


def _cdf_scalar(params,  # type: StableParams
                x        # type: float
                ):
    # type: (...) -> float
    if x == np.inf:
        return 1.
    elif x == -np.inf:
        return 0.

    value, error = _gil_pelaez_integral(params, x)
    if not np.isfinite(value) or error / pi > CDF_TOLERANCE:
        raise NumericalFailure("cdf_stable(%r, x=%r)" % (params, x), residual=error / pi, tolerance=CDF_TOLERANCE)

    return min(1., max(0., 0.5 - value / pi))


def cdf_stable(params,  # type: StableParams
               x        # type: Union[float, np.ndarray]
               ):
    # type: (...) -> Union[float, np.ndarray]
    """
    Evaluates the cumulative distribution function F(x) by numerical Gil-Pelaez inversion of the characteristic
    function. The gaussian case alpha = 2 is evaluated in closed form.

    >>> abs(cdf_stable(StableParams(1.), pi / 2) - 0.75) < 1e-6
    True

    :param params:
    :param x: a real or an array of reals
    :return:
    """
    if params.c == 0:
        raise DegenerateLaw(params)
    x_arr = np.asarray(x, dtype=float)
    if np.isnan(x_arr).any():
        raise ValueError("cdf_stable can not be evaluated at NaN")

    if params.alpha == 2:
        res = norm.cdf(x_arr, loc=params.gamma, scale=np.sqrt(params.c))
    else:
        res = np.fromiter((_cdf_scalar(params, xi) for xi in x_arr.ravel()), dtype=float,
                          count=x_arr.size).reshape(x_arr.shape)

    return float(res) if res.ndim == 0 else res


def ppf_stable(params,  # type: StableParams
               prob,    # type: float
               xtol=1e-9,  # type: float
               ):
    # type: (...) -> float
    """
    Returns the quantile of order `prob`, by bisection on `cdf_stable`.

    :param params:
    :param prob: a probability in (0, 1)
    :param xtol: absolute tolerance of the bisection
    :return:
    """
    validate('prob', prob, min_value=0, min_strict=True, max_value=1, max_strict=True)
    if params.c == 0:
        raise DegenerateLaw(params)

    sigma, _, _ = params.standard_form()
    center = params.gamma
    half_width = max(sigma, 1e-12)
    for _ in range(200):
        lo, hi = center - half_width, center + half_width
        if cdf_stable(params, lo) < prob < cdf_stable(params, hi):
            break
        half_width *= 2
    else:
        raise NumericalFailure("a bracket for ppf_stable(%r, %r)" % (params, prob), residual=np.inf, tolerance=0.)

    return bisect(lambda x: cdf_stable(params, x) - prob, lo, hi, xtol=xtol)


def stable_cdf_reference(params  # type: StableParams
                         ):
    # type: (...) -> Optional[Callable]
    """
    Returns the closed-form cdf of the law when there is one (the gaussian alpha = 2 and the symmetric alpha = 1,
    a Cauchy law of scale c pi / 2), None otherwise.

    :param params:
    :return:
    """
    if params.c == 0:
        raise DegenerateLaw(params)
    if params.alpha == 2:
        return norm(loc=params.gamma, scale=np.sqrt(params.c)).cdf
    elif params.alpha == 1 and params.p == params.q:
        return cauchy(loc=params.gamma, scale=params.c * pi / 2).cdf
    else:
        return None


def stable_cdf(params  # type: StableParams
               ):
    # type: (...) -> Callable
    """
    Returns a vectorized cdf of the law: the closed form when there is one, `cdf_stable` otherwise.

    :param params:
    :return:
    """
    ref = stable_cdf_reference(params)
    return ref if ref is not None else partial(cdf_stable, params)


TABLE_NODES = 2001
"""Number of nodes of `tabulated_cdf`"""

TABLE_TAIL = 1e-5
"""`tabulated_cdf` covers the quantiles of orders TABLE_TAIL to 1 - TABLE_TAIL"""


def tabulated_cdf(params,             # type: StableParams
                  nodes=TABLE_NODES,  # type: int
                  tail_prob=TABLE_TAIL  # type: float
                  ):
    # type: (...) -> Callable
    """
    Returns a fast vectorized cdf of the law: the closed form when there is one, otherwise a linear interpolation of
    `cdf_stable` on `nodes` points between the quantiles of orders `tail_prob` and `1 - tail_prob`. Nodes are evenly
    spaced in arcsinh scale around the location, so that both the center and the tails are resolved. The interpolation
    error is below `tail_prob` outside of the nodes range.

    :param params:
    :param nodes:
    :param tail_prob:
    :return:
    """
    validate('nodes', nodes, min_value=10)
    validate('tail_prob', tail_prob, min_value=0, min_strict=True, max_value=0.5, max_strict=True)
    ref = stable_cdf_reference(params)
    if ref is not None:
        return ref

    sigma, _, _ = params.standard_form()
    lo = ppf_stable(params, tail_prob, xtol=1e-6 * sigma)
    hi = ppf_stable(params, 1 - tail_prob, xtol=1e-6 * sigma)
    u = np.linspace(np.arcsinh((lo - params.gamma) / sigma), np.arcsinh((hi - params.gamma) / sigma), nodes)
    xs = params.gamma + sigma * np.sinh(u)
    fs = np.maximum.accumulate(cdf_stable(params, xs))

    def cdf(x):
        return np.interp(x, xs, fs, left=0., right=1.)

    return cdf
