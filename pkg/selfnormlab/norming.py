# Authors: selfnormlab contributors
#
# License: 3-clause BSD
"""
Norming and centering constants.

    a_n    the last crossing of g(x) = n l(x) / x^2 with level 1, l(x) = E[X^2 1{|X| <= x}]
    b_n    (n / a_n) E[X] if 1 < alpha <= 2, n E[sin(X / a_n)] if alpha = 1, 0 if alpha < 1
"""
from math import pi

try:  # python 3.5+
    from typing import List, Optional, Sequence, Tuple, Union
    from logging import Logger
except ImportError:
    pass

import numpy as np
from autoclass import autodict
from scipy.integrate import quad
from scipy.optimize import bisect
from valid8 import validate

from .doa_models import DistributionModel, get_model
from .io_utils import default_logger
from .stable_laws import NumericalFailure


AN_GRID_START = 1e-6
"""The geometric bracketing grid for a_n starts here..."""

AN_GRID_DOUBLINGS = 200
"""...and doubles this number of times"""

AN_RTOL = 1e-13
"""Relative tolerance of the a_n bisection"""

FELLER_ATOL = 1e-6
"""Absolute tolerance on n E[sin(X / a_n)]"""

FELLER_CONVERGENCE_TOL = 0.05
"""A feller sequence is declared converged when its last difference is below this"""

KM_GRID = (10., 1e2, 1e3, 1e4)


class NormingError(ValueError):
    """Raised when no x > 0 satisfies n l(x) / x^2 >= 1"""
    def __init__(self, model, n):
        self.model = model
        self.n = n
        super(NormingError, self).__init__("No x > 0 satisfies n l(x) / x^2 >= 1 for model %s and n=%s: a_n is "
                                           "undefined" % (model.name, n))


class NormingOverflow(ArithmeticError):
    """Raised when n l(x) / x^2 is still >= 1 at the top of the bracketing grid"""
    def __init__(self, model, n, x_max):
        self.model = model
        self.n = n
        self.x_max = x_max
        super(NormingOverflow, self).__init__("n l(x) / x^2 >= 1 up to x=%.3g for model %s and n=%s: no bracket found "
                                              "for a_n after %s doublings" % (x_max, model.name, n, AN_GRID_DOUBLINGS))


class BranchInapplicable(ValueError):
    """Raised when a centering branch needs a quantity that the model does not define (e.g. its mean)"""
    def __init__(self, model, what):
        self.model = model
        self.what = what
        super(BranchInapplicable, self).__init__("%s is not defined for model %s" % (what, model.name))


class DivisionDomainError(ZeroDivisionError):
    """Raised by km_ratio when P(|X| > x) = 0"""
    def __init__(self, model, x):
        self.model = model
        self.x = x
        super(DivisionDomainError, self).__init__("P(|X| > %r) = 0 for model %s: the ratio is undefined (bounded "
                                                  "support)" % (x, model.name))


@autodict
class NormingResult:
    """
    The norming and centering constants of a model for a given n
    """
    def __init__(self,
                 n,                     # type: int
                 a_n,                   # type: float
                 b_n=None,              # type: Optional[float]
                 feller_gamma_n=None    # type: Optional[float]
                 ):
        self.n = n
        self.a_n = a_n
        self.b_n = b_n
        self.feller_gamma_n = feller_gamma_n


@autodict
class FellerReport:
    """
    The sequence n E[sin(X / a_n)] along a grid of n, with its successive differences.
    """
    def __init__(self,
                 model,           # type: str
                 n_grid,          # type: List[int]
                 values,          # type: List[float]
                 differences,     # type: List[float]
                 limit_estimate,  # type: float
                 converged        # type: bool
                 ):
        self.model = model
        self.n_grid = n_grid
        self.values = values
        self.differences = differences
        self.limit_estimate = limit_estimate
        self.converged = converged


def _g_minus_one(model, n):
    def g(x):
        return n * model.trunc_second_moment(x) / (x * x) - 1.
    return g


def compute_an(model,  # type: Union[str, DistributionModel]
               n,      # type: int
               ):
    # type: (...) -> float
    """
    Returns a_n = sup{x > 0 : n l(x) / x^2 >= 1}, that is, the last point where g(x) = n l(x) / x^2 crosses 1 from
    above.

    The crossing is bracketed on a geometric grid starting at AN_GRID_START (plus the atoms of l, where g jumps) and
    then refined by bisection.

    >>> abs(compute_an("rademacher", 16) - 4.) < 1e-9
    True

    :param model: a model or a model string
    :param n: the sample size, >= 1
    :return:
    """
    validate('n', n, min_value=1)
    model = get_model(model)
    g = _g_minus_one(model, n)

    grid = AN_GRID_START * 2. ** np.arange(AN_GRID_DOUBLINGS + 1)
    xs = np.unique(np.concatenate([grid, np.asarray(model.atoms, dtype=float)]))
    above = np.asarray(g(xs)) >= 0

    if not above.any():
        raise NormingError(model, n)
    last = np.flatnonzero(above)[-1]
    if last == len(xs) - 1:
        raise NormingOverflow(model, n, xs[-1])

    lo, hi = xs[last], xs[last + 1]
    g_lo = g(lo)
    if g_lo == 0:
        return float(lo)

    # g(lo) > 0 > g(hi): bisection keeps a point with g >= 0 on the left
    root = bisect(g, lo, hi, xtol=lo * AN_RTOL, rtol=4 * np.finfo(float).eps, maxiter=400)
    return float(root)


def _scaled_expect_sin(model,  # type: DistributionModel
                       w,      # type: float
                       scale   # type: float
                       ):
    # type: (...) -> Tuple[float, float]
    """
    Returns scale * E[sin(w X)] and its quadrature error estimate.

    E[sin(w X)] is the integral over x > 0 of sin(w x) (f(x) - f(-x)) dx, plus the contribution of the atoms. With
    u = w x the integrand becomes sin(u) h(u / w) / w. The part below u = 2 pi is integrated in log scale when the
    support is bounded away from 0 (u = e^s), the oscillating remainder with the QUADPACK fourier rule.
    """
    atoms = sum((p_plus - p_minus) * np.sin(w * x0) for x0, p_plus, p_minus in model.atom_masses())

    def k(u):
        return scale * model.odd_density(u / w) / w

    u_min = w * model.abs_support_min
    u_cut = max(2 * pi, 2 * u_min)

    if u_min > 0:
        near, near_err = quad(lambda s: np.sin(np.exp(s)) * k(np.exp(s)) * np.exp(s), np.log(u_min), np.log(u_cut),
                              limit=200, epsabs=1e-9, epsrel=1e-10)
    else:
        near, near_err = quad(lambda u: np.sin(u) * k(u), 0., u_cut, limit=200, epsabs=1e-9, epsrel=1e-10)

    far, far_err = quad(k, u_cut, np.inf, weight='sin', wvar=1., limit=200, epsabs=1e-9)

    return scale * atoms + near + far, near_err + far_err


def feller_gamma(model,  # type: Union[str, DistributionModel]
                 n,      # type: int
                 a_n=None,  # type: float
                 ):
    # type: (...) -> float
    """
    Returns n E[sin(X / a_n)] computed by adaptive quadrature against the model density, for alpha = 1 models.

    :param model: a model or a model string
    :param n:
    :param a_n: an optional precomputed a_n
    :return:
    """
    model = get_model(model)
    if model.alpha_attractor != 1:
        raise BranchInapplicable(model, "the feller constant (alpha = 1 only)")
    if a_n is None:
        a_n = compute_an(model, n)

    value, err = _scaled_expect_sin(model, 1. / a_n, scale=n)
    if err > FELLER_ATOL or not np.isfinite(value):
        raise NumericalFailure("n E[sin(X / a_n)] for model %s and n=%s" % (model.name, n), residual=err,
                               tolerance=FELLER_ATOL)
    return float(value)


def compute_bn(model,  # type: Union[str, DistributionModel]
               n,      # type: int
               a_n=None,  # type: float
               ):
    # type: (...) -> float
    """
    Returns the centering constant b_n of the model:

     - (n / a_n) E[X] if 1 < alpha <= 2
     - n E[sin(X / a_n)] if alpha = 1
     - 0 if 0 < alpha < 1

    :param model: a model or a model string
    :param n:
    :param a_n: an optional precomputed a_n
    :return:
    """
    model = get_model(model)
    alpha = model.alpha_attractor
    if alpha is None:
        raise BranchInapplicable(model, "b_n (the model is not in a stable domain of attraction)")
    elif alpha < 1:
        return 0.
    elif alpha == 1:
        return feller_gamma(model, n, a_n=a_n)
    else:
        mean = model.mean
        if mean is None:
            raise BranchInapplicable(model, "the mean")
        if mean == 0:
            return 0.
        if a_n is None:
            a_n = compute_an(model, n)
        return float(n / a_n * mean)


def feller_sequence(model,  # type: Union[str, DistributionModel]
                    n_grid=(1000, 10000, 100000, 1000000),  # type: Sequence[int]
                    logger=default_logger  # type: Logger
                    ):
    # type: (...) -> FellerReport
    """
    Computes n E[sin(X / a_n)] along `n_grid`. The last value is the estimate of the limit; the sequence is declared
    converged when the absolute successive differences do not increase and the last one is below
    FELLER_CONVERGENCE_TOL.

    :param model:
    :param n_grid:
    :param logger:
    :return:
    """
    model = get_model(model)
    values = [feller_gamma(model, n) for n in n_grid]
    diffs = [b - a for a, b in zip(values[:-1], values[1:])]
    abs_diffs = [abs(d) for d in diffs]
    converged = all(d2 <= d1 + 1e-12 for d1, d2 in zip(abs_diffs[:-1], abs_diffs[1:])) \
        and (len(abs_diffs) == 0 or abs_diffs[-1] < FELLER_CONVERGENCE_TOL)

    logger.info("feller sequence for %s: %s" % (model.name, ', '.join("n=%s: %.6g" % (n, v)
                                                                    for n, v in zip(n_grid, values))))
    if not converged:
        logger.warning("feller sequence for %s does not converge (differences: %s)"
                       % (model.name, ', '.join("%.3g" % d for d in diffs)))

    return FellerReport(model=model.name, n_grid=list(n_grid), values=values, differences=diffs,
                        limit_estimate=values[-1], converged=converged)


def norming_table(model,  # type: Union[str, DistributionModel]
                  n_grid  # type: Sequence[int]
                  ):
    # type: (...) -> List[NormingResult]
    """
    Returns the norming constants of `model` for each n in `n_grid`. b_n is None when the branch does not apply.

    :param model:
    :param n_grid:
    :return:
    """
    model = get_model(model)
    res = []
    for n in n_grid:
        a_n = compute_an(model, n)
        try:
            b_n = compute_bn(model, n, a_n=a_n)
        except BranchInapplicable:
            b_n = None
        gamma_n = b_n if model.alpha_attractor == 1 else None
        res.append(NormingResult(n=n, a_n=a_n, b_n=b_n, feller_gamma_n=gamma_n))
    return res


def km_ratio(model,  # type: Union[str, DistributionModel]
             x       # type: float
             ):
    # type: (...) -> float
    """
    The Kesten-Maller ratio (x |E[X 1{|X| <= x}]| + l(x)) / (x^2 P(|X| > x)).

    >>> round(km_ratio("logpareto2", 10.), 6) == round(2 * np.log(10.), 6)
    True

    :param model:
    :param x: a positive real
    :return:
    """
    validate('x', x, min_value=0, min_strict=True)
    model = get_model(model)
    tail = model.tail(x)
    if tail <= 0:
        raise DivisionDomainError(model, x)
    return float((x * abs(model.trunc_first_moment(x)) + model.trunc_second_moment(x)) / (x * x * tail))
