from math import e

from pytest_cases import parametrize


class ModelKase(object):
    """
    A catalog model string with its expected metadata and one exact tail value
    """
    def __init__(self, model_str, alpha, mean, x, tail):
        self.model_str = model_str
        self.alpha = alpha
        self.mean = mean
        self.x = x
        self.tail = tail

    def __repr__(self):
        return "<ModelKase %s>" % self.model_str


def case_rademacher():
    return ModelKase("rademacher", 2., 0., 0.5, 1.)


def case_uniform_centered():
    return ModelKase("uniform_centered", 2., 0., 0.5, 0.5)


def case_logpareto2():
    return ModelKase("logpareto2", 2., 0., 10., 0.01)


def case_cauchy_sym():
    return ModelKase("cauchy_sym", 1., None, 1., 0.5)


@parametrize(alpha=(0.8, 1.5))
def case_pareto_sym(alpha):
    return ModelKase("pareto_sym:%s" % alpha, alpha, None if alpha <= 1 else 0., 2., 2. ** -alpha)


def case_pareto_asym():
    return ModelKase("pareto_asym:1.5,0.8", 1.5, 0.6 * 1.5 / 0.5, 4., 0.125)


def case_slowvar_tail():
    return ModelKase("slowvar_tail", None, None, e ** 2, 0.5)
