import numpy as np
import pytest
from pytest_cases import parametrize_with_cases, fixture

from selfnormlab import RandomSource, get_model, catalog, sample_iid, UnknownModel
from selfnormlab.doa_models import pareto_centered
from selfnormlab.tests.models.test_doa_models_cases import ModelKase


@fixture
@parametrize_with_cases("c")
def case(c):
    return c


def test_metadata(case  # type: ModelKase
                  ):
    """ Tests that the catalog strings resolve to models with the expected index, mean and tail """
    model = get_model(case.model_str)
    assert model.alpha_attractor == case.alpha
    if case.mean is None:
        assert model.mean is None
    else:
        assert model.mean == pytest.approx(case.mean, abs=1e-12)
    assert model.tail(case.x) == pytest.approx(case.tail, rel=1e-12)


def test_empirical_tail(case  # type: ModelKase
                        ):
    """ Tests that the sampler agrees with the analytic tail, within 5 standard errors """
    model = get_model(case.model_str)
    x = model.sample(RandomSource(3), 200000)
    freq = np.mean(np.abs(x) > case.x)
    stderr = np.sqrt(case.tail * (1 - case.tail) / x.size)
    assert abs(freq - case.tail) <= 5 * stderr + 1e-12


def test_descriptors_vectorized(case  # type: ModelKase
                                ):
    """ Tests that the analytic descriptors accept arrays, and that l(x) is non-decreasing """
    model = get_model(case.model_str)
    xs = np.array([0.5, 1., 2., 10., 100.])
    tails = model.tail(xs)
    l_x = model.trunc_second_moment(xs)
    assert tails.shape == l_x.shape == xs.shape
    assert np.all(np.diff(tails) <= 0)
    assert np.all(np.diff(l_x) >= -1e-12)
    assert np.all(l_x >= 0)


def test_sample_deterministic(case  # type: ModelKase
                              ):
    """ Tests that the same seed and stream give the same draws """
    model = get_model(case.model_str)
    a = model.sample(RandomSource(12).split(4), 100)
    b = model.sample(RandomSource(12).split(4), 100)
    c = model.sample(RandomSource(12).split(5), 100)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_sample_scaled(case  # type: ModelKase
                       ):
    """ Tests that scaled rows have a maximum absolute value of 1 """
    model = get_model(case.model_str)
    rows, log_m = model.sample_scaled(RandomSource(1), (20, 50))
    assert rows.shape == (20, 50)
    assert log_m.shape == (20, )
    np.testing.assert_allclose(np.max(np.abs(rows), axis=1), 1.)


def test_sample_scaled_matches_sample():
    """ Tests that for a regular model, sample_scaled is the sample divided by its row maximum """
    model = get_model("pareto_sym:1.5")
    x = model.sample(RandomSource(8), (3, 10))
    rows, log_m = model.sample_scaled(RandomSource(8), (3, 10))
    np.testing.assert_allclose(rows * np.exp(log_m)[:, None], x, rtol=1e-12)


def test_rademacher_values():
    x = sample_iid("rademacher", 5, RandomSource(0))
    assert set(np.unique(x)) <= {-1., 1.}
    assert x.shape == (5, )


def test_pareto_centered_mean():
    """ Tests that the centered asymmetric pareto model has a zero mean, empirically too """
    model = pareto_centered(1.8, 0.8)
    assert model.mean == 0.
    x = model.sample(RandomSource(5), 400000)
    # the variance is infinite: a loose bound
    assert abs(np.mean(x)) < 0.1


def test_centered():
    """ Tests that centering a model with a non-zero mean gives a zero-mean model """
    model = get_model("pareto_asym:1.5,0.8")
    centered = model.centered()
    assert centered.mean == 0.
    assert centered.alpha_attractor == 1.5
    assert get_model("rademacher").centered() is not None
    with pytest.raises(ValueError):
        get_model("cauchy_sym").centered()


def test_feller_condition():
    assert get_model("cauchy_sym").feller_condition
    assert get_model("pareto_sym:1").feller_condition
    assert not get_model("pareto_asym:1,0.8").feller_condition
    assert get_model("pareto_sym:1.5").feller_condition is None


def test_slowvar_scaled_without_overflow():
    """ Tests that the slowly varying model can be sampled in scaled form for large rows """
    model = get_model("slowvar_tail")
    rows, log_m = model.sample_scaled(RandomSource(2), (4, 100000))
    assert np.all(np.isfinite(rows))
    assert np.all(log_m > 1.)


@pytest.mark.parametrize("model_str", ["unknown", "pareto_sym", "pareto_sym:3", "pareto_sym:a",
                                       "pareto_asym:1.5", "rademacher:1"])
def test_unknown_model(model_str):
    with pytest.raises(UnknownModel) as exc_info:
        get_model(model_str)
    assert "Available models" in str(exc_info.value)


def test_catalog():
    models = catalog()
    names = [m.name for m in models]
    assert len(set(names)) == len(names)
    for m in models:
        assert get_model(m.name) == m
