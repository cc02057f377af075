import numpy as np
import pytest
from scipy.stats import ks_2samp

from selfnormlab import RandomSource, StableParams, LevyMeasureSpec, GaussianSpec, LevyPath, ResourceError, \
    levy_measure_for, limit_spec_for, simulate_path, quadratic_variation, biggest_jump, limit_statistic_sample, \
    limit_path_sample, sample_stable
from selfnormlab.levy_sim import NoJumpMeasure


def test_hand_built_path():
    """ Tests the path functionals on a path whose jumps are known """
    path = LevyPath([0., 0.5, 1.], [0., 2.5, 2.], [(0.25, 2.), (0.75, -1.)], sigma=0.5, small_jump_sigma=1.)
    assert quadratic_variation(path) == 0.25 + 4. + 1. + 1.
    assert biggest_jump(path) == 2.
    # the continuous part is 0, 0.5, 1 on the grid
    assert path.value_at(0.2) == pytest.approx(0.2)
    assert path.value_at(0.3) == pytest.approx(2.3)
    np.testing.assert_allclose(path.value_at(np.array([0.8, 1.])), [1.8, 2.])

    path_df, jumps_df = path.to_frames()
    assert list(path_df.columns) == ['time', 'value']
    assert list(jumps_df.columns) == ['time', 'size']
    assert jumps_df['size'].tolist() == [2., -1.]


def test_path_without_jumps():
    path = LevyPath([0., 1.], [0., 0.3], [], sigma=2., small_jump_sigma=0.)
    assert biggest_jump(path) == 0.
    assert quadratic_variation(path) == 4.


def test_levy_measure():
    """ Tests the constant C = c (2 - alpha) / alpha and the tail mass """
    spec = levy_measure_for(StableParams(1.5, c=3., p=0.8))
    assert spec.scale_const == pytest.approx(1.)
    assert spec.q == pytest.approx(0.2)
    assert spec.tail_mass(0.01) == pytest.approx(1000.)
    assert spec.small_jumps_variance(0.01) == pytest.approx(1.5 * 0.1 / 0.5)

    with pytest.raises(NoJumpMeasure):
        levy_measure_for(StableParams(2.))
    with pytest.raises(ValueError):
        LevyMeasureSpec(alpha=1.5, p=0.5, scale_const=0.)


def test_limit_spec_for():
    spec = limit_spec_for(2., c=4.)
    assert isinstance(spec, GaussianSpec) and spec.sigma == 2.
    assert spec.alpha == 2.
    levy = limit_spec_for(0.8, p=0.3)
    assert isinstance(levy, LevyMeasureSpec)
    assert (levy.alpha, levy.p) == (0.8, 0.3)
    assert levy.scale_const == pytest.approx(1.5)


def test_drift():
    """ The drift only depends on the skewness and the truncation level """
    assert LevyMeasureSpec(1.5, 0.5, 1.).drift(0.2, 0.01) == pytest.approx(0.2)
    assert LevyMeasureSpec(1.5, 0.8, 1. / 3).drift(0., 0.01) == pytest.approx(-6.)
    assert LevyMeasureSpec(0.8, 0.8, 1.).drift(0., 0.01) == pytest.approx(0.8 * 0.6 * 0.01 ** 0.2 / 0.2)
    assert LevyMeasureSpec(1., 1., 1.).drift(0., 1.) == pytest.approx(np.euler_gamma - 1.)


def test_resource_error():
    spec = limit_spec_for(1.5)
    with pytest.raises(ResourceError) as exc_info:
        simulate_path(spec, 0., epsilon=1e-6, rng=0)
    assert "larger truncation level" in str(exc_info.value)


@pytest.mark.parametrize("epsilon", [0., 1.5])
def test_invalid_epsilon(epsilon):
    with pytest.raises(ValueError):
        simulate_path(limit_spec_for(1.5), 0., epsilon=epsilon)


def test_simulate_path_gaussian():
    """ For alpha = 2 the path is a brownian motion: no jumps, [X]_1 = sigma^2 """
    path = simulate_path(GaussianSpec(sigma=3.), 0., grid_size=100, rng=RandomSource(5))
    assert path.jumps.shape == (0, 2)
    assert path.grid.size == 100
    assert path.values[0] == 0.
    assert quadratic_variation(path) == 9.
    assert biggest_jump(path) == 0.


def test_simulate_path_grid_size():
    with pytest.raises(ValueError):
        simulate_path(GaussianSpec(), 0., grid_size=50)


def test_simulate_path_totally_skewed():
    """ With p = 1 all the jumps are positive, and above epsilon """
    path = simulate_path(limit_spec_for(1.5, p=1.), 0., epsilon=0.01, rng=RandomSource(1))
    assert path.jumps.shape[0] > 0
    assert np.all(path.jump_sizes >= 0.01)
    assert np.all((path.jump_times >= 0) & (path.jump_times < 1))
    assert path.grid[0] == 0. and path.grid[-1] == 1.


def test_simulate_path_deterministic():
    spec = limit_spec_for(0.8)
    a = simulate_path(spec, 0., rng=RandomSource(3).split(2))
    b = simulate_path(spec, 0., rng=RandomSource(3).split(2))
    np.testing.assert_array_equal(a.values, b.values)
    np.testing.assert_array_equal(a.jumps, b.jumps)


def test_path_ends_at_x1():
    """ The value at t = 1 is the drift plus the jumps plus the gaussian parts """
    path = simulate_path(limit_spec_for(0.8), 0.3, epsilon=0.1, rng=RandomSource(8))
    # alpha < 1 with eps = 0.1: the small jumps are dropped
    assert path.small_jump_sigma == 0.
    assert path.values[-1] == pytest.approx(path.drift + np.sum(path.jump_sizes))


def test_small_jumps_kept_above_one():
    """ For alpha >= 1 the compensated small jumps are replaced, even when their sigma is below 10 eps """
    spec = limit_spec_for(1.5)
    path = simulate_path(spec, 0., epsilon=0.1, rng=RandomSource(8))
    assert path.small_jump_sigma == pytest.approx(np.sqrt(spec.small_jumps_variance(0.1)))
    assert 0. < path.small_jump_sigma < 10 * 0.1


@pytest.mark.parametrize("p", [0.5, 0.8], ids="p={}".format)
@pytest.mark.parametrize("alpha", [0.5, 1., 1.5], ids="alpha={}".format)
def test_x1_is_stable(alpha, p):
    """ Tests that X(1) and draws of S(alpha, gamma', 1, p, q) are within the two-sample KS bound, and that a doubled
    scale is detected """
    gamma_prime, M = 0.3, 20000
    bound = 1.36 * np.sqrt(2. / M) * 1.5
    ls = limit_statistic_sample(limit_spec_for(alpha, p=p), gamma_prime, M, RandomSource(11), epsilon=0.01)
    ref = sample_stable(StableParams(alpha, gamma=gamma_prime, c=1., p=p), RandomSource(12), M)
    assert ks_2samp(ls.x1, ref).statistic < bound
    # negative control
    assert ks_2samp(gamma_prime + 2 * (ls.x1 - gamma_prime), ref).statistic > bound


@pytest.mark.parametrize("alpha", [0.8, 1.5], ids="alpha={}".format)
def test_truncation_robustness(alpha):
    """ Tests that halving the truncation level barely moves the laws of [X]_1 and of the biggest jump """
    spec = limit_spec_for(alpha)
    coarse = limit_statistic_sample(spec, 0., 20000, RandomSource(13), epsilon=0.02)
    fine = limit_statistic_sample(spec, 0., 20000, RandomSource(14), epsilon=0.01)
    assert ks_2samp(coarse.qv, fine.qv).statistic < 0.03
    assert ks_2samp(coarse.big_jump, fine.big_jump).statistic < 0.03


def test_x1_truncation_levels():
    """ alpha = 1.5, p = 1/2: epsilon = 0.1 and epsilon = 0.01 give the same law of X(1) """
    spec = limit_spec_for(1.5)
    coarse = limit_statistic_sample(spec, 0., 20000, RandomSource(15), epsilon=0.1)
    fine = limit_statistic_sample(spec, 0., 20000, RandomSource(16), epsilon=0.01)
    assert ks_2samp(coarse.x1, fine.x1).statistic < 0.0204


@pytest.mark.parametrize("alpha", [0.8, 1., 1.5], ids="alpha={}".format)
def test_self_normalized_limit_symmetric(alpha):
    """ With p = q, X(1) / sqrt([X]_1) is symmetric: its empirical cdf at 0 is 1/2 within 3 standard errors """
    M = 20000
    ls = limit_statistic_sample(limit_spec_for(alpha, p=0.5), 0., M, RandomSource(17), epsilon=0.01)
    assert abs(np.mean(ls.self_normalized <= 0) - 0.5) < 3 * np.sqrt(0.25 / M)


def test_limit_sample_gaussian():
    """ For alpha = 2 the triple is (N(0, 1), 1, 0) """
    ls = limit_statistic_sample(GaussianSpec(), 0., 5000, RandomSource(2))
    np.testing.assert_array_equal(ls.qv, 1.)
    np.testing.assert_array_equal(ls.big_jump, 0.)
    assert abs(np.mean(ls.x1)) < 0.1
    assert abs(np.std(ls.x1) - 1.) < 0.05
    np.testing.assert_array_equal(ls.self_normalized, ls.x1)
    assert len(ls.sample('self_normalized')) == 5000
    assert ls.seed_provenance == [(2, ())]


def test_limit_sample_functionals():
    """ Tests that J <= sqrt([X]_1) and that sample() drops undefined ratios """
    ls = limit_statistic_sample(limit_spec_for(0.8), 0., 3000, RandomSource(4), epsilon=0.01)
    assert np.all(ls.big_jump <= np.sqrt(ls.qv) + 1e-12)
    assert np.all((ls.jump_over_root_qv >= 0) & (ls.jump_over_root_qv <= 1 + 1e-12))
    sample = ls.sample('jump_over_x1')
    assert np.all(np.isfinite(sample.values))
    assert set(dict(ls)) == {'x1', 'qv', 'big_jump', 'seed_provenance'}


def test_limit_sample_deterministic():
    spec = limit_spec_for(1.5, p=0.8)
    a = limit_statistic_sample(spec, 0., 1000, RandomSource(6), epsilon=0.05)
    b = limit_statistic_sample(spec, 0., 1000, RandomSource(6), epsilon=0.05)
    np.testing.assert_array_equal(a.x1, b.x1)


def test_limit_path_sample():
    """ Tests the shape of the limit path sample, and that X(1) / sqrt([X]_1) is N(0, 1) for alpha = 2 """
    res = limit_path_sample(GaussianSpec(), 0., [0.25, 0.5, 1.], 4000, RandomSource(3))
    assert res.shape == (4000, 3)
    assert abs(np.std(res[:, 2]) - 1.) < 0.05
    assert abs(np.std(res[:, 0]) - 0.5) < 0.05

    res = limit_path_sample(limit_spec_for(1.5), 0., [0.5, 1.], 500, RandomSource(3), epsilon=0.05)
    assert res.shape == (500, 2)
    assert np.all(np.isfinite(res))


@pytest.mark.parametrize("t_points", [[], [0.5, 0.25], [0., 1.], [0.5, 1.5]])
def test_limit_path_sample_invalid_times(t_points):
    with pytest.raises(ValueError):
        limit_path_sample(GaussianSpec(), 0., t_points, 10, 0)
