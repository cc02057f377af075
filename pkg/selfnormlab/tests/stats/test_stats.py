from collections import OrderedDict

import numpy as np
import pytest
from scipy.stats import norm, kstest

from selfnormlab import RandomSource, replicate, EmpiricalSample, PointLimit, GeneratorFailure, ks_one_sample, \
    ks_two_sample, convergence_verdict, convergence_scan, concentration_scan, fdd_check
from selfnormlab.stats import kolmogorov_critical, draw_replicates, fdd_times, joint_convergence_scan


def gaussian_generator(n, count, rng):
    return rng.generator.standard_normal(count)


def shrinking_generator(n, count, rng):
    """ 1 + N(0, 1) / sqrt(n): converges in probability to 1 """
    return 1. + rng.generator.standard_normal(count) / np.sqrt(n)


def brownian_paths(n, count, times, rng):
    dt = np.diff(np.concatenate([[0.], times]))
    return np.cumsum(rng.generator.standard_normal((count, len(times))) * np.sqrt(dt), axis=1)


def gaussian_increment_cdf(s, t):
    return norm(scale=np.sqrt(t - s)).cdf


@pytest.mark.parametrize("jobs", [2, 3, None], ids="jobs={}".format)
def test_replicate_jobs_independence(jobs):
    """ Tests that the replicates do not depend on the number of workers """
    def draw(count, rng):
        return rng.generator.standard_normal((count, 2))

    ref = replicate(draw, 2500, RandomSource(4), chunk_size=1000, jobs=1)
    assert ref.shape == (2500, 2)
    np.testing.assert_array_equal(replicate(draw, 2500, RandomSource(4), chunk_size=1000, jobs=jobs), ref)


def test_draw_replicates_jobs_independence():
    """ Large n means small chunks, and several streams """
    def stat(n, count, rng):
        return np.sum(rng.generator.standard_normal((count, n)), axis=1)

    a = draw_replicates(stat, 4096, 2000, RandomSource(1), jobs=1)
    b = draw_replicates(stat, 4096, 2000, RandomSource(1), jobs=4)
    np.testing.assert_array_equal(a, b)


def test_ks():
    x = RandomSource(0).generator.standard_normal(500)
    assert ks_one_sample(x, norm.cdf) == pytest.approx(kstest(x, norm.cdf).statistic)
    assert ks_one_sample(EmpiricalSample('x', x), norm.cdf) == ks_one_sample(x, norm.cdf)
    assert ks_two_sample(x, x) == 0.
    assert ks_two_sample(x, x + 100.) == 1.


def test_ks_permutation_and_scale():
    """ KS(a, b) = KS(c a, c b) for c > 0, and the order of the replicates does not matter """
    gen = RandomSource(1).generator
    a, b = gen.standard_normal(700), 0.1 + gen.standard_normal(900)
    d = ks_two_sample(a, b)
    assert d > 0.
    assert ks_two_sample(2.5 * a, 2.5 * b) == d
    assert ks_two_sample(gen.permutation(a), gen.permutation(b)) == d
    assert ks_one_sample(gen.permutation(a), norm.cdf) == ks_one_sample(a, norm.cdf)


def test_ks_two_sample_null_calibration():
    """ Under equal laws, the 95th percentile of the two-sample distance over 200 trials is 1.36 sqrt(2 / M) """
    M = 2000
    rng = RandomSource(2)
    distances = []
    for k in range(200):
        gen = rng.split(k).generator
        distances.append(ks_two_sample(gen.standard_normal(M), gen.standard_normal(M)))
    assert np.percentile(distances, 95) == pytest.approx(1.36 * np.sqrt(2. / M), rel=0.15)


def test_kolmogorov_critical():
    assert kolmogorov_critical(100) == pytest.approx(0.1358, abs=1e-4)
    assert kolmogorov_critical(1000, two_sample_with=1000) == pytest.approx(kolmogorov_critical(500))
    assert kolmogorov_critical(100, level=0.99) > kolmogorov_critical(100)
    with pytest.raises(ValueError):
        kolmogorov_critical(100, level=1.)


@pytest.mark.parametrize("values", [[], [1., np.nan], [np.inf]], ids=["empty", "nan", "inf"])
def test_empirical_sample_finite(values):
    with pytest.raises(ValueError):
        EmpiricalSample('x', values)


def test_empirical_sample():
    s = EmpiricalSample('x', [3., 1., 2.], seed_provenance=[(1, (0, ))], n_inner=10)
    assert len(s) == 3
    np.testing.assert_array_equal(s.sorted_values, [1., 2., 3.])
    np.testing.assert_array_equal(s.values, [3., 1., 2.])


@pytest.mark.parametrize("distances, kwargs, expected", [
    ([0.1, 0.05, 0.02], dict(), True),
    ([0.1, 0.05, 0.03], dict(), False),
    ([0.01, 0.013, 0.005], dict(), False),
    ([0.01, 0.013, 0.005], dict(noise_floor=0.015), True),
    ([0.01, 0.013, 0.005], dict(trend_tolerance=0.5), True),
    ([], dict(), False),
], ids=["decreasing", "above_threshold", "increase", "increase_below_noise", "increase_tolerated", "empty"])
def test_convergence_verdict(distances, kwargs, expected):
    """ Tests the final threshold and the trend rule """
    assert convergence_verdict(distances, threshold=0.025, **kwargs) is expected


def test_convergence_scan_gaussian():
    """ Tests a scan whose statistic has exactly the limit law """
    report = convergence_scan(gaussian_generator, norm.cdf, [10, 100, 1000], 2000, RandomSource(3), threshold=0.06,
                              label='gauss', noise_floor=0.06)
    assert report.kind == 'ks_one_sample'
    assert report.n_grid == [10, 100, 1000]
    assert len(report.distances) == 3
    assert report.passed
    assert report.final_distance == report.distances[-1]
    assert report.recompute_verdict() == report.verdict
    assert report.replicates == 2000
    assert report.notes == []
    assert set(dict(report)) == {'label', 'kind', 'n_grid', 'distances', 'threshold', 'verdict', 'replicates',
                                 'trend_tolerance', 'noise_floor', 'notes'}


def test_convergence_scan_wrong_limit():
    """ A statistic with a doubled scale does not converge to N(0, 1) """
    def doubled(n, count, rng):
        return 2. * gaussian_generator(n, count, rng)

    report = convergence_scan(doubled, norm.cdf, [10, 100], 2000, RandomSource(3), threshold=0.06)
    assert min(report.distances) > 0.1
    assert not report.passed


def test_convergence_scan_two_sample():
    """ A limit given as a sample is compared with the two-sample distance, with a two-sample noise floor """
    limit = RandomSource(9).generator.standard_normal(4000)
    report = convergence_scan(gaussian_generator, limit, [10, 100], 2000, RandomSource(3), threshold=0.08)
    assert report.kind == 'ks_two_sample'
    assert report.noise_floor == pytest.approx(kolmogorov_critical(2000, two_sample_with=4000))
    assert report.final_distance < 0.08


def test_concentration_scan():
    """ Tests a statistic converging in probability to 1 """
    report = concentration_scan(shrinking_generator, 1., 0.1, [100, 10000], 1000, RandomSource(5), threshold=0.01)
    assert report.kind == 'concentration'
    assert report.distances[0] == pytest.approx(2 * norm.sf(1.), abs=0.05)
    assert report.distances[1] == 0.
    assert report.passed


def test_joint_scan_undefined_replicates():
    """ Undefined replicates are excluded column by column and noted in the report """
    def gen(n, count, rng):
        x = rng.generator.standard_normal((count, 2))
        x[:count // 10, 1] = np.nan
        return x

    dump = dict()
    limits = OrderedDict([('full', norm.cdf), ('partial', norm.cdf)])
    reports = joint_convergence_scan(gen, limits, [10, 20], 2000, RandomSource(2), dict(full=0.06, partial=0.07),
                                     label='joint', dump=dump)
    assert list(reports) == ['full', 'partial']
    assert reports['full'].label == 'joint full'
    assert reports['full'].notes == []
    assert len(reports['partial'].notes) == 2
    assert reports['partial'].threshold == 0.07
    assert [n for n, _ in dump['partial']] == [10, 20]
    assert all(len(v) == 1800 for _, v in dump['partial'])
    assert all(len(v) == 2000 for _, v in dump['full'])


def test_point_limit_column():
    """ A PointLimit column in a joint scan uses the concentration distance """
    def gen(n, count, rng):
        return np.column_stack([shrinking_generator(n, count, rng), gaussian_generator(n, count, rng)])

    limits = OrderedDict([('point', PointLimit(1., 0.1)), ('gauss', norm.cdf)])
    reports = joint_convergence_scan(gen, limits, [10000], 1000, RandomSource(2), 0.06)
    assert reports['point'].kind == 'concentration'
    assert reports['point'].distances == [0.]


def test_generator_failure():
    """ Errors raised by the generator are wrapped, with n attached """
    def failing(n, count, rng):
        if n > 10:
            raise ZeroDivisionError("boom")
        return gaussian_generator(n, count, rng)

    with pytest.raises(GeneratorFailure) as exc_info:
        convergence_scan(failing, norm.cdf, [10, 100], 1000, RandomSource(0), threshold=0.1)
    assert exc_info.value.n == 100
    assert isinstance(exc_info.value.cause, ZeroDivisionError)
    assert "n=100" in str(exc_info.value)


def test_wrong_number_of_columns():
    limits = OrderedDict([('a', norm.cdf), ('b', norm.cdf)])
    with pytest.raises(GeneratorFailure):
        joint_convergence_scan(gaussian_generator, limits, [10], 1000, RandomSource(0), 0.1)


@pytest.mark.parametrize("n_grid, M", [([100, 10], 1000), ([], 1000), ([10, 100], 999)],
                         ids=["decreasing", "empty", "few_replicates"])
def test_invalid_scan(n_grid, M):
    with pytest.raises(ValueError):
        convergence_scan(gaussian_generator, norm.cdf, n_grid, M, RandomSource(0), threshold=0.1)


def test_fdd_times():
    assert fdd_times([0.25, 1.]) == [0.25, 0.5, 1.]
    assert fdd_times([0.75]) == [0.5, 0.75, 1.]
    with pytest.raises(ValueError):
        fdd_times([0.])


def test_fdd_check_cdf_limit():
    """ Tests the finite dimensional check on brownian paths against the exact marginals and increment """
    reports = fdd_check(brownian_paths, gaussian_increment_cdf, [10, 100], 2000, RandomSource(6), threshold=0.06,
                        t_set=(0.25, 0.5, 1.))
    assert list(reports) == ['t=0.25', 't=0.5', 't=1', 'increment']
    for r in reports.values():
        assert r.kind == 'ks_one_sample'
        assert max(r.distances) < 0.06


def test_fdd_check_sample_limit():
    """ Tests the finite dimensional check against limit paths given as a sample """
    times = fdd_times((0.25, 1.))
    limit = brownian_paths(None, 3000, times, RandomSource(8))
    reports = fdd_check(brownian_paths, limit, [10], 2000, RandomSource(6), threshold=0.07, t_set=(0.25, 1.))
    assert list(reports) == ['t=0.25', 't=1', 'increment']
    assert all(r.kind == 'ks_two_sample' for r in reports.values())
    assert all(r.final_distance < 0.07 for r in reports.values())
