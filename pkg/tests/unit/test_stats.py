import numpy as np
import pytest
from scipy import stats as reference

from errors import AnalysisError
from services.stats import (
    cumulative_difference,
    ecdf,
    ks_two_sample,
    linear_regression,
    pearson,
    student_t_two_sided,
    t_test_one_sample,
)


@pytest.fixture
def rng():
    return np.random.default_rng(20190801)


def test_ks_matches_reference_statistic_and_asymptotic_tail(rng):
    for _ in range(100):
        x = rng.normal(size=int(rng.integers(5, 60)))
        y = rng.normal(loc=0.3, size=int(rng.integers(5, 60)))
        result = ks_two_sample(x, y)
        expected = reference.ks_2samp(x, y)
        en = x.size * y.size / (x.size + y.size)
        assert result.statistic == pytest.approx(expected.statistic, abs=1e-12)
        assert result.p_value == pytest.approx(reference.kstwobign.sf(np.sqrt(en) * result.statistic), abs=1e-9)


def test_ks_identical_samples_have_zero_statistic():
    result = ks_two_sample([1, 2, 3, 4], [1, 2, 3, 4])
    assert result.statistic == 0.0
    assert result.p_value == 1.0


def test_ks_disjoint_samples_have_unit_statistic():
    assert ks_two_sample([1, 2, 3], [10, 11, 12]).statistic == 1.0


def test_ks_rejects_empty_sample():
    with pytest.raises(AnalysisError):
        ks_two_sample([], [1.0])


def test_pearson_matches_reference(rng):
    for _ in range(100):
        n = int(rng.integers(4, 80))
        x = rng.normal(size=n)
        y = 0.5 * x + rng.normal(size=n)
        result = pearson(x, y)
        expected = reference.pearsonr(x, y)
        assert result.statistic == pytest.approx(expected[0], abs=1e-9)
        assert result.p_value == pytest.approx(expected[1], abs=1e-9)


def test_pearson_perfect_line():
    result = pearson([1, 2, 3, 4], [2, 4, 6, 8])
    assert result.statistic == pytest.approx(1.0)
    assert result.p_value == 0.0


def test_pearson_constant_sample_is_undefined():
    with pytest.raises(AnalysisError, match='undefined correlation'):
        pearson([1, 2, 3], [5, 5, 5])


def test_pearson_needs_three_points():
    with pytest.raises(AnalysisError):
        pearson([1, 2], [3, 4])


def test_t_test_matches_reference(rng):
    for _ in range(100):
        x = rng.normal(loc=0.2, size=int(rng.integers(3, 50)))
        result = t_test_one_sample(x, 0.0)
        expected = reference.ttest_1samp(x, 0.0)
        assert result.statistic == pytest.approx(expected.statistic, abs=1e-9)
        assert result.p_value == pytest.approx(expected.pvalue, abs=1e-9)


def test_t_test_zero_variance_is_an_error():
    with pytest.raises(AnalysisError):
        t_test_one_sample([2, 2, 2])


def test_regression_matches_reference(rng):
    for _ in range(100):
        n = int(rng.integers(3, 50))
        x = rng.normal(size=n)
        y = 1.5 * x - 2 + rng.normal(scale=0.1, size=n)
        fit = linear_regression(x, y)
        expected = reference.linregress(x, y)
        assert fit.slope == pytest.approx(expected.slope, abs=1e-9)
        assert fit.intercept == pytest.approx(expected.intercept, abs=1e-9)
        assert fit.r == pytest.approx(expected.rvalue, abs=1e-9)


def test_regression_exact_line():
    fit = linear_regression([0, 1, 2, 3], [1, 3, 5, 7])
    assert fit.slope == pytest.approx(2.0)
    assert fit.intercept == pytest.approx(1.0)
    assert fit.r == pytest.approx(1.0)


def test_regression_needs_two_distinct_x():
    with pytest.raises(AnalysisError, match='regression undefined'):
        linear_regression([1, 1, 1], [1, 2, 3])


def test_regression_constant_y_has_zero_r():
    fit = linear_regression([1, 2, 3], [4, 4, 4])
    assert fit.slope == 0.0
    assert fit.r == 0.0


def test_student_t_tail():
    assert student_t_two_sided(0.0, 5) == pytest.approx(1.0)
    assert student_t_two_sided(2.0, 10) == pytest.approx(2 * reference.t.sf(2.0, 10), abs=1e-12)
    assert student_t_two_sided(np.inf, 10) == 0.0


def test_ecdf_counts_values_at_or_below_each_point():
    assert ecdf([1, 2, 2, 4], [0, 1, 2, 3, 4]).tolist() == [0.0, 0.25, 0.75, 0.75, 1.0]


def test_cumulative_difference_on_pooled_support():
    points, diff = cumulative_difference([1, 2], [2, 3])
    assert points.tolist() == [1.0, 2.0, 3.0]
    assert diff.tolist() == pytest.approx([0.5, 0.5, 0.0])
