"""
Statistics kernel
Two-sample KS, Pearson correlation, one-sample t-test, least squares and ECDF helpers
"""

from typing import Sequence, Tuple

import numpy as np
import structlog
from scipy import special

from errors import AnalysisError
from models.analysis import Regression, TestResult

logger = structlog.get_logger()


def _as_sample(x: Sequence[float], name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float).ravel()
    if not np.all(np.isfinite(arr)):
        raise AnalysisError(f'{name} contains non-finite values')
    return arr


def student_t_two_sided(t: float, df: float) -> float:
    """Two-sided Student-t tail probability through the regularized incomplete beta"""
    if np.isinf(t):
        return 0.0
    return float(special.betainc(df / 2.0, 0.5, df / (df + t * t)))


def ecdf(sample: Sequence[float], points: Sequence[float]) -> np.ndarray:
    """Fraction of the sample <= each point"""
    data = np.sort(_as_sample(sample, 'sample'))
    if data.size == 0:
        raise AnalysisError('empty sample')
    return np.searchsorted(data, np.asarray(points, dtype=float), side='right') / data.size


def cumulative_difference(x: Sequence[float], y: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    """ECDF(x) - ECDF(y) evaluated on the sorted pooled support"""
    x = _as_sample(x, 'x')
    y = _as_sample(y, 'y')
    points = np.unique(np.concatenate([x, y]))
    return points, ecdf(x, points) - ecdf(y, points)


def ks_two_sample(x: Sequence[float], y: Sequence[float]) -> TestResult:
    """
    Two-sample Kolmogorov-Smirnov test.

    The p-value is the asymptotic Kolmogorov tail at sqrt(n1*n2/(n1+n2)) * D.
    """
    x = _as_sample(x, 'x')
    y = _as_sample(y, 'y')
    if x.size == 0 or y.size == 0:
        raise AnalysisError('KS test needs two non-empty samples')
    _, diff = cumulative_difference(x, y)
    d = float(np.max(np.abs(diff)))
    en = x.size * y.size / (x.size + y.size)
    p = float(special.kolmogorov(np.sqrt(en) * d))
    return TestResult(statistic=d, p_value=p, sizes=(int(x.size), int(y.size)), method='ks_2samp')


def pearson(x: Sequence[float], y: Sequence[float]) -> TestResult:
    x = _as_sample(x, 'x')
    y = _as_sample(y, 'y')
    if x.size != y.size:
        raise AnalysisError('samples differ in length')
    n = x.size
    if n < 3:
        raise AnalysisError('undefined correlation: need at least 3 observations')
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise AnalysisError('undefined correlation: constant sample')
    r = float(np.clip((dx @ dy) / np.sqrt(sxx * syy), -1.0, 1.0))
    df = n - 2
    if abs(r) == 1.0:
        p = 0.0
    else:
        t = r * np.sqrt(df / (1.0 - r * r))
        p = student_t_two_sided(t, df)
    return TestResult(statistic=r, p_value=p, sizes=(int(n),), method='pearson')


def t_test_one_sample(x: Sequence[float], mu0: float = 0.0) -> TestResult:
    x = _as_sample(x, 'x')
    n = x.size
    if n < 2:
        raise AnalysisError('t-test needs at least 2 observations')
    s = float(np.std(x, ddof=1))
    if s == 0.0:
        raise AnalysisError('t-test undefined: zero variance')
    t = (float(x.mean()) - mu0) / (s / np.sqrt(n))
    return TestResult(statistic=t, p_value=student_t_two_sided(t, n - 1), sizes=(int(n),), method='t_1samp')


def linear_regression(x: Sequence[float], y: Sequence[float]) -> Regression:
    """Ordinary least squares of y on x"""
    x = _as_sample(x, 'x')
    y = _as_sample(y, 'y')
    if x.size != y.size:
        raise AnalysisError('samples differ in length')
    if np.unique(x).size < 2:
        raise AnalysisError('regression undefined: fewer than 2 distinct x values')
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    slope = float(dx @ dy) / sxx
    intercept = float(y.mean() - slope * x.mean())
    r = 0.0 if syy == 0.0 else float(np.clip((dx @ dy) / np.sqrt(sxx * syy), -1.0, 1.0))
    return Regression(slope=slope, intercept=intercept, r=r, n=int(x.size))
