"""
Result records of the structural and statistical analyses
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np


@dataclass(frozen=True)
class TestResult:
    """Test statistic with its two-sided p-value"""
    __test__ = False  # not a pytest class

    statistic: float
    p_value: float
    sizes: Tuple[int, ...]
    method: str

    def __post_init__(self):
        if not math.isfinite(self.statistic):
            raise ValueError(f'{self.method}: statistic is not finite')
        object.__setattr__(self, 'p_value', min(1.0, max(0.0, float(self.p_value))))

    def to_dict(self) -> Dict[str, Any]:
        return {
            'method': self.method,
            'statistic': self.statistic,
            'p_value': self.p_value,
            'sizes': list(self.sizes),
        }


@dataclass(frozen=True)
class Regression:
    slope: float
    intercept: float
    r: float
    n: int

    def to_dict(self) -> Dict[str, Any]:
        return {'slope': self.slope, 'intercept': self.intercept, 'r': self.r, 'n': self.n}


@dataclass
class Partition:
    """Module label per node id and the modularity Q of the labelling"""
    labels: Dict[int, int]
    modularity: float

    @property
    def n_modules(self) -> int:
        return len(set(self.labels.values()))

    def modules(self) -> List[List[int]]:
        groups: Dict[int, List[int]] = {}
        for node, label in sorted(self.labels.items()):
            groups.setdefault(label, []).append(node)
        return [groups[k] for k in sorted(groups)]


@dataclass
class CoreAssignment:
    is_core: Dict[int, bool]
    rho: float
    rho_norm: float
    score: float = 0.0
    score_trace: List[float] = field(default_factory=list)

    @property
    def core(self) -> List[int]:
        return sorted(n for n, c in self.is_core.items() if c)


@dataclass(frozen=True)
class LeadLagEdge:
    core: int
    periphery: int
    delta: int


@dataclass
class LeadLagReport:
    """Year differences (core minus periphery) over core-periphery edges"""
    edges: List[LeadLagEdge]
    scope: str = 'whole'
    test: Optional[TestResult] = None
    label: str = ''

    @property
    def deltas(self) -> List[int]:
        return [e.delta for e in self.edges]

    @property
    def is_empty(self) -> bool:
        return not self.edges

    def summary(self) -> Dict[str, Any]:
        """Quartiles and Tukey outlier fences of the deltas"""
        if not self.edges:
            return {'n': 0}
        d = np.asarray(self.deltas, dtype=float)
        q1, median, q3 = np.percentile(d, [25, 50, 75])
        iqr = q3 - q1
        return {
            'n': int(d.size),
            'mean': float(d.mean()),
            'q1': float(q1),
            'median': float(median),
            'q3': float(q3),
            'lower_fence': float(q1 - 1.5 * iqr),
            'upper_fence': float(q3 + 1.5 * iqr),
        }

    def to_dict(self) -> Dict[str, Any]:
        return {
            'scope': self.scope,
            'label': self.label,
            'summary': self.summary(),
            'test': self.test.to_dict() if self.test else None,
        }
