"""
Records for growth simulation, temporal modules and influence scoring
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from models.network import ConceptNetwork


@dataclass(frozen=True)
class MutationParams:
    """Calibrated per-year mutation probabilities and the detachment-threshold normal"""
    p: float
    i: float
    sim_mean: float
    sim_sd: float
    tfidf_value_pool: Tuple[float, ...] = ()
    diagnostics: Dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, 'p', min(1.0, max(0.0, float(self.p))))
        object.__setattr__(self, 'i', min(1.0, max(0.0, float(self.i))))
        object.__setattr__(self, 'sim_sd', max(0.0, float(self.sim_sd)))
        object.__setattr__(self, 'tfidf_value_pool', tuple(float(v) for v in self.tfidf_value_pool))

    @property
    def d(self) -> float:
        return self.i

    def to_dict(self) -> Dict[str, Any]:
        return {
            'p': self.p,
            'i': self.i,
            'd': self.d,
            'sim_mean': self.sim_mean,
            'sim_sd': self.sim_sd,
            'pool_size': len(self.tfidf_value_pool),
            'diagnostics': self.diagnostics,
        }


@dataclass
class Seed:
    parent: int
    vector: Dict[int, float]
    threshold: float

    def to_array(self, size: int) -> np.ndarray:
        out = np.zeros(size)
        for k, v in self.vector.items():
            out[k] = v
        return out


@dataclass
class SimTrace:
    network: ConceptNetwork
    counts: Dict[int, int]
    events: List[Dict[str, Any]]
    start_year: int
    end_year: int

    def to_dict(self) -> Dict[str, Any]:
        """Growth curve and events; the simulated network is serialized on its own"""
        return {
            'subject': self.network.subject,
            'start_year': self.start_year,
            'end_year': self.end_year,
            'counts': [[y, self.counts[y]] for y in sorted(self.counts)],
            'events': self.events,
        }


@dataclass
class MultilayerNetwork:
    """One layer per unique year; layer t holds the snapshot at that year"""
    years: List[int]
    layers: List[ConceptNetwork]
    omega: float

    def __post_init__(self):
        for prev, cur in zip(self.layers, self.layers[1:]):
            if not set(prev.ids) <= set(cur.ids):
                raise ValueError('layers must be nested')

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    def interslice_edges(self) -> List[Tuple[int, int, int]]:
        """(layer, next layer, node) for every node present in consecutive layers"""
        out = []
        for t in range(self.n_layers - 1):
            for node in self.layers[t].ids:
                out.append((t, t + 1, node))
        return out


@dataclass
class MembershipTrace:
    subject: str
    years: List[int]
    labels: Dict[Tuple[int, int], int]
    changes: List[int] = field(default_factory=list)
    changepoints: List[int] = field(default_factory=list)
    epochs: List[Tuple[float, int]] = field(default_factory=list)
    quality: float = 0.0

    def epoch_of(self, layer: int) -> int:
        return sum(1 for c in self.changepoints if c <= layer)


@dataclass
class UnionNetwork:
    network: ConceptNetwork
    provenance: Dict[str, List[str]]


@dataclass
class InfluenceScores:
    titles: List[str]
    scores: np.ndarray
    horizon: int
    lambda_max: float

    def as_dict(self) -> Dict[str, float]:
        return {t: float(s) for t, s in zip(self.titles, self.scores)}


@dataclass
class ParticipationByTitle:
    birth: Dict[str, int]
    death: Dict[str, int]

    def of(self, title: str) -> Tuple[int, int]:
        return self.birth.get(title, 0), self.death.get(title, 0)


@dataclass
class RobustnessReport:
    rank_orders: Dict[str, List[int]]
    reference: Optional[str] = None

    @property
    def preserved(self) -> bool:
        orders = list(self.rank_orders.values())
        return all(o == orders[0] for o in orders)
