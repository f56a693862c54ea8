"""
Simplicial filtration and persistence records
"""

from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Tuple

from errors import AnalysisError


@dataclass(frozen=True, order=True)
class Simplex:
    year: int
    vertices: Tuple[int, ...]

    def __post_init__(self):
        if any(a >= b for a, b in zip(self.vertices, self.vertices[1:])):
            raise ValueError(f'simplex vertices must be strictly increasing: {self.vertices}')

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1

    def faces(self) -> List[Tuple[int, ...]]:
        if self.dim == 0:
            return []
        return [self.vertices[:i] + self.vertices[i + 1:] for i in range(len(self.vertices))]

    def sort_key(self) -> Tuple[int, int, Tuple[int, ...]]:
        return (self.year, self.dim, self.vertices)


class Filtration:
    """Simplices ordered by (year, dimension, vertices) with their positions"""

    def __init__(self, simplices: Iterable[Simplex]):
        self.simplices: List[Simplex] = sorted(simplices, key=Simplex.sort_key)
        self.index: Dict[Tuple[int, ...], int] = {s.vertices: i for i, s in enumerate(self.simplices)}
        self.check_face_order()

    def check_face_order(self):
        for i, simplex in enumerate(self.simplices):
            for face in simplex.faces():
                j = self.index.get(face)
                if j is None or j >= i:
                    raise AnalysisError(
                        f'face {face} does not precede simplex {simplex.vertices} in the filtration'
                    )

    def __len__(self) -> int:
        return len(self.simplices)

    def __getitem__(self, i: int) -> Simplex:
        return self.simplices[i]

    @property
    def years(self) -> List[int]:
        return sorted({s.year for s in self.simplices})

    @property
    def t_max(self) -> Optional[int]:
        return self.simplices[-1].year if self.simplices else None

    def count_at(self, year: int) -> Dict[int, int]:
        counts: Dict[int, int] = {}
        for s in self.simplices:
            if s.year <= year:
                counts[s.dim] = counts.get(s.dim, 0) + 1
        return counts


@dataclass(frozen=True)
class PersistencePair:
    """One cavity; death fields are None while it is still alive"""
    dim: int
    birth: int
    death: Optional[int]
    birth_simplex: Tuple[int, ...]
    death_simplex: Optional[Tuple[int, ...]] = None

    @property
    def alive(self) -> bool:
        return self.death is None

    def lifetime(self, t_max: Optional[int] = None) -> Optional[int]:
        if self.death is not None:
            return self.death - self.birth
        if t_max is not None:
            return t_max - self.birth
        return None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'dim': self.dim,
            'birth': self.birth,
            'death': self.death,
            'birth_simplex': list(self.birth_simplex),
            'death_simplex': list(self.death_simplex) if self.death_simplex else None,
        }


@dataclass
class ParticipationCounts:
    birth: Dict[int, int]
    death: Dict[int, int]

    def of(self, node: int) -> Tuple[int, int]:
        return self.birth.get(node, 0), self.death.get(node, 0)


@dataclass
class LifetimeSummary:
    dead_lifetimes: List[int]
    alive_count: int
    dimension_histogram: Dict[str, Dict[int, int]]

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'LifetimeSummary':
        return cls(
            dead_lifetimes=[int(x) for x in data['dead_lifetimes']],
            alive_count=int(data['alive_count']),
            dimension_histogram={
                k: {int(d): int(c) for d, c in v.items()} for k, v in data['dimension_histogram'].items()
            },
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            'dead_lifetimes': list(self.dead_lifetimes),
            'alive_count': self.alive_count,
            'dimension_histogram': {
                k: {str(d): c for d, c in sorted(v.items())} for k, v in self.dimension_histogram.items()
            },
        }
