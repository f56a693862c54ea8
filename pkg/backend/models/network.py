"""
Concept network data model and its growth filtration
"""

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Any, Dict, Iterable, Iterator, List, Optional, Tuple

import networkx as nx
import numpy as np
from scipy import sparse

from errors import SchemaError

PROVENANCES = ('parsed', 'imputed', 'default', 'simulated')


@dataclass(frozen=True)
class ConceptNode:
    id: int
    title: str
    year: int
    provenance: str = 'parsed'
    tfidf: Dict[int, float] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'id': self.id,
            'title': self.title,
            'year': self.year,
            'provenance': self.provenance,
            'tfidf': [[k, self.tfidf[k]] for k in sorted(self.tfidf)],
        }


@dataclass(frozen=True)
class ConceptEdge:
    """Edge from the hyperlinked article (source) to the hyperlinking article (target)"""
    source: int
    target: int
    weight: float

    def to_dict(self) -> Dict[str, Any]:
        return {'source': self.source, 'target': self.target, 'weight': self.weight}


@dataclass
class ConceptNetwork:
    """
    Directed, cosine-weighted network of concepts with birth years.

    Node ids need not be dense (snapshots keep the ids of the full network);
    matrix views index nodes by position in id order.
    """
    subject: str
    nodes: List[ConceptNode]
    edges: List[ConceptEdge]
    vocab: List[str] = field(default_factory=list)
    null: Optional[Dict[str, Any]] = None

    def __post_init__(self):
        self.nodes = sorted(self.nodes, key=lambda n: n.id)
        self.edges = sorted(self.edges, key=lambda e: (e.source, e.target))
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise SchemaError('nodes', 'duplicate node id')
        known = set(ids)
        seen = set()
        for i, edge in enumerate(self.edges):
            if edge.source not in known or edge.target not in known:
                raise SchemaError(f'edges.{i}', 'edge endpoint does not exist')
            if edge.source == edge.target:
                raise SchemaError(f'edges.{i}', 'self-loop')
            if (edge.source, edge.target) in seen:
                raise SchemaError(f'edges.{i}', 'duplicate edge')
            if not 0.0 <= edge.weight <= 1.0:
                raise SchemaError(f'edges.{i}.weight', 'weight outside [0, 1]')
            seen.add((edge.source, edge.target))

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def node_by_id(self) -> Dict[int, ConceptNode]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def node_by_title(self) -> Dict[str, ConceptNode]:
        return {n.title: n for n in self.nodes}

    @cached_property
    def position(self) -> Dict[int, int]:
        return {n.id: i for i, n in enumerate(self.nodes)}

    @property
    def ids(self) -> List[int]:
        return [n.id for n in self.nodes]

    def year_of(self, node_id: int) -> int:
        return self.node_by_id[node_id].year

    def to_networkx(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        for node in self.nodes:
            graph.add_node(node.id, title=node.title, year=node.year)
        graph.add_weighted_edges_from((e.source, e.target, e.weight) for e in self.edges)
        return graph

    def skeleton(self) -> nx.Graph:
        """Undirected view; reciprocal edges are merged by summing their weights"""
        graph = nx.Graph()
        graph.add_nodes_from(n.id for n in self.nodes)
        for e in self.edges:
            if graph.has_edge(e.source, e.target):
                graph[e.source][e.target]['weight'] += e.weight
            else:
                graph.add_edge(e.source, e.target, weight=e.weight)
        return graph

    def adjacency(self) -> sparse.csr_matrix:
        """Weighted adjacency with entry (i, j) = weight of the edge j -> i"""
        n = self.n_nodes
        if not self.edges:
            return sparse.csr_matrix((n, n))
        rows = [self.position[e.target] for e in self.edges]
        cols = [self.position[e.source] for e in self.edges]
        data = [e.weight for e in self.edges]
        return sparse.csr_matrix((data, (rows, cols)), shape=(n, n))

    def years(self) -> np.ndarray:
        return np.array([n.year for n in self.nodes], dtype=np.int64)

    def induced(self, node_ids: Iterable[int], subject: Optional[str] = None) -> 'ConceptNetwork':
        keep = set(node_ids)
        return ConceptNetwork(
            subject=subject or self.subject,
            nodes=[n for n in self.nodes if n.id in keep],
            edges=[e for e in self.edges if e.source in keep and e.target in keep],
            vocab=self.vocab,
            null=self.null,
        )

    def with_years(self, years: Dict[int, int], null: Optional[Dict[str, Any]] = None) -> 'ConceptNetwork':
        return ConceptNetwork(
            subject=self.subject,
            nodes=[replace(n, year=int(years.get(n.id, n.year))) for n in self.nodes],
            edges=list(self.edges),
            vocab=self.vocab,
            null=null if null is not None else self.null,
        )

    def to_dict(self) -> Dict[str, Any]:
        data = {
            'subject': self.subject,
            'nodes': [n.to_dict() for n in self.nodes],
            'edges': [e.to_dict() for e in self.edges],
            'vocab': list(self.vocab),
        }
        if self.null is not None:
            data['null'] = dict(self.null)
        return data

    def __repr__(self):
        return f'<ConceptNetwork {self.subject}: {self.n_nodes} nodes, {self.n_edges} edges>'


class GrowthFiltration:
    """
    Year-indexed view of a network: a node arrives at its birth year and an edge
    at the later of its endpoints' years, so snapshots are nested.
    """

    def __init__(self, network: ConceptNetwork):
        self.network = network
        self.years: List[int] = sorted({n.year for n in network.nodes})
        self.node_order: List[int] = [n.id for n in sorted(network.nodes, key=lambda n: (n.year, n.id))]

    def edge_arrival(self, edge: ConceptEdge) -> int:
        return max(self.network.year_of(edge.source), self.network.year_of(edge.target))

    def snapshot_at(self, year: int) -> ConceptNetwork:
        keep = [n.id for n in self.network.nodes if n.year <= year]
        return self.network.induced(keep)

    def snapshots(self) -> Iterator[Tuple[int, ConceptNetwork]]:
        for year in self.years:
            yield year, self.snapshot_at(year)

    def __len__(self) -> int:
        return len(self.years)
