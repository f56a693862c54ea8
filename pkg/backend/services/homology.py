"""
Homology Service
Persistent homology of the birth-year filtration of a concept network's clique complex
"""

from typing import Dict, List, Mapping, Optional, Sequence

import networkx as nx
import structlog

from config.settings import get_config
from errors import AnalysisError
from models.network import ConceptNetwork
from models.topology import Filtration, LifetimeSummary, ParticipationCounts, PersistencePair, Simplex
from services.stats import ks_two_sample

logger = structlog.get_logger()


def enumerate_cliques(network: ConceptNetwork, max_dim: int = 2, max_cliques: Optional[int] = None) -> List[Simplex]:
    """
    Cliques of the undirected skeleton with up to max_dim + 2 vertices.

    A clique enters the filtration at the latest birth year among its vertices,
    which is also the latest arrival among its edges.
    """
    limit = get_config().MAX_CLIQUES if max_cliques is None else max_cliques
    max_size = max_dim + 2
    graph = nx.Graph()
    graph.add_nodes_from(network.ids)
    graph.add_edges_from((e.source, e.target) for e in network.edges)
    years = {n.id: n.year for n in network.nodes}

    simplices = []
    for clique in nx.enumerate_all_cliques(graph):
        if len(clique) > max_size:
            break
        vertices = tuple(sorted(clique))
        simplices.append(Simplex(year=max(years[v] for v in vertices), vertices=vertices))
        if len(simplices) > limit:
            raise AnalysisError(f'clique count exceeds {limit}; lower max_dim')
    return simplices


def build_filtration(simplices: Sequence[Simplex]) -> Filtration:
    return Filtration(simplices)


def persistent_homology(filtration: Filtration, max_dim: int = 2) -> List[PersistencePair]:
    """
    Persistence pairs from Z/2 boundary-matrix column reduction.

    Dimensions are reduced from the top down so that columns of simplices
    already known to be killed are cleared without reduction. Pairs born and
    killed in the same year are dropped; unpaired creators are alive.
    """
    simplices = filtration.simplices
    index = filtration.index
    by_dim: Dict[int, List[int]] = {}
    for j, s in enumerate(simplices):
        by_dim.setdefault(s.dim, []).append(j)

    pivot_of_low: Dict[int, int] = {}
    columns: Dict[int, set] = {}
    cleared = set()
    for dim in sorted(by_dim, reverse=True):
        if dim == 0:
            continue
        for j in by_dim[dim]:
            if j in cleared:
                continue
            col = {index[f] for f in simplices[j].faces()}
            while col:
                low = max(col)
                other = pivot_of_low.get(low)
                if other is None:
                    break
                col ^= columns[other]
            if col:
                low = max(col)
                pivot_of_low[low] = j
                columns[j] = col
                cleared.add(low)

    killers = set(pivot_of_low.values())
    pairs: List[PersistencePair] = []
    zero = 0
    for low, j in pivot_of_low.items():
        birth, death = simplices[low], simplices[j]
        if birth.dim > max_dim:
            continue
        if birth.year == death.year:
            zero += 1
            continue
        pairs.append(PersistencePair(dim=birth.dim, birth=birth.year, death=death.year,
                                     birth_simplex=birth.vertices, death_simplex=death.vertices))
    for i, s in enumerate(simplices):
        if i in killers or i in pivot_of_low or s.dim > max_dim:
            continue
        pairs.append(PersistencePair(dim=s.dim, birth=s.year, death=None, birth_simplex=s.vertices))

    pairs.sort(key=lambda p: (p.dim, p.birth, p.death is None, p.death or 0, p.birth_simplex))
    logger.debug("Persistence computed", simplices=len(simplices), pairs=len(pairs), zero_persistence=zero)
    return pairs


def compute_barcode(network: ConceptNetwork, max_dim: int = 2, max_cliques: Optional[int] = None) -> List[PersistencePair]:
    filtration = build_filtration(enumerate_cliques(network, max_dim, max_cliques))
    pairs = persistent_homology(filtration, max_dim)
    logger.info("Barcode computed", subject=network.subject, simplices=len(filtration), pairs=len(pairs),
                alive=sum(1 for p in pairs if p.alive))
    return pairs


def betti_numbers(pairs: Sequence[PersistencePair], year: int, max_dim: int = 2) -> List[int]:
    """Number of cavities per dimension that are alive at the given year"""
    betti = [0] * (max_dim + 1)
    for p in pairs:
        if p.dim <= max_dim and p.birth <= year and (p.death is None or year < p.death):
            betti[p.dim] += 1
    return betti


def lifetime_distributions(pairs: Sequence[PersistencePair], include_h0: bool = True) -> LifetimeSummary:
    """Lifetimes of dead cavities, count of alive ones and per-dimension counts of each"""
    kept = [p for p in pairs if include_h0 or p.dim > 0]
    dead = [p.death - p.birth for p in kept if not p.alive]
    histogram: Dict[str, Dict[int, int]] = {'alive': {}, 'dead': {}}
    for p in kept:
        bucket = histogram['alive' if p.alive else 'dead']
        bucket[p.dim] = bucket.get(p.dim, 0) + 1
    return LifetimeSummary(dead_lifetimes=sorted(dead), alive_count=sum(1 for p in kept if p.alive),
                           dimension_histogram=histogram)


def participation(pairs: Sequence[PersistencePair]) -> ParticipationCounts:
    """Per node, how many cavities have it in their birth or death simplex"""
    birth: Dict[int, int] = {}
    death: Dict[int, int] = {}
    for p in pairs:
        for v in p.birth_simplex:
            birth[v] = birth.get(v, 0) + 1
        for v in p.death_simplex or ():
            death[v] = death.get(v, 0) + 1
    return ParticipationCounts(birth=birth, death=death)


def compare_gap_statistics(
    real: Mapping[str, LifetimeSummary], others: Mapping[str, Mapping[str, LifetimeSummary]]
) -> Dict[str, Dict[str, Optional[dict]]]:
    """
    KS tests of real against each comparator, pooled across subjects:
    dead lifetimes, and alive counts with one value per subject.
    """

    def pooled(summaries: Mapping[str, LifetimeSummary]):
        lifetimes = [x for k in sorted(summaries) for x in summaries[k].dead_lifetimes]
        alive = [summaries[k].alive_count for k in sorted(summaries)]
        return lifetimes, alive

    real_dead, real_alive = pooled(real)
    report: Dict[str, Dict[str, Optional[dict]]] = {}
    for name in sorted(others):
        dead, alive = pooled(others[name])
        entry: Dict[str, Optional[dict]] = {}
        for key, x, y in (('dead_lifetimes', real_dead, dead), ('alive_counts', real_alive, alive)):
            if not x or not y:
                logger.warning("Gap comparison skipped on empty sample", comparator=name, sample=key)
                entry[key] = None
            else:
                entry[key] = ks_two_sample(x, y).to_dict()
        report[name] = entry
    return report


def barcode_rows(network: ConceptNetwork, pairs: Sequence[PersistencePair]) -> List[dict]:
    titles = {n.id: n.title for n in network.nodes}

    def names(simplex):
        return ';'.join(titles[v] for v in simplex) if simplex else ''

    return [
        {
            'subject': network.subject,
            'dim': p.dim,
            'birth_year': p.birth,
            'death_year': 'inf' if p.alive else p.death,
            'birth_simplex': names(p.birth_simplex),
            'death_simplex': names(p.death_simplex),
        }
        for p in pairs
    ]


def participation_rows(network: ConceptNetwork, counts: ParticipationCounts) -> List[dict]:
    return [
        {'subject': network.subject, 'title': n.title, 'birth_count': counts.of(n.id)[0],
         'death_count': counts.of(n.id)[1]}
        for n in network.nodes
    ]
