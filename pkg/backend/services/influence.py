"""
Influence Service
Union network over all subjects, spectral normalization and finite-horizon
impulse response, and how impulse response and Nobel recognition relate to
cavity participation
"""

from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import structlog
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from errors import AnalysisError
from models.corpus import NobelNodeSet
from models.dynamics import InfluenceScores, ParticipationByTitle, UnionNetwork
from models.network import ConceptEdge, ConceptNetwork, ConceptNode
from services.stats import cumulative_difference, ks_two_sample, pearson

logger = structlog.get_logger()

TOLERANCE = 1e-10
MAX_ITERATIONS = 10 ** 4
UNION_SUBJECT = 'union'


def build_union(networks: Sequence[ConceptNetwork]) -> UnionNetwork:
    """
    Merge subject networks on node title.

    A title seen with different years keeps the earliest one; an edge seen
    with different weights keeps the largest. Node ids are renumbered densely
    in title order.
    """
    if not networks:
        raise AnalysisError('union needs at least one network')
    ordered = sorted(networks, key=lambda n: n.subject)
    chosen: Dict[str, ConceptNode] = {}
    provenance: Dict[str, List[str]] = {}
    conflicts = 0
    for network in ordered:
        for node in network.nodes:
            provenance.setdefault(node.title, [])
            if network.subject not in provenance[node.title]:
                provenance[node.title].append(network.subject)
            current = chosen.get(node.title)
            if current is None:
                chosen[node.title] = node
            elif current.year != node.year:
                conflicts += 1
                logger.warning("Conflicting birth years in union", title=node.title,
                               kept=min(current.year, node.year), dropped=max(current.year, node.year))
                if node.year < current.year:
                    chosen[node.title] = node

    vocab = list(ordered[0].vocab)
    shared_vocab = all(list(n.vocab) == vocab for n in ordered)
    if not shared_vocab:
        logger.warning("Subject networks use different vocabularies; union drops tf-idf vectors")
        vocab = []

    titles = sorted(chosen)
    new_id = {title: i for i, title in enumerate(titles)}
    nodes = [
        ConceptNode(id=new_id[t], title=t, year=chosen[t].year, provenance=chosen[t].provenance,
                    tfidf=dict(chosen[t].tfidf) if shared_vocab else {})
        for t in titles
    ]

    weights: Dict[Tuple[int, int], float] = {}
    for network in ordered:
        title_of = {n.id: n.title for n in network.nodes}
        for e in network.edges:
            key = (new_id[title_of[e.source]], new_id[title_of[e.target]])
            previous = weights.get(key)
            if previous is not None and previous != e.weight:
                logger.warning("Conflicting edge weights in union", source=titles[key[0]],
                               target=titles[key[1]], kept=max(previous, e.weight))
            weights[key] = e.weight if previous is None else max(previous, e.weight)
    edges = [ConceptEdge(source=s, target=t, weight=w) for (s, t), w in sorted(weights.items())]

    union = ConceptNetwork(subject=UNION_SUBJECT, nodes=nodes, edges=edges, vocab=vocab)
    logger.info("Union network built", subjects=len(ordered), nodes=union.n_nodes, edges=union.n_edges,
                year_conflicts=conflicts)
    return UnionNetwork(network=union, provenance={t: sorted(provenance[t]) for t in titles})


def _component_radius(block: sparse.csr_matrix) -> float:
    """
    Perron root of an irreducible non-negative block.

    Iterates on block + I, which is primitive, from the ones vector and stops
    once the Collatz-Wielandt bounds are within TOLERANCE.
    """
    shifted = (block + sparse.identity(block.shape[0], format='csr')).tocsr()
    v = np.ones(block.shape[0])
    residual = np.inf
    for _ in range(MAX_ITERATIONS):
        w = shifted @ v
        ratios = w / v
        lower, upper = float(ratios.min()), float(ratios.max())
        residual = upper - lower
        if residual <= TOLERANCE * max(1.0, upper):
            return 0.5 * (lower + upper) - 1.0
        v = w / np.linalg.norm(w)
    raise AnalysisError(f'power iteration did not converge: residual {residual:.3e} '
                        f'after {MAX_ITERATIONS} iterations')


def spectral_radius(a: sparse.spmatrix) -> float:
    """Spectral radius of |A|, the largest Perron root over its strongly connected components"""
    magnitude = abs(sparse.csr_matrix(a))
    magnitude.eliminate_zeros()
    n = magnitude.shape[0]
    if n == 0 or magnitude.nnz == 0:
        return 0.0
    n_components, component = connected_components(magnitude, directed=True, connection='strong')
    radius = 0.0
    for c in range(n_components):
        members = np.flatnonzero(component == c)
        block = magnitude[members][:, members]
        # single vertex without a self-loop
        if block.nnz == 0:
            continue
        radius = max(radius, _component_radius(block.tocsr()))
    return float(radius)


def normalize_adjacency(a: sparse.spmatrix) -> Tuple[sparse.csr_matrix, float]:
    """A / (1 + lambda_max) with lambda_max the spectral radius of |A|"""
    lambda_max = spectral_radius(a)
    a_norm = sparse.csr_matrix(a, dtype=float) / (1.0 + lambda_max)
    return sparse.csr_matrix(a_norm), lambda_max


def _impulse_terms(a_norm: sparse.spmatrix, horizon: int) -> Iterable[np.ndarray]:
    x = np.ones(a_norm.shape[0])
    yield x * x
    for _ in range(horizon):
        x = a_norm @ x
        yield x * x


def impulse_response(a_norm: sparse.spmatrix, horizon: int = 5, titles: Optional[Sequence[str]] = None,
                     lambda_max: float = 0.0) -> InfluenceScores:
    """
    Diagonal of the finite-horizon controllability Gramian with a ones input vector.

    score(i) = sum over m = 0..horizon of ((A_norm^m 1)_i)^2, built from
    horizon sparse matrix-vector products.
    """
    if horizon < 0:
        raise AnalysisError('horizon must be non-negative')
    a_norm = sparse.csr_matrix(a_norm)
    scores = np.zeros(a_norm.shape[0])
    for term in _impulse_terms(a_norm, horizon):
        scores += term
    names = list(titles) if titles is not None else [str(i) for i in range(a_norm.shape[0])]
    return InfluenceScores(titles=names, scores=scores, horizon=horizon, lambda_max=float(lambda_max))


def impulse_response_sweep(a_norm: sparse.spmatrix, horizons: Sequence[int]) -> Dict[int, np.ndarray]:
    """Scores at every requested horizon from one pass of mat-vecs"""
    wanted = sorted(set(int(k) for k in horizons))
    if not wanted:
        return {}
    if wanted[0] < 0:
        raise AnalysisError('horizon must be non-negative')
    a_norm = sparse.csr_matrix(a_norm)
    out: Dict[int, np.ndarray] = {}
    running = np.zeros(a_norm.shape[0])
    for m, term in enumerate(_impulse_terms(a_norm, wanted[-1])):
        running = running + term
        if m in wanted:
            out[m] = running.copy()
    return out


def influence_scores(union: UnionNetwork, horizon: int = 5) -> Tuple[InfluenceScores, sparse.csr_matrix]:
    network = union.network
    a_norm, lambda_max = normalize_adjacency(network.adjacency())
    scores = impulse_response(a_norm, horizon, titles=[n.title for n in network.nodes], lambda_max=lambda_max)
    logger.info("Impulse response computed", nodes=network.n_nodes, horizon=horizon, lambda_max=lambda_max,
                max_score=float(scores.scores.max()) if network.n_nodes else None)
    return scores, a_norm


def participation_by_title(rows: Iterable[Mapping]) -> ParticipationByTitle:
    """Birth and death participation summed per title across every subject's barcode"""
    birth: Dict[str, int] = {}
    death: Dict[str, int] = {}
    for row in rows:
        title = row['title']
        birth[title] = birth.get(title, 0) + int(row['birth_count'])
        death[title] = death.get(title, 0) + int(row['death_count'])
    return ParticipationByTitle(birth=birth, death=death)


def _counts(participation: ParticipationByTitle, titles: Sequence[str]) -> Tuple[np.ndarray, np.ndarray]:
    pairs = [participation.of(t) for t in titles]
    return np.array([p[0] for p in pairs], dtype=float), np.array([p[1] for p in pairs], dtype=float)


def correlate_participation(scores: InfluenceScores, participation: ParticipationByTitle) -> Dict[str, Optional[dict]]:
    """Pearson correlation of impulse response with birth and with death participation"""
    birth, death = _counts(participation, scores.titles)
    out: Dict[str, Optional[dict]] = {}
    for kind, counts in (('birth', birth), ('death', death)):
        try:
            out[kind] = pearson(scores.scores, counts).to_dict()
        except AnalysisError as e:
            logger.warning("Correlation undefined", kind=kind, horizon=scores.horizon, reason=str(e))
            out[kind] = None
    return out


def horizon_sweep(union: UnionNetwork, participation: ParticipationByTitle, a_norm: sparse.spmatrix,
                  lambda_max: float, max_horizon: int = 5) -> List[dict]:
    """Correlations at every horizon 1..max_horizon"""
    titles = [n.title for n in union.network.nodes]
    rows = []
    for k, values in impulse_response_sweep(a_norm, range(1, max_horizon + 1)).items():
        scores = InfluenceScores(titles=titles, scores=values, horizon=k, lambda_max=lambda_max)
        rows.append({'horizon': k, **correlate_participation(scores, participation)})
    return rows


def nobel_comparison(participation: ParticipationByTitle, nobel: NobelNodeSet,
                     titles: Sequence[str]) -> Dict[str, object]:
    """
    KS tests of Nobel against non-Nobel nodes on birth and on death
    participation, with the cumulative-frequency difference curves.
    """
    title_set = set(titles)
    matched = sorted(t for t in nobel.prize_titles if t in title_set)
    unmatched = sorted(t for t in nobel.prize_titles if t not in title_set)
    if unmatched:
        logger.warning("Nobel titles absent from the union network", count=len(unmatched), titles=unmatched[:10])
    if not matched:
        raise AnalysisError('no Nobel titles among the network nodes')
    others = sorted(title_set - set(matched))
    if not others:
        raise AnalysisError('empty complement: every node is a Nobel node')

    prize_birth, prize_death = _counts(participation, matched)
    other_birth, other_death = _counts(participation, others)
    report: Dict[str, object] = {'nobel_nodes': len(matched), 'other_nodes': len(others), 'unmatched': unmatched}
    for kind, x, y in (('birth', prize_birth, other_birth), ('death', prize_death, other_death)):
        points, difference = cumulative_difference(x, y)
        report[kind] = {
            'test': ks_two_sample(x, y).to_dict(),
            'curve': {'points': points.tolist(), 'difference': difference.tolist()},
        }
    logger.info("Nobel comparison done", nobel_nodes=len(matched), birth_ks=report['birth']['test']['statistic'],
                death_ks=report['death']['test']['statistic'])
    return report


def influence_rows(scores: InfluenceScores, participation: ParticipationByTitle, nobel: NobelNodeSet) -> List[dict]:
    return [
        {'title': t, 'score': float(s), 'birth_count': participation.of(t)[0],
         'death_count': participation.of(t)[1], 'is_nobel': t in nobel}
        for t, s in zip(scores.titles, scores.scores)
    ]
