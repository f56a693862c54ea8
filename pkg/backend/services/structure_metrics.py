"""
Structure Metrics Service
Clustering, greedy modularity, core-periphery detection and core-periphery lead-lag
"""

from typing import Dict, List, Mapping, Optional, Sequence, Union

import networkx as nx
import numpy as np
import structlog

from errors import AnalysisError
from models.analysis import CoreAssignment, LeadLagEdge, LeadLagReport, Partition, TestResult
from models.network import ConceptNetwork, GrowthFiltration
from services.stats import t_test_one_sample

logger = structlog.get_logger()

SeedLike = Union[int, np.random.Generator, None]


def _rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def clustering_coefficient(network: ConceptNetwork, node: int) -> float:
    """Directed clustering of one node; equals 2T/(k(k-1)) on symmetric graphs"""
    if node not in network.node_by_id:
        raise AnalysisError(f'unknown node: {node}')
    return float(nx.clustering(network.to_networkx(), node))


def clustering_all(network: ConceptNetwork) -> Dict[int, float]:
    values = nx.clustering(network.to_networkx())
    return {n: float(values[n]) for n in network.ids}


def modularity_from_labels(network: ConceptNetwork, labels: Mapping[int, int]) -> float:
    """Modularity of a labelling on the undirected weighted skeleton, straight from its definition"""
    skeleton = network.skeleton()
    two_m = 0.0
    strength: Dict[int, float] = {n: 0.0 for n in network.ids}
    inside: Dict[int, float] = {}
    for u, v, w in skeleton.edges(data='weight'):
        two_m += 2.0 * w
        strength[u] += w
        strength[v] += w
        if labels[u] == labels[v]:
            inside[labels[u]] = inside.get(labels[u], 0.0) + 2.0 * w
    if two_m == 0.0:
        raise AnalysisError('modularity undefined: network has no edge weight')
    totals: Dict[int, float] = {}
    for n, k in strength.items():
        totals[labels[n]] = totals.get(labels[n], 0.0) + k
    return float(sum(inside.get(c, 0.0) / two_m - (k / two_m) ** 2 for c, k in totals.items()))


def greedy_modularity(network: ConceptNetwork) -> Partition:
    """Clauset-Newman-Moore agglomeration on the weighted skeleton"""
    if network.n_edges == 0:
        raise AnalysisError('modularity undefined: network has no edges')
    skeleton = network.skeleton()
    if sum(w for _, _, w in skeleton.edges(data='weight')) == 0.0:
        raise AnalysisError('modularity undefined: all edge weights are zero')
    communities = nx.community.greedy_modularity_communities(skeleton, weight='weight')
    communities = sorted((sorted(c) for c in communities), key=lambda c: c[0])
    labels = {node: label for label, members in enumerate(communities) for node in members}
    q = nx.community.modularity(skeleton, [set(c) for c in communities], weight='weight')
    return Partition(labels=labels, modularity=float(q))


def _pairs_touching(n: int, n_core: int) -> int:
    n_periphery = n - n_core
    return n * (n - 1) // 2 - n_periphery * (n_periphery - 1) // 2


def _core_search(adj: List[Dict[int, float]], density: float, start: np.ndarray):
    """Best-flip local search from one start; returns (is_core, score, trace)"""
    n = len(adj)
    core = start.copy()

    def periphery_weight(v):
        return sum(w for u, w in adj[v].items() if not core[u])

    rho = sum(w for v in range(n) for u, w in adj[v].items() if u > v and (core[u] or core[v]))
    score = rho - density * _pairs_touching(n, int(core.sum()))
    trace = [score]
    while True:
        n_periphery = n - int(core.sum())
        best_gain, best_v = 1e-12, -1
        for v in range(n):
            pw = periphery_weight(v)
            if core[v]:
                gain = density * n_periphery - pw
            else:
                gain = pw - density * (n_periphery - 1)
            if gain > best_gain:
                best_gain, best_v = gain, v
        if best_v < 0:
            break
        core[best_v] = not core[best_v]
        score += best_gain
        trace.append(score)
    return core, score, trace


def core_periphery(network: ConceptNetwork, rng_seed: SeedLike = 0, restarts: int = 20) -> CoreAssignment:
    """
    Discrete core-periphery split of the weighted skeleton.

    Maximizes rho minus its expectation under uniform edge density, where rho
    is the weight of edges touching the core and the expectation charges the
    mean pair weight for every node pair touching the core. The all-core split
    scores zero. Best single-label flips from random bipartitions; the best of
    `restarts` runs wins.
    """
    if network.n_edges == 0:
        raise AnalysisError('core-periphery undefined: network has no edges')
    rng = _rng(rng_seed)
    ids = network.ids
    pos = network.position
    adj: List[Dict[int, float]] = [dict() for _ in ids]
    total = 0.0
    for u, v, w in network.skeleton().edges(data='weight'):
        adj[pos[u]][pos[v]] = w
        adj[pos[v]][pos[u]] = w
        total += w
    n = len(ids)
    density = total / (n * (n - 1) / 2)

    best = None
    for _ in range(restarts):
        start = rng.random(len(ids)) < 0.5
        core, score, trace = _core_search(adj, density, start)
        if best is None or score > best[1] + 1e-12:
            best = (core, score, trace)
    core, score, trace = best

    if not core.any():
        strength = [sum(a.values()) for a in adj]
        core[int(np.argmax(strength))] = True
    rho = sum(w for v in range(len(ids)) for u, w in adj[v].items() if u > v and (core[u] or core[v]))
    rho_norm = rho / total if total > 0 else 0.0
    return CoreAssignment(
        is_core={ids[i]: bool(core[i]) for i in range(len(ids))},
        rho=float(rho),
        rho_norm=float(rho_norm),
        score=float(score),
        score_trace=[float(s) for s in trace],
    )


def _lead_lag_edges(network: ConceptNetwork, assignment: CoreAssignment) -> List[LeadLagEdge]:
    out = []
    for u, v in sorted(network.skeleton().edges()):
        cu, cv = assignment.is_core.get(u, False), assignment.is_core.get(v, False)
        if cu == cv:
            continue
        core, periphery = (u, v) if cu else (v, u)
        out.append(LeadLagEdge(core=core, periphery=periphery,
                               delta=network.year_of(core) - network.year_of(periphery)))
    return out


def _test_deltas(deltas: Sequence[int], label: str) -> Optional[TestResult]:
    if len(deltas) < 2 or len(set(deltas)) < 2:
        logger.warning("Lead-lag t-test skipped", label=label, n=len(deltas))
        return None
    return t_test_one_sample(deltas, 0.0)


def lead_lag(
    network: ConceptNetwork,
    assignment: Optional[CoreAssignment] = None,
    scope: str = 'whole',
    rng_seed: SeedLike = 0,
    restarts: int = 20,
) -> LeadLagReport:
    """
    Year of the core node minus year of the peripheral node on every
    core-periphery edge, with a two-sided one-sample t-test of mean zero.

    scope='module' splits the network into greedy modules first and finds a
    core within each module.
    """
    if scope == 'whole':
        if assignment is None:
            if network.n_edges == 0:
                return LeadLagReport(edges=[], scope=scope, label=network.subject)
            assignment = core_periphery(network, rng_seed, restarts)
        edges = _lead_lag_edges(network, assignment)
    elif scope == 'module':
        edges = []
        if network.n_edges:
            rng = _rng(rng_seed)
            for members in greedy_modularity(network).modules():
                module = network.induced(members)
                if module.n_edges == 0:
                    continue
                edges.extend(_lead_lag_edges(module, core_periphery(module, rng, restarts)))
    else:
        raise AnalysisError(f'unknown lead-lag scope: {scope}')
    report = LeadLagReport(edges=edges, scope=scope, label=network.subject)
    if edges:
        report.test = _test_deltas(report.deltas, network.subject)
    return report


def epoch_cut_years(years: Sequence[int], n_epochs: int = 10) -> List[int]:
    """Cut years equally spaced in the count of unique years; the last cut is the final year"""
    unique = sorted(set(years))
    if not unique:
        return []
    if len(unique) < n_epochs:
        logger.warning("Fewer unique years than epochs", unique_years=len(unique), epochs=n_epochs)
        n_epochs = len(unique)
    return [unique[int(round((k + 1) * len(unique) / n_epochs)) - 1] for k in range(n_epochs)]


def epoch_lead_lag(
    filtration: GrowthFiltration, n_epochs: int = 10, rng_seed: int = 0, restarts: int = 20
) -> List[LeadLagReport]:
    reports = []
    for k, year in enumerate(epoch_cut_years(filtration.years, n_epochs)):
        snapshot = filtration.snapshot_at(year)
        report = lead_lag(snapshot, scope='whole', rng_seed=rng_seed, restarts=restarts)
        report.label = f'epoch{k + 1}:{year}'
        reports.append(report)
    return reports


def pooled_lead_lag(reports: Sequence[LeadLagReport]) -> Optional[TestResult]:
    """One t-test over the lead-lag values of every subject together"""
    deltas = [d for r in reports for d in r.deltas]
    return _test_deltas(deltas, 'pooled')


def subject_metrics(network: ConceptNetwork, rng_seed: SeedLike = 0, restarts: int = 20) -> Dict[str, object]:
    """Node count, clustering mean and sd, modularity and coreness of one network"""
    clustering = np.array(list(clustering_all(network).values()) or [0.0])
    row = {
        'subject': network.subject,
        'nodes': network.n_nodes,
        'edges': network.n_edges,
        'clustering_mean': float(clustering.mean()),
        'clustering_sd': float(clustering.std(ddof=0)),
        'modularity': None,
        'modules': None,
        'coreness': None,
        'rho': None,
    }
    if network.n_edges:
        partition = greedy_modularity(network)
        assignment = core_periphery(network, rng_seed, restarts)
        row.update(modularity=partition.modularity, modules=partition.n_modules,
                   coreness=assignment.rho_norm, rho=assignment.rho)
    logger.info("Subject metrics computed", subject=network.subject, nodes=network.n_nodes,
                modularity=row['modularity'], coreness=row['coreness'])
    return row
