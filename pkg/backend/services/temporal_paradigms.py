"""
Temporal Paradigms Service
Multislice community detection over yearly snapshots, membership-change
counting, Poisson binary segmentation and the four-epoch signature
"""

from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import structlog

from errors import AnalysisError
from models.dynamics import MembershipTrace, MultilayerNetwork, RobustnessReport
from models.network import ConceptNetwork, GrowthFiltration

logger = structlog.get_logger()

MIN_GAIN = 1e-10
MIN_SEGMENT = 2

Labels = Dict[Tuple[int, int], int]


def build_multilayer(filtration: GrowthFiltration, omega: float = 0.01) -> MultilayerNetwork:
    if omega <= 0:
        raise AnalysisError('interslice coupling must be positive')
    layers = [filtration.snapshot_at(year) for year in filtration.years]
    return MultilayerNetwork(years=list(filtration.years), layers=layers, omega=omega)


class _SupraGraph:
    """(node, layer) vertices with intra-layer skeleton weights and interslice couplings"""

    def __init__(self, multilayer: MultilayerNetwork):
        self.keys: List[Tuple[int, int]] = []
        self.index: Dict[Tuple[int, int], int] = {}
        for t, layer in enumerate(multilayer.layers):
            for node in layer.ids:
                self.index[(node, t)] = len(self.keys)
                self.keys.append((node, t))
        n = len(self.keys)
        self.layer = np.array([t for _, t in self.keys], dtype=np.int64)
        self.strength = np.zeros(n)
        self.neighbors: List[Dict[int, float]] = [dict() for _ in range(n)]
        self.two_m = np.zeros(multilayer.n_layers)
        for t, layer in enumerate(multilayer.layers):
            for u, v, w in layer.skeleton().edges(data='weight'):
                a, b = self.index[(u, t)], self.index[(v, t)]
                self.neighbors[a][b] = self.neighbors[a].get(b, 0.0) + w
                self.neighbors[b][a] = self.neighbors[b].get(a, 0.0) + w
                self.strength[a] += w
                self.strength[b] += w
                self.two_m[t] += 2 * w
        inter = 0.0
        for t, t_next, node in multilayer.interslice_edges():
            a, b = self.index[(node, t)], self.index[(node, t_next)]
            self.neighbors[a][b] = self.neighbors[a].get(b, 0.0) + multilayer.omega
            self.neighbors[b][a] = self.neighbors[b].get(a, 0.0) + multilayer.omega
            inter += 2 * multilayer.omega
        self.two_mu = float(self.two_m.sum() + inter)

    def null_scale(self, t: int, gamma: float) -> float:
        return gamma / self.two_m[t] if self.two_m[t] > 0 else 0.0


def multislice_modularity(multilayer: MultilayerNetwork, labels: Mapping[Tuple[int, int], int], gamma: float = 1.0) -> float:
    """Multislice modularity of a (node, layer) labelling evaluated from its definition"""
    total = 0.0
    two_mu = 0.0
    for t, layer in enumerate(multilayer.layers):
        skeleton = layer.skeleton()
        two_m = 0.0
        strength: Dict[int, float] = {n: 0.0 for n in layer.ids}
        for u, v, w in skeleton.edges(data='weight'):
            two_m += 2 * w
            strength[u] += w
            strength[v] += w
            if labels[(u, t)] == labels[(v, t)]:
                total += 2 * w
        two_mu += two_m
        if two_m > 0:
            per_label: Dict[int, float] = {}
            for n, k in strength.items():
                per_label[labels[(n, t)]] = per_label.get(labels[(n, t)], 0.0) + k
            total -= gamma * sum(k * k for k in per_label.values()) / two_m
    for t, t_next, node in multilayer.interslice_edges():
        two_mu += 2 * multilayer.omega
        if labels[(node, t)] == labels[(node, t_next)]:
            total += 2 * multilayer.omega
    if two_mu == 0:
        raise AnalysisError('multislice modularity undefined: no edges and no couplings')
    return total / two_mu


def _null(scale: Mapping[int, float], k: Mapping[int, float], tot: Optional[Mapping[int, float]]) -> float:
    if not tot:
        return 0.0
    return sum(scale[t] * k_t * tot.get(t, 0.0) for t, k_t in k.items())


def _shift(tot: Dict[int, float], k: Mapping[int, float], sign: float):
    for t, k_t in k.items():
        tot[t] = tot.get(t, 0.0) + sign * k_t


def _move_phase(neighbors: List[Dict[int, float]], strength: List[Dict[int, float]], scale: Mapping[int, float],
                two_mu: float, rng: np.random.Generator) -> Tuple[np.ndarray, float]:
    """
    Best single moves in a seeded visit order until a pass gains less than
    MIN_GAIN. strength[x] maps layer to the strength of vertex x in it.
    """
    n = len(neighbors)
    community = np.arange(n)
    next_free = n
    tot: Dict[int, Dict[int, float]] = {i: dict(strength[i]) for i in range(n)}
    total_gain = 0.0
    while True:
        pass_gain = 0.0
        for x in rng.permutation(n):
            k = strength[x]
            own = int(community[x])
            links: Dict[int, float] = {}
            for y, w in neighbors[x].items():
                c = int(community[y])
                links[c] = links.get(c, 0.0) + w
            _shift(tot[own], k, -1.0)
            stay = links.get(own, 0.0) - _null(scale, k, tot[own])
            best_c, best_value = own, stay
            for c in sorted(links):
                if c == own:
                    continue
                value = links[c] - _null(scale, k, tot.get(c))
                if value > best_value + 1e-15:
                    best_c, best_value = c, value
            if best_value < -1e-15:
                # x is better off in a community of its own
                best_c, best_value = next_free, 0.0
                next_free += 1
            if best_c != own:
                gain = 2 * (best_value - stay) / two_mu
                pass_gain += gain
                community[x] = best_c
            _shift(tot.setdefault(int(community[x]), {}), k, 1.0)
        total_gain += pass_gain
        if pass_gain < MIN_GAIN:
            break
    return community, total_gain


def _aggregate(neighbors: List[Dict[int, float]], strength: List[Dict[int, float]], community: np.ndarray):
    """Collapse each community into one vertex; links inside a community are dropped"""
    relabel = {c: i for i, c in enumerate(sorted(set(community.tolist())))}
    m = len(relabel)
    merged_neighbors: List[Dict[int, float]] = [dict() for _ in range(m)]
    merged_strength: List[Dict[int, float]] = [dict() for _ in range(m)]
    for x in range(len(neighbors)):
        a = relabel[int(community[x])]
        _shift(merged_strength[a], strength[x], 1.0)
        for y, w in neighbors[x].items():
            b = relabel[int(community[y])]
            if a != b:
                merged_neighbors[a][b] = merged_neighbors[a].get(b, 0.0) + w
    supervertex = np.array([relabel[int(c)] for c in community], dtype=np.int64)
    return merged_neighbors, merged_strength, supervertex


def detect_temporal_modules(
    multilayer: MultilayerNetwork, gamma: float = 1.0, rng_seed: int = 0
) -> Tuple[Labels, float]:
    """
    Louvain on the supra-graph.

    Each level applies node moves in a seeded random visit order until a pass
    improves the modularity by less than MIN_GAIN, then collapses communities
    into single vertices that keep their per-layer strengths. Levels repeat
    until one improves by less than MIN_GAIN. Returns the labels, renumbered
    by first appearance, and the modularity tracked during optimization.
    """
    graph = _SupraGraph(multilayer)
    n = len(graph.keys)
    if n == 0:
        return {}, 0.0
    if graph.two_mu == 0:
        return {key: i for i, key in enumerate(graph.keys)}, 0.0
    rng = np.random.default_rng(rng_seed)
    scale = {t: graph.null_scale(t, gamma) for t in range(multilayer.n_layers)}

    quality = 0.0
    for i in range(n):
        t = int(graph.layer[i])
        quality -= scale[t] * graph.strength[i] ** 2
    quality /= graph.two_mu

    neighbors = graph.neighbors
    strength = [{int(graph.layer[i]): float(graph.strength[i])} for i in range(n)]
    membership = np.arange(n)
    while True:
        community, gain = _move_phase(neighbors, strength, scale, graph.two_mu, rng)
        quality += gain
        if gain < MIN_GAIN:
            membership = community[membership]
            break
        neighbors, strength, supervertex = _aggregate(neighbors, strength, community)
        membership = supervertex[membership]

    relabel: Dict[int, int] = {}
    labels: Labels = {}
    order = sorted(range(n), key=lambda i: (graph.keys[i][1], graph.keys[i][0]))
    for i in order:
        c = int(membership[i])
        if c not in relabel:
            relabel[c] = len(relabel)
        labels[graph.keys[i]] = relabel[c]
    return labels, float(quality)


def count_changes(multilayer: MultilayerNetwork, labels: Mapping[Tuple[int, int], int]) -> List[int]:
    """Per layer, nodes present in the previous layer whose module label differs from it"""
    changes = [0]
    for t in range(1, multilayer.n_layers):
        previous = set(multilayer.layers[t - 1].ids)
        changes.append(sum(1 for node in multilayer.layers[t].ids
                           if node in previous and labels[(node, t)] != labels[(node, t - 1)]))
    return changes


def poisson_cost(total: float, length: int) -> float:
    """Negative Poisson log-likelihood of a segment at its MLE rate, up to a constant"""
    if total <= 0 or length <= 0:
        return 0.0
    return float(total - total * np.log(total / length))


def _capacity(length: int) -> int:
    return max(0, length // MIN_SEGMENT - 1)


def detect_changepoints(signal: Sequence[float], q: int = 3) -> List[int]:
    """
    Binary segmentation under a Poisson cost with minimum segment length 2.

    Each of the q rounds applies the split with the largest likelihood gain
    over all current segments (leftmost on ties) among splits that still leave
    room for the remaining rounds.

    Returns:
        Sorted indices where new segments start
    """
    y = np.asarray(signal, dtype=float)
    n = y.size
    if n < 2 * (q + 1):
        raise AnalysisError(f'signal of length {n} too short for {q} changepoints')
    if np.any(y < 0):
        raise AnalysisError('signal must be non-negative')
    prefix = np.concatenate([[0.0], np.cumsum(y)])

    def cost(a, b):
        return poisson_cost(prefix[b] - prefix[a], b - a)

    segments = [(0, n)]
    points: List[int] = []
    for round_ in range(q):
        remaining = q - round_ - 1
        capacity = sum(_capacity(b - a) for a, b in segments)
        best = None
        for idx, (a, b) in enumerate(segments):
            if b - a < 2 * MIN_SEGMENT:
                continue
            whole = cost(a, b)
            others = capacity - _capacity(b - a)
            for k in range(a + MIN_SEGMENT, b - MIN_SEGMENT + 1):
                if others + _capacity(k - a) + _capacity(b - k) < remaining:
                    continue
                gain = whole - cost(a, k) - cost(k, b)
                if best is None or gain > best[0] + 1e-12 or (abs(gain - best[0]) <= 1e-12 and k < best[1]):
                    best = (gain, k, idx)
        if best is None:
            break
        _, k, idx = best
        a, b = segments.pop(idx)
        segments[idx:idx] = [(a, k), (k, b)]
        points.append(k)
    return sorted(points)


def segmentation_cost(signal: Sequence[float], changepoints: Sequence[int]) -> float:
    y = np.asarray(signal, dtype=float)
    bounds = [0] + sorted(changepoints) + [y.size]
    return sum(poisson_cost(float(y[a:b].sum()), b - a) for a, b in zip(bounds, bounds[1:]))


def epochs_from(changes: Sequence[int], changepoints: Sequence[int]) -> List[Tuple[float, int]]:
    """(mean change, duration in layers) of each segment"""
    bounds = [0] + sorted(changepoints) + [len(changes)]
    return [(float(np.mean(changes[a:b])), b - a) for a, b in zip(bounds, bounds[1:])]


def analyse_network(network: ConceptNetwork, omega: float = 0.01, gamma: float = 1.0, q: int = 3,
                    rng_seed: int = 0) -> MembershipTrace:
    """Modules, change counts, changepoints and epochs of one growing network"""
    multilayer = build_multilayer(GrowthFiltration(network), omega)
    labels, quality = detect_temporal_modules(multilayer, gamma, rng_seed)
    changes = count_changes(multilayer, labels)
    changepoints = detect_changepoints(changes, q)
    trace = MembershipTrace(subject=network.subject, years=multilayer.years, labels=labels, changes=changes,
                            changepoints=changepoints, epochs=epochs_from(changes, changepoints), quality=quality)
    logger.info("Temporal modules detected", subject=network.subject, layers=multilayer.n_layers,
                modularity=quality, changepoints=changepoints)
    return trace


def epoch_signature(traces: Sequence[MembershipTrace]) -> List[dict]:
    """Per-subject epoch rows plus their cross-subject average"""
    if not traces:
        raise AnalysisError('no traces for the epoch signature')
    rows = []
    n_epochs = max(len(t.epochs) for t in traces)
    for trace in sorted(traces, key=lambda t: t.subject):
        for k, (mean_change, duration) in enumerate(trace.epochs):
            rows.append({'epoch': k + 1, 'mean_change': mean_change, 'duration': duration, 'subject': trace.subject})
    for k in range(n_epochs):
        values = [t.epochs[k] for t in traces if len(t.epochs) > k]
        rows.append({
            'epoch': k + 1,
            'mean_change': float(np.mean([v[0] for v in values])),
            'duration': float(np.mean([v[1] for v in values])),
            'subject': 'AVERAGE',
        })
    return rows


def signature_rank_order(epochs: Sequence[Tuple[float, float]]) -> List[int]:
    """Epoch numbers ordered by mean change, largest first"""
    return [k + 1 for k in sorted(range(len(epochs)), key=lambda k: (-epochs[k][0], k))]


def robustness_report(variants: Mapping[str, Sequence[MembershipTrace]], reference: Optional[str] = None) -> RobustnessReport:
    """Rank order of the averaged signature under each variant (coupling values, jittered years)"""
    orders = {}
    for name in sorted(variants):
        average = [(r['mean_change'], r['duration']) for r in epoch_signature(variants[name])
                   if r['subject'] == 'AVERAGE']
        orders[name] = signature_rank_order(average)
    return RobustnessReport(rank_orders=orders, reference=reference)
