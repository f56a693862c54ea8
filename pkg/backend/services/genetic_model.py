"""
Genetic Model Service
Preference-free growth simulator: seeds copy a parent's tf-idf vector, mutate
every year and detach as new concepts once they drift below a threshold
"""

from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np
import structlog
from scipy.stats import truncnorm
from sklearn.feature_extraction.text import ENGLISH_STOP_WORDS

from errors import AnalysisError
from models.analysis import TestResult
from models.dynamics import MutationParams, Seed, SimTrace
from models.network import ConceptEdge, ConceptNetwork, ConceptNode
from services.concept_graph import cosine_similarity
from services.stats import ks_two_sample, linear_regression

logger = structlog.get_logger()

TITLE_WORDS = 10
MATCH_WORDS = 6
POOL_PAIRS = 10 ** 5


def sum_abs_diff(u: Dict[int, float], v: Dict[int, float]) -> float:
    return float(sum(abs(u.get(k, 0.0) - v.get(k, 0.0)) for k in set(u) | set(v)))


def support_difference(u: Dict[int, float], v: Dict[int, float]) -> int:
    """Number of words present in exactly one of the two vectors"""
    return len(set(u) ^ set(v))


def calibrate_rates(
    year_diffs: Sequence[float], sum_abs_diffs: Sequence[float], man_dists: Sequence[float], avg_abs_diff: float
) -> Tuple[float, float, Dict[str, dict]]:
    """
    Point-mutation rate from the slope of value drift over time, insertion rate
    as half the slope of word-set drift over time.
    """
    if len(set(year_diffs)) < 2:
        raise AnalysisError('regression undefined: fewer than 2 distinct year differences')
    value_fit = linear_regression(year_diffs, sum_abs_diffs)
    word_fit = linear_regression(year_diffs, man_dists)
    p = value_fit.slope / avg_abs_diff if avg_abs_diff > 0 else 0.0
    i = word_fit.slope / 2.0
    return p, i, {'sum_abs_diff': value_fit.to_dict(), 'man_dist': word_fit.to_dict()}


def estimate_params(network: ConceptNetwork, rng: np.random.Generator, pool_pairs: int = POOL_PAIRS) -> MutationParams:
    """Calibrate mutation rates and the detachment-threshold normal from a real network"""
    if not network.edges:
        raise AnalysisError('regression undefined: network has no edges')
    pool = sorted(v for n in network.nodes for v in n.tfidf.values() if v > 0)
    if not pool:
        raise AnalysisError('network has no tf-idf values to calibrate from')
    pool_arr = np.asarray(pool)
    a = pool_arr[rng.integers(len(pool_arr), size=pool_pairs)]
    b = pool_arr[rng.integers(len(pool_arr), size=pool_pairs)]
    avg_abs_diff = float(np.mean(np.abs(a - b)))

    year_diffs, value_diffs, word_diffs = [], [], []
    for e in network.edges:
        u, v = network.node_by_id[e.source], network.node_by_id[e.target]
        year_diffs.append(abs(u.year - v.year))
        value_diffs.append(sum_abs_diff(u.tfidf, v.tfidf))
        word_diffs.append(support_difference(u.tfidf, v.tfidf))
    p, i, diagnostics = calibrate_rates(year_diffs, value_diffs, word_diffs, avg_abs_diff)
    similarities = np.array([e.weight for e in network.edges])
    diagnostics.update(avg_abs_diff=avg_abs_diff, edges=len(network.edges), raw_p=p, raw_i=i)
    params = MutationParams(p=p, i=i, sim_mean=float(similarities.mean()), sim_sd=float(similarities.std(ddof=0)),
                            tfidf_value_pool=tuple(pool), diagnostics=diagnostics)
    logger.info("Mutation parameters estimated", subject=network.subject, p=params.p, i=params.i,
                sim_mean=params.sim_mean, sim_sd=params.sim_sd)
    return params


def draw_threshold(params: MutationParams, rng: np.random.Generator) -> float:
    """Normal(sim_mean, sim_sd) truncated to the open interval (0, 1)"""
    if params.sim_sd <= 0:
        return float(min(1 - 1e-9, max(1e-9, params.sim_mean)))
    a = (0.0 - params.sim_mean) / params.sim_sd
    b = (1.0 - params.sim_mean) / params.sim_sd
    value = float(truncnorm.rvs(a, b, loc=params.sim_mean, scale=params.sim_sd, random_state=rng))
    return min(1 - 1e-9, max(1e-9, value))


def _pool_draw(params: MutationParams, rng: np.random.Generator) -> float:
    return params.tfidf_value_pool[int(rng.integers(len(params.tfidf_value_pool)))]


def mutate_seed(seed: Seed, params: MutationParams, rng: np.random.Generator, vocab_size: int) -> Dict[str, bool]:
    """
    One year of mutation, in place: point, then insertion, then deletion.
    A deletion never removes the last word of a vector.

    Returns which of the three happened.
    """
    happened = {'point': False, 'insert': False, 'delete': False}
    has_pool = bool(params.tfidf_value_pool)

    if rng.random() < params.p and seed.vector and has_pool:
        keys = sorted(seed.vector)
        seed.vector[keys[int(rng.integers(len(keys)))]] = _pool_draw(params, rng)
        happened['point'] = True

    if rng.random() < params.i and has_pool and len(seed.vector) < vocab_size:
        for _ in range(1000):
            k = int(rng.integers(vocab_size))
            if k not in seed.vector:
                seed.vector[k] = _pool_draw(params, rng)
                happened['insert'] = True
                break

    if rng.random() < params.d and len(seed.vector) > 1:
        keys = sorted(seed.vector)
        del seed.vector[keys[int(rng.integers(len(keys)))]]
        happened['delete'] = True
    return happened


def title_words(vector: Dict[int, float], vocab: Sequence[str], k: int = TITLE_WORDS) -> FrozenSet[str]:
    """The k strongest non-stopword tokens of a vector"""
    ranked = sorted(((-w, vocab[t]) for t, w in vector.items() if vocab[t] not in ENGLISH_STOP_WORDS))
    return frozenset(word for _, word in ranked[:k])


def _has_weight(vector: Dict[int, float]) -> bool:
    return any(v > 0 for v in vector.values())


def _unit(vector: Dict[int, float]) -> Dict[int, float]:
    norm = float(np.sqrt(sum(v * v for v in vector.values())))
    if norm == 0:
        return {}
    return {k: v / norm for k, v in sorted(vector.items())}


class GrowthState:
    """Nodes, edges and live seeds of one simulation"""

    def __init__(self, network: ConceptNetwork, start_year: int):
        self.vocab = list(network.vocab)
        initial = [n for n in network.nodes if n.year < start_year]
        if not initial:
            raise AnalysisError(f'no nodes born before {start_year}; choose a later start year')
        keep = {n.id for n in initial}
        self.nodes: Dict[int, ConceptNode] = {n.id: n for n in initial}
        self.words: Dict[int, FrozenSet[str]] = {n.id: title_words(n.tfidf, self.vocab) for n in initial}
        self.edges: List[ConceptEdge] = [e for e in network.edges if e.source in keep and e.target in keep]
        self.seeds: Dict[int, Seed] = {}
        self.next_id = max(n.id for n in network.nodes) + 1
        self.events: List[dict] = []
        self.unconnected = 0

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def add_node(self, year: int, seed: Seed, similarity: float) -> int:
        node_id = self.next_id
        self.next_id += 1
        vector = _unit(seed.vector)
        words = title_words(vector, self.vocab)
        targets = sorted(n for n, w in self.words.items() if len(words & w) >= MATCH_WORDS)
        for target in targets:
            weight = cosine_similarity(vector, self.nodes[target].tfidf)
            self.edges.append(ConceptEdge(source=node_id, target=target, weight=weight))
        if not targets:
            self.unconnected += 1
        self.nodes[node_id] = ConceptNode(id=node_id, title=f'sim:{node_id}', year=year,
                                          provenance='simulated', tfidf=vector)
        self.words[node_id] = words
        self.events.append({
            'kind': 'birth', 'year': year, 'node': node_id, 'parent': seed.parent,
            'similarity': similarity, 'threshold': seed.threshold, 'connections': targets,
            'words': sorted(words),
        })
        return node_id


def step_year(state: GrowthState, params: MutationParams, rng: np.random.Generator, year: int,
              max_nodes: Optional[int] = None) -> GrowthState:
    """
    Spawn seeds for seedless nodes, mutate every seed once and detach drifted
    seeds as new nodes. Nodes without tf-idf weight never carry a seed, and a
    seed whose vector has lost all weight is retired instead of detaching.
    """
    for node_id in sorted(state.nodes):
        if node_id not in state.seeds and _has_weight(state.nodes[node_id].tfidf):
            state.seeds[node_id] = Seed(parent=node_id, vector=dict(state.nodes[node_id].tfidf),
                                        threshold=draw_threshold(params, rng))

    tally = {'point': 0, 'insert': 0, 'delete': 0}
    births = 0
    for parent in sorted(state.seeds):
        if max_nodes is not None and state.n_nodes >= max_nodes:
            break
        seed = state.seeds[parent]
        for kind, hit in mutate_seed(seed, params, rng, len(state.vocab)).items():
            tally[kind] += int(hit)
        if not _has_weight(seed.vector):
            del state.seeds[parent]
            continue
        similarity = cosine_similarity(seed.vector, state.nodes[parent].tfidf)
        if similarity < seed.threshold:
            del state.seeds[parent]
            state.add_node(year, seed, similarity)
            births += 1
    state.events.append({'kind': 'mutations', 'year': year, **tally, 'births': births})
    return state


def run_simulation(real: ConceptNetwork, params: MutationParams, rng_seed: int, start_year: int,
                   year_cap: int = 2200) -> SimTrace:
    """
    Grow from the real nodes born before start_year until the real node count
    or the year cap is reached.
    """
    rng = np.random.default_rng(rng_seed)
    state = GrowthState(real, start_year)
    target = real.n_nodes
    counts: Dict[int, int] = {start_year - 1: state.n_nodes}
    year = start_year
    while state.n_nodes < target and year <= year_cap:
        step_year(state, params, rng, year, max_nodes=target)
        counts[year] = state.n_nodes
        year += 1
    if state.unconnected:
        logger.warning("Simulated nodes without title matches kept as isolated", subject=real.subject,
                       count=state.unconnected)
    network = ConceptNetwork(
        subject=real.subject,
        nodes=list(state.nodes.values()),
        edges=state.edges,
        vocab=real.vocab,
        null={'kind': 'simulated', 'seed': int(rng_seed), 'original_subject': real.subject},
    )
    logger.info("Simulation finished", subject=real.subject, start_year=start_year, end_year=year - 1,
                nodes=network.n_nodes, target=target)
    return SimTrace(network=network, counts=counts, events=state.events, start_year=start_year, end_year=year - 1)


def _degrees(network: ConceptNetwork) -> List[int]:
    skeleton = network.skeleton()
    return [skeleton.degree(n) for n in network.ids]


def compare_degree_distributions(real: ConceptNetwork, simulated: ConceptNetwork) -> TestResult:
    return ks_two_sample(_degrees(real), _degrees(simulated))
