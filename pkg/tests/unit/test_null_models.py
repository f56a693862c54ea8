from collections import Counter

import numpy as np
import pytest

from services.null_models import degree_summary, edge_rewire, jitter_years
from services.pipeline import int_seed_for


def _random_network(network_factory, n=12, p=0.3, seed=0):
    rng = np.random.default_rng(seed)
    edges = [(u, v) for u in range(n) for v in range(n) if u != v and rng.random() < p]
    weights = {pair: float(rng.random()) for pair in edges}
    return network_factory(edges, {i: 1900 + i for i in range(n)}, weight=weights)


def test_rewiring_keeps_sources_and_weights(network_factory):
    network = _random_network(network_factory)
    original_out = Counter(e.source for e in network.edges)
    original_weights = sorted((e.source, e.weight) for e in network.edges)

    for k in range(1000):
        rewired = edge_rewire(network, int_seed_for(7, 'rewire', str(k)))
        assert Counter(e.source for e in rewired.edges) == original_out
        assert sorted((e.source, e.weight) for e in rewired.edges) == original_weights
        assert all(e.source != e.target for e in rewired.edges)
        assert len({(e.source, e.target) for e in rewired.edges}) == rewired.n_edges
        assert rewired.nodes == network.nodes


def test_rewiring_is_seeded(two_cliques):
    first = edge_rewire(two_cliques, 99)
    again = edge_rewire(two_cliques, 99)
    assert first.edges == again.edges
    assert first.null == {'kind': 'rewired', 'seed': 99, 'original_subject': 'cliques'}


def test_rewiring_complete_graph_keeps_targets(network_factory):
    edges = [(u, v) for u in range(3) for v in range(3) if u != v]
    network = network_factory(edges, {0: 1, 1: 1, 2: 1})
    rewired = edge_rewire(network, 1)
    assert {(e.source, e.target) for e in rewired.edges} == set(edges)


def test_jitter_moves_years_by_at_most_one(two_cliques):
    jittered = jitter_years(two_cliques, 4)
    shifts = [j.year - n.year for j, n in zip(jittered.nodes, two_cliques.nodes)]
    assert set(shifts) <= {-1, 0, 1}
    assert jittered.edges == two_cliques.edges
    assert jittered.null['kind'] == 'jittered'


def test_jitter_uses_all_three_shifts(network_factory):
    network = network_factory([], {i: 2000 for i in range(300)})
    shifts = Counter(n.year - 2000 for n in jitter_years(network, 12).nodes)
    assert set(shifts) == {-1, 0, 1}
    assert min(shifts.values()) > 60


def test_degree_summary(network_factory):
    network = network_factory([(0, 1), (0, 2), (1, 2)], {0: 1, 1: 1, 2: 1})
    summary = degree_summary(network, edge_rewire(network, 3))
    assert summary['real_mean_out'] == summary['null_mean_out'] == 1.0
    assert summary['real_mean_in'] == 1.0
    assert summary['real_max_in'] == 2


def test_rewiring_seeds_give_different_networks(network_factory):
    network = _random_network(network_factory, n=20, p=0.2)

    edge_sets = {frozenset((e.source, e.target) for e in edge_rewire(network, seed).edges) for seed in range(20)}

    assert len(edge_sets) == 20


def test_jitter_mean_absolute_shift(network_factory):
    network = network_factory([], {i: 1950 for i in range(3000)})

    shifts = np.array([n.year - 1950 for n in jitter_years(network, 21).nodes])

    assert np.abs(shifts).mean() == pytest.approx(2 / 3, abs=0.03)
    assert shifts.mean() == pytest.approx(0.0, abs=0.05)
