import numpy as np
import pytest
from scipy import sparse

from errors import AnalysisError
from models.corpus import NobelNodeSet
from models.dynamics import InfluenceScores
from services.influence import (
    build_union,
    correlate_participation,
    horizon_sweep,
    impulse_response,
    impulse_response_sweep,
    influence_rows,
    influence_scores,
    nobel_comparison,
    normalize_adjacency,
    participation_by_title,
    spectral_radius,
)


def _random_matrix(seed, n=50, density=0.15):
    rng = np.random.default_rng(seed)
    dense = (rng.random((n, n)) < density) * rng.random((n, n))
    np.fill_diagonal(dense, 0.0)
    return dense


def _dense_gramian_diagonal(a, horizon):
    n = a.shape[0]
    gramian = np.zeros((n, n))
    power = np.eye(n)
    ones = np.ones((n, 1))
    for _ in range(horizon + 1):
        column = power @ ones
        gramian += column @ column.T
        power = a @ power
    return np.diag(gramian)


def test_spectral_radius_of_simple_matrices():
    assert spectral_radius(sparse.csr_matrix((3, 3))) == 0.0
    chain = sparse.csr_matrix(np.array([[0, 0, 0], [1.0, 0, 0], [0, 1.0, 0]]))
    assert spectral_radius(chain) == 0.0
    two_cycle = sparse.csr_matrix(np.array([[0, 1.0], [1.0, 0]]))
    assert spectral_radius(two_cycle) == pytest.approx(1.0)


@pytest.mark.parametrize('seed', range(5))
def test_spectral_radius_matches_eigenvalues(seed):
    dense = _random_matrix(seed)
    expected = max(abs(np.linalg.eigvals(dense)))
    assert spectral_radius(sparse.csr_matrix(dense)) == pytest.approx(expected, rel=1e-8)


def test_spectral_radius_takes_the_largest_component():
    dense = np.zeros((5, 5))
    dense[0, 1] = dense[1, 0] = 0.5
    dense[2, 3] = dense[3, 4] = dense[4, 2] = 2.0
    dense[2, 0] = 1.0
    assert spectral_radius(sparse.csr_matrix(dense)) == pytest.approx(2.0)


def test_spectral_radius_uses_magnitudes():
    signed = sparse.csr_matrix(np.array([[0, -1.0], [1.0, 0]]))
    assert spectral_radius(signed) == pytest.approx(1.0)


def test_normalized_matrix_is_stable():
    a_norm, lambda_max = normalize_adjacency(sparse.csr_matrix(_random_matrix(7)))
    assert lambda_max > 0
    assert max(abs(np.linalg.eigvals(a_norm.toarray()))) < 1.0


@pytest.mark.parametrize('horizon', [0, 1, 3, 5])
def test_impulse_response_matches_dense_gramian(horizon):
    a_norm, lambda_max = normalize_adjacency(sparse.csr_matrix(_random_matrix(3, n=20, density=0.3)))
    scores = impulse_response(a_norm, horizon, lambda_max=lambda_max)
    np.testing.assert_allclose(scores.scores, _dense_gramian_diagonal(a_norm.toarray(), horizon), rtol=1e-10)
    assert scores.horizon == horizon


def test_impulse_response_of_single_edge():
    a = sparse.csr_matrix(np.array([[0, 0], [0.5, 0]]))
    scores = impulse_response(a, horizon=1, titles=['source', 'target'])
    assert scores.as_dict() == {'source': 1.0, 'target': 1.25}


def test_impulse_response_grows_with_horizon():
    a_norm, _ = normalize_adjacency(sparse.csr_matrix(_random_matrix(11)))
    previous = None
    for horizon in range(6):
        current = impulse_response(a_norm, horizon).scores
        if previous is not None:
            assert np.all(current >= previous)
        previous = current


def test_impulse_response_rejects_negative_horizon():
    with pytest.raises(AnalysisError, match='non-negative'):
        impulse_response(sparse.csr_matrix((2, 2)), horizon=-1)


def test_sweep_matches_single_horizons():
    a_norm, _ = normalize_adjacency(sparse.csr_matrix(_random_matrix(5, n=15)))
    sweep = impulse_response_sweep(a_norm, [1, 3, 2])
    assert sorted(sweep) == [1, 2, 3]
    for k, values in sweep.items():
        np.testing.assert_allclose(values, impulse_response(a_norm, k).scores)


def test_union_merges_on_titles(network_factory):
    left = network_factory([(0, 1)], {0: 1900, 1: 1950}, subject='physics',
                           titles={0: 'Radiation', 1: 'Atom'}, weight=0.4)
    right = network_factory([(0, 1), (1, 0)], {0: 1890, 1: 1960}, subject='biology',
                            titles={0: 'Radiation', 1: 'Cell'}, weight=0.7)
    again = network_factory([(0, 1)], {0: 1900, 1: 1950}, subject='chemistry',
                            titles={0: 'Radiation', 1: 'Atom'}, weight=0.9)

    union = build_union([left, right, again])
    network = union.network

    assert [n.title for n in network.nodes] == ['Atom', 'Cell', 'Radiation']
    assert network.node_by_title['Radiation'].year == 1890
    assert union.provenance['Radiation'] == ['biology', 'chemistry', 'physics']
    assert union.provenance['Cell'] == ['biology']
    weights = {(network.node_by_id[e.source].title, network.node_by_id[e.target].title): e.weight
               for e in network.edges}
    assert weights == {('Radiation', 'Atom'): 0.9, ('Radiation', 'Cell'): 0.7, ('Cell', 'Radiation'): 0.7}


def test_union_needs_networks():
    with pytest.raises(AnalysisError):
        build_union([])


def test_influence_scores_on_acyclic_union(two_cliques):
    union = build_union([two_cliques])
    scores, a_norm = influence_scores(union, horizon=5)
    assert len(scores.titles) == 8
    assert scores.lambda_max == 0.0
    assert np.all(scores.scores >= 1.0)
    assert a_norm.shape == (8, 8)


def _participation():
    return participation_by_title([
        {'title': 'A', 'birth_count': 3, 'death_count': 0},
        {'title': 'A', 'birth_count': 1, 'death_count': 2},
        {'title': 'B', 'birth_count': 0, 'death_count': 1},
        {'title': 'C', 'birth_count': 1, 'death_count': 0},
        {'title': 'D', 'birth_count': 2, 'death_count': 5},
    ])


def test_participation_sums_across_subjects():
    participation = _participation()
    assert participation.of('A') == (4, 2)
    assert participation.of('missing') == (0, 0)


def test_correlation_with_constant_participation_is_undefined():
    scores = InfluenceScores(titles=['A', 'B', 'C', 'D'], scores=np.array([4.0, 1.0, 2.0, 3.0]), horizon=5,
                             lambda_max=0.0)
    flat = participation_by_title([{'title': t, 'birth_count': 1, 'death_count': 0} for t in 'ABCD'])
    result = correlate_participation(scores, flat)
    assert result['birth'] is None
    assert result['death'] is None

    result = correlate_participation(scores, _participation())
    assert result['birth']['statistic'] == pytest.approx(np.corrcoef([4, 1, 2, 3], [4, 0, 1, 2])[0, 1])


def test_horizon_sweep_rows(two_cliques):
    union = build_union([two_cliques])
    _, a_norm = influence_scores(union)
    rows = participation_by_title(
        {'title': n.title, 'birth_count': n.id % 3, 'death_count': n.id % 2} for n in two_cliques.nodes
    )
    sweep = horizon_sweep(union, rows, a_norm, lambda_max=1.0, max_horizon=3)
    assert [r['horizon'] for r in sweep] == [1, 2, 3]
    assert set(sweep[0]) == {'horizon', 'birth', 'death'}


def test_nobel_comparison():
    report = nobel_comparison(_participation(), NobelNodeSet(frozenset({'A', 'D', 'Zeta'})), ['A', 'B', 'C', 'D'])

    assert report['nobel_nodes'] == 2
    assert report['other_nodes'] == 2
    assert report['unmatched'] == ['Zeta']
    assert report['birth']['test']['statistic'] == 1.0
    assert report['birth']['curve']['points'] == [0.0, 1.0, 2.0, 4.0]
    assert report['birth']['curve']['difference'] == [-0.5, -1.0, -0.5, 0.0]


def test_nobel_comparison_edge_cases():
    with pytest.raises(AnalysisError, match='no Nobel titles'):
        nobel_comparison(_participation(), NobelNodeSet(frozenset({'Zeta'})), ['A', 'B'])
    with pytest.raises(AnalysisError, match='empty complement'):
        nobel_comparison(_participation(), NobelNodeSet(frozenset({'A', 'B'})), ['A', 'B'])


def test_influence_rows():
    scores = InfluenceScores(titles=['A', 'B'], scores=np.array([2.5, 1.0]), horizon=5, lambda_max=0.0)
    rows = influence_rows(scores, _participation(), NobelNodeSet(frozenset({'B'})))
    assert rows == [
        {'title': 'A', 'score': 2.5, 'birth_count': 4, 'death_count': 2, 'is_nobel': False},
        {'title': 'B', 'score': 1.0, 'birth_count': 0, 'death_count': 1, 'is_nobel': True},
    ]


@pytest.mark.parametrize('seed', range(20))
def test_impulse_response_on_fifty_node_networks(seed):
    dense = _random_matrix(100 + seed, n=50, density=0.08)
    dense[:, 0] = 0.0
    dense[0, :] = 0.0
    a_norm, lambda_max = normalize_adjacency(sparse.csr_matrix(dense))
    scores = impulse_response(a_norm, 5, lambda_max=lambda_max).scores
    np.testing.assert_allclose(scores, _dense_gramian_diagonal(a_norm.toarray(), 5), rtol=0, atol=1e-9)
    assert scores[0] == 1.0
