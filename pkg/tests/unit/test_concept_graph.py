import math

import pytest

from errors import CorpusError, SchemaError
from models.corpus import Corpus, ParsedArticle, SubjectIndex
from models.network import ConceptEdge, ConceptNetwork, ConceptNode, GrowthFiltration
from services.concept_graph import (
    build_network,
    build_subject_networks,
    compute_tfidf,
    cosine_similarity,
    snapshot_at,
    tokenize,
)
from services.corpus_ingest import load_corpus


def test_tokenize_lowercases_and_drops_short_tokens():
    assert tokenize("DNA's double-helix, a 2nd look at X_ray") == ['dna', 'double', 'helix', '2nd', 'look', 'at', 'ray']


def test_tokenize_keeps_unicode_letters():
    assert tokenize('Röntgen über Ängström') == ['röntgen', 'über', 'ängström']


def test_tfidf_drops_terms_in_every_document():
    vocab, vectors = compute_tfidf([['a', 'b'], ['a', 'c']])
    assert vocab == ['a', 'b', 'c']
    assert vectors == [{1: pytest.approx(1.0)}, {2: pytest.approx(1.0)}]


def test_tfidf_weights_are_count_times_log2_idf_then_unit_norm():
    vocab, vectors = compute_tfidf([['x', 'x', 'y'], ['y', 'z'], ['z']])
    x = 2 * math.log2(3)
    y = math.log2(3 / 2)
    norm = math.hypot(x, y)
    assert vocab == ['x', 'y', 'z']
    assert vectors[0][0] == pytest.approx(x / norm)
    assert vectors[0][1] == pytest.approx(y / norm)
    assert sum(w * w for w in vectors[1].values()) == pytest.approx(1.0)


def test_tfidf_empty_inputs():
    assert compute_tfidf([]) == ([], [])
    assert compute_tfidf([[], []]) == ([], [{}, {}])


def test_cosine_similarity_bounds():
    assert cosine_similarity({0: 1.0}, {0: 2.0}) == pytest.approx(1.0)
    assert cosine_similarity({0: 1.0}, {1: 1.0}) == 0.0
    assert cosine_similarity({}, {0: 1.0}) == 0.0
    assert cosine_similarity({0: 3.0, 1: 4.0}, {0: 1.0}) == pytest.approx(0.6)


def _articles():
    return {
        'Alpha': ParsedArticle('Alpha', lead_text='alpha energy matter', lead_links=['Beta', 'Outside'],
                               parsed_years=[1900, 1920]),
        'Beta': ParsedArticle('Beta', lead_text='beta energy', lead_links=['Beta']),
        'Gamma': ParsedArticle('Gamma', lead_text='gamma matter', lead_links=['Alpha']),
    }


def test_build_network_points_edges_from_link_to_linking_article():
    articles = _articles()
    subject = SubjectIndex('toy', frozenset(articles))
    tfidf = {'Alpha': {0: 1.0}, 'Beta': {0: 1.0}, 'Gamma': {1: 1.0}}

    network = build_network(subject, articles, tfidf, default_year=2020)

    ids = {n.title: n.id for n in network.nodes}
    assert ids == {'Alpha': 0, 'Beta': 1, 'Gamma': 2}
    pairs = {(e.source, e.target): e.weight for e in network.edges}
    assert pairs == {(1, 0): pytest.approx(1.0), (0, 2): 0.0}


def test_build_network_assigns_years_with_provenance():
    articles = _articles()
    network = build_network(SubjectIndex('toy', frozenset(articles)), articles, {}, default_year=2020)
    by_title = network.node_by_title
    assert (by_title['Alpha'].year, by_title['Alpha'].provenance) == (1900, 'parsed')
    assert (by_title['Gamma'].year, by_title['Gamma'].provenance) == (1901, 'imputed')
    assert (by_title['Beta'].year, by_title['Beta'].provenance) == (2020, 'default')


def test_build_network_without_members_fails():
    with pytest.raises(CorpusError):
        build_network(SubjectIndex('empty', frozenset({'Nowhere'})), _articles(), {})


def test_build_subject_networks_from_mini_corpus(mini_corpus_path):
    corpus = load_corpus(mini_corpus_path, dump_year=2019)
    networks = build_subject_networks(corpus, default_year=2019)

    assert sorted(networks) == sorted(corpus.subjects)
    for name, network in networks.items():
        assert network.n_nodes == len(corpus.subject_articles(name))
        assert all(0.0 <= e.weight <= 1.0 for e in network.edges)
        assert network.vocab == networks['biophysics'].vocab
    shared = networks['biophysics'].node_by_title['Radiation']
    assert shared.tfidf == networks['evolutionary biology'].node_by_title['Radiation'].tfidf


def test_build_subject_networks_rejects_unknown_subject():
    corpus = Corpus(articles=_articles(), subjects={'toy': SubjectIndex('toy', frozenset({'Alpha'}))})
    with pytest.raises(CorpusError, match='unknown subject'):
        build_subject_networks(corpus, subjects=['chemistry'])


def test_network_rejects_self_loops_and_duplicates():
    nodes = [ConceptNode(0, 'A', 1), ConceptNode(1, 'B', 2)]
    with pytest.raises(SchemaError, match='self-loop'):
        ConceptNetwork('s', nodes, [ConceptEdge(0, 0, 0.5)])
    with pytest.raises(SchemaError, match='duplicate edge'):
        ConceptNetwork('s', nodes, [ConceptEdge(0, 1, 0.5), ConceptEdge(0, 1, 0.2)])
    with pytest.raises(SchemaError, match='edges.0.weight'):
        ConceptNetwork('s', nodes, [ConceptEdge(0, 1, 1.5)])


def test_adjacency_is_target_by_source(network_factory):
    network = network_factory([(0, 1)], {0: 1, 1: 2}, weight=0.25)
    a = network.adjacency().toarray()
    assert a[1, 0] == 0.25
    assert a[0, 1] == 0.0


def test_snapshots_are_nested(network_factory):
    network = network_factory([(0, 1), (1, 2), (0, 2)], {0: 1990, 1: 1995, 2: 2000})
    filtration = GrowthFiltration(network)

    assert filtration.years == [1990, 1995, 2000]
    early = snapshot_at(filtration, 1995)
    assert early.ids == [0, 1]
    assert early.n_edges == 1
    assert snapshot_at(filtration, 1989).n_nodes == 0
    assert filtration.edge_arrival(network.edges[1]) == 2000

    previous = set()
    for _, snapshot in filtration.snapshots():
        current = {(e.source, e.target) for e in snapshot.edges} | {('n', i) for i in snapshot.ids}
        assert previous <= current
        previous = current
