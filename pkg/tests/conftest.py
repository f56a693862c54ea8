"""
Shared fixtures: small concept networks and an in-memory multistream dump
"""

import bz2
import os
from pathlib import Path

import pytest

os.environ.setdefault('KNOWLEDGE_GROWTH_ENV', 'testing')

from models.network import ConceptEdge, ConceptNetwork, ConceptNode  # noqa: E402

REPO_ROOT = Path(__file__).resolve().parents[1]
FIXTURES = Path(__file__).resolve().parent / 'fixtures'
MINI_CORPUS = REPO_ROOT / 'knowledge_base' / 'mini_corpus.json'


def build_network(edges, years, subject='toy', weight=1.0, titles=None):
    """Network from (source, target) pairs; years maps node id -> birth year"""
    nodes = [
        ConceptNode(id=i, title=(titles or {}).get(i, f'N{i}'), year=int(y))
        for i, y in sorted(years.items())
    ]

    def weight_of(s, t):
        return weight.get((s, t), 1.0) if isinstance(weight, dict) else weight

    return ConceptNetwork(
        subject=subject,
        nodes=nodes,
        edges=[ConceptEdge(source=s, target=t, weight=weight_of(s, t)) for s, t in edges],
    )


@pytest.fixture
def network_factory():
    return build_network


@pytest.fixture
def cycle_with_cone():
    """4-cycle born in years 1..4 and a cone vertex in year 5 joined to every cycle vertex"""
    edges = [(0, 1), (1, 2), (2, 3), (3, 0), (4, 0), (4, 1), (4, 2), (4, 3)]
    return build_network(edges, {0: 1, 1: 2, 2: 3, 3: 4, 4: 5}, subject='cone')


@pytest.fixture
def octahedron():
    """Octahedron graph: every vertex joined to all but its antipode; all born in year 1"""
    antipode = {0: 1, 1: 0, 2: 3, 3: 2, 4: 5, 5: 4}
    edges = [(u, v) for u in range(6) for v in range(u + 1, 6) if antipode[u] != v]
    return build_network(edges, {i: 1 for i in range(6)}, subject='octahedron')


@pytest.fixture
def two_cliques():
    """Two 4-cliques joined by a single bridge, born across eight years"""
    edges = [(u, v) for u in range(4) for v in range(u + 1, 4)]
    edges += [(u, v) for u in range(4, 8) for v in range(u + 1, 8)]
    edges += [(3, 4)]
    years = {i: 1900 + i for i in range(8)}
    return build_network(edges, years, subject='cliques')


@pytest.fixture
def mini_corpus_path():
    return MINI_CORPUS


@pytest.fixture
def origin_wikitext():
    return (FIXTURES / 'origin_of_species.wikitext').read_text(encoding='utf-8')


def _page_xml(title, text=None, redirect=None):
    redirect_tag = f'<redirect title="{redirect}" />' if redirect else ''
    body = text if text is not None else f'#REDIRECT [[{redirect}]]'
    body = body.replace('&', '&amp;').replace('<', '&lt;').replace('>', '&gt;')
    return (
        f'<page><title>{title}</title><ns>0</ns><id>1</id>{redirect_tag}'
        f'<revision><id>1</id><text xml:space="preserve">{body}</text></revision></page>'
    )


def write_multistream(tmp_path, streams):
    """
    Write a multistream dump and its index.

    Args:
        streams: list of streams, each a list of (title, wikitext, redirect_target)

    Returns:
        (dump path, index path)
    """
    dump = tmp_path / 'dump.xml.bz2'
    index = tmp_path / 'index.txt.bz2'
    offset = 0
    chunks, lines = [], []
    page_id = 1
    for stream in streams:
        xml = ''.join(_page_xml(title, text, redirect) for title, text, redirect in stream)
        data = bz2.compress(xml.encode('utf-8'))
        for title, _, _ in stream:
            lines.append(f'{offset}:{page_id}:{title}')
            page_id += 1
        chunks.append(data)
        offset += len(data)
    dump.write_bytes(b''.join(chunks))
    index.write_bytes(bz2.compress(('\n'.join(lines) + '\n').encode('utf-8')))
    return dump, index


@pytest.fixture
def multistream_factory(tmp_path):
    def make(streams):
        return write_multistream(tmp_path, streams)
    return make
