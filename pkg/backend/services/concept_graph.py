"""
Concept Graph Service
Tokenization, tf-idf weighting and construction of the concept networks
"""

import re
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import structlog
from sklearn.feature_extraction.text import CountVectorizer
from sklearn.preprocessing import normalize

from errors import CorpusError
from models.corpus import Corpus, ParsedArticle, SubjectIndex
from models.network import ConceptEdge, ConceptNetwork, ConceptNode, GrowthFiltration
from models.schemas import deserialize_network, serialize_network
from services.corpus_ingest import assign_birth_years

logger = structlog.get_logger()

TOKEN_PATTERN = re.compile(r'[^\W_]{2,}')

__all__ = [
    'tokenize', 'compute_tfidf', 'cosine_similarity', 'build_network', 'build_subject_networks',
    'snapshot_at', 'serialize_network', 'deserialize_network',
]


def tokenize(text: str) -> List[str]:
    """Lowercased Unicode alphanumeric runs of length >= 2"""
    return TOKEN_PATTERN.findall((text or '').lower())


def _identity(tokens):
    return tokens


def compute_tfidf(documents: Sequence[Sequence[str]]) -> Tuple[List[str], List[Dict[int, float]]]:
    """
    Unit-norm tf-idf vectors with weight = count * log2(D / df).

    Args:
        documents: token lists, one per document

    Returns:
        (vocabulary in token-id order, sparse vector per document)
    """
    n_docs = len(documents)
    if n_docs == 0:
        return [], []
    vectorizer = CountVectorizer(analyzer=_identity, lowercase=False)
    try:
        counts = vectorizer.fit_transform([list(doc) for doc in documents]).tocsr()
    except ValueError:
        # every document is empty
        return [], [{} for _ in documents]
    vocab = list(vectorizer.get_feature_names_out())
    df = np.asarray((counts > 0).sum(axis=0)).ravel()
    idf = np.log2(n_docs / df)
    weights = counts.multiply(idf.reshape(1, -1)).tocsr()
    weights.eliminate_zeros()
    weights = normalize(weights, norm='l2', axis=1).tocsr()

    vectors = []
    for row in range(n_docs):
        start, end = weights.indptr[row], weights.indptr[row + 1]
        vectors.append({int(k): float(v) for k, v in zip(weights.indices[start:end], weights.data[start:end])})
    return vocab, vectors


def cosine_similarity(u: Mapping[int, float], v: Mapping[int, float]) -> float:
    if not u or not v:
        return 0.0
    if len(u) > len(v):
        u, v = v, u
    dot = sum(w * v[k] for k, w in u.items() if k in v)
    nu = np.sqrt(sum(w * w for w in u.values()))
    nv = np.sqrt(sum(w * w for w in v.values()))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(min(1.0, max(0.0, dot / (nu * nv))))


def build_network(
    subject: SubjectIndex,
    articles: Mapping[str, ParsedArticle],
    tfidf: Mapping[str, Dict[int, float]],
    vocab: Sequence[str] = (),
    default_year: Optional[int] = None,
) -> ConceptNetwork:
    """
    Concept network of one subject.

    Every lead link from member A to member L becomes the edge L -> A,
    weighted by the cosine similarity of their tf-idf vectors. Node ids follow
    title order.
    """
    members = sorted(t for t in subject.member_titles if t in articles)
    if not members:
        raise CorpusError(f'no resolvable members for subject {subject.subject}')
    unresolved = len(subject.member_titles) - len(members)
    if unresolved:
        logger.warning("Subject members missing from corpus", subject=subject.subject, missing=unresolved)

    ids = {title: i for i, title in enumerate(members)}
    link_pairs = []
    for title in members:
        for link in articles[title].lead_links:
            if link in ids and link != title:
                link_pairs.append((link, title))
    link_pairs = sorted(set(link_pairs))

    years = assign_birth_years({t: articles[t].parsed_years for t in members}, link_pairs, default_year=default_year)
    nodes = [
        ConceptNode(id=ids[t], title=t, year=years[t][0], provenance=years[t][1], tfidf=dict(tfidf.get(t, {})))
        for t in members
    ]
    edges = [
        ConceptEdge(source=ids[s], target=ids[t], weight=cosine_similarity(tfidf.get(s, {}), tfidf.get(t, {})))
        for s, t in link_pairs
    ]
    network = ConceptNetwork(subject=subject.subject, nodes=nodes, edges=edges, vocab=list(vocab))
    logger.info("Network built", subject=subject.subject, nodes=network.n_nodes, edges=network.n_edges)
    return network


def corpus_tfidf(corpus: Corpus) -> Tuple[List[str], Dict[str, Dict[int, float]]]:
    """tf-idf over the lead text of every article in the run's corpus"""
    titles = sorted(corpus.articles)
    vocab, vectors = compute_tfidf([tokenize(corpus.articles[t].lead_text) for t in titles])
    return vocab, dict(zip(titles, vectors))


def build_subject_networks(
    corpus: Corpus, subjects: Sequence[str] = (), default_year: Optional[int] = None
) -> Dict[str, ConceptNetwork]:
    names = list(subjects) or sorted(corpus.subjects)
    unknown = [s for s in names if s not in corpus.subjects]
    if unknown:
        raise CorpusError(f'unknown subject: {unknown[0]}')
    vocab, vectors = corpus_tfidf(corpus)
    return {
        name: build_network(corpus.subjects[name], corpus.articles, vectors, vocab, default_year=default_year)
        for name in sorted(names)
    }


def snapshot_at(filtration: GrowthFiltration, year: int) -> ConceptNetwork:
    return filtration.snapshot_at(year)
