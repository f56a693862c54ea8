"""
Null Models Service
Edge-rewired networks that keep each edge's hyperlinked endpoint, and year-jittered variants
"""

from typing import Dict

import numpy as np
import structlog

from models.network import ConceptEdge, ConceptNetwork

logger = structlog.get_logger()

MAX_TRIES = 100


def edge_rewire(network: ConceptNetwork, rng_seed: int) -> ConceptNetwork:
    """
    Retarget every edge once, keeping its source and weight.

    Edges are visited in (source, target) order. A new target is drawn
    uniformly from all nodes; self-loops and duplicates are redrawn up to
    MAX_TRIES times before the original target is kept.
    """
    rng = np.random.default_rng(rng_seed)
    ids = network.ids
    present = {(e.source, e.target) for e in network.edges}
    rewired = []
    kept = 0
    for edge in sorted(network.edges, key=lambda e: (e.source, e.target)):
        present.discard((edge.source, edge.target))
        target = edge.target
        if len(ids) >= 2:
            for _ in range(MAX_TRIES):
                candidate = ids[int(rng.integers(len(ids)))]
                if candidate != edge.source and (edge.source, candidate) not in present:
                    target = candidate
                    break
            else:
                kept += 1
        present.add((edge.source, target))
        rewired.append(ConceptEdge(source=edge.source, target=target, weight=edge.weight))
    if kept:
        logger.debug("Rewiring kept original targets", subject=network.subject, kept=kept)
    return ConceptNetwork(
        subject=network.subject,
        nodes=list(network.nodes),
        edges=rewired,
        vocab=network.vocab,
        null={'kind': 'rewired', 'seed': int(rng_seed), 'original_subject': network.subject},
    )


def jitter_years(network: ConceptNetwork, rng_seed: int) -> ConceptNetwork:
    """Shift every birth year by -1, 0 or +1 with equal probability"""
    rng = np.random.default_rng(rng_seed)
    shifts = rng.integers(-1, 2, size=network.n_nodes)
    years = {node.id: node.year + int(s) for node, s in zip(network.nodes, shifts)}
    return network.with_years(
        years, null={'kind': 'jittered', 'seed': int(rng_seed), 'original_subject': network.subject}
    )


def degree_summary(original: ConceptNetwork, null: ConceptNetwork) -> Dict[str, float]:
    """Average in- and out-degree of a network and its null, plus the largest in-degree of each"""

    def degrees(net: ConceptNetwork):
        in_deg = {n: 0 for n in net.ids}
        out_deg = {n: 0 for n in net.ids}
        for e in net.edges:
            out_deg[e.source] += 1
            in_deg[e.target] += 1
        return np.array(list(in_deg.values())), np.array(list(out_deg.values()))

    real_in, real_out = degrees(original)
    null_in, null_out = degrees(null)
    return {
        'subject': original.subject,
        'real_mean_in': float(real_in.mean()) if real_in.size else 0.0,
        'real_mean_out': float(real_out.mean()) if real_out.size else 0.0,
        'null_mean_in': float(null_in.mean()) if null_in.size else 0.0,
        'null_mean_out': float(null_out.mean()) if null_out.size else 0.0,
        'real_max_in': int(real_in.max()) if real_in.size else 0,
        'null_max_in': int(null_in.max()) if null_in.size else 0,
    }
