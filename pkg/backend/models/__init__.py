"""
Domain models for the knowledge growth pipeline
"""

from .corpus import Corpus, NobelNodeSet, ParsedArticle, RawArticle, SubjectIndex
from .network import ConceptEdge, ConceptNetwork, ConceptNode, GrowthFiltration
from .analysis import CoreAssignment, LeadLagEdge, LeadLagReport, Partition, Regression, TestResult
from .topology import Filtration, LifetimeSummary, ParticipationCounts, PersistencePair, Simplex
from .dynamics import (
    InfluenceScores,
    MembershipTrace,
    MultilayerNetwork,
    MutationParams,
    ParticipationByTitle,
    RobustnessReport,
    Seed,
    SimTrace,
    UnionNetwork,
)

__all__ = [
    'Corpus', 'NobelNodeSet', 'ParsedArticle', 'RawArticle', 'SubjectIndex',
    'ConceptEdge', 'ConceptNetwork', 'ConceptNode', 'GrowthFiltration',
    'CoreAssignment', 'LeadLagEdge', 'LeadLagReport', 'Partition', 'Regression', 'TestResult',
    'Filtration', 'LifetimeSummary', 'ParticipationCounts', 'PersistencePair', 'Simplex',
    'InfluenceScores', 'MembershipTrace', 'MultilayerNetwork', 'MutationParams',
    'ParticipationByTitle', 'RobustnessReport', 'Seed', 'SimTrace', 'UnionNetwork',
]
