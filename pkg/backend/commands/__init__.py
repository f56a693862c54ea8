"""
Subcommands of the knowledge-growth CLI, grouped by pipeline stage
"""

from .analysis import homology, influence, jitter, metrics, rewire, simulate, temporal
from .corpus import build, ingest
from .report import report

# registration order is the pipeline order shown in --help
COMMANDS = [ingest, build, metrics, rewire, jitter, homology, simulate, temporal, influence, report]

__all__ = ['COMMANDS']
