"""
Per-invocation state shared by the subcommands
"""

from dataclasses import dataclass
from typing import Dict

import click
import structlog

from config.settings import Config, RunConfig, echo_config
from models.network import ConceptNetwork
from models.schemas import deserialize_network
from services.pipeline import ArtifactLayout, int_seed_for, rng_for

logger = structlog.get_logger()

# which subcommand produces the networks behind each variant name
VARIANT_PRODUCERS = {
    'real': 'build',
    'rewired': 'rewire',
    'jittered': 'jitter',
    'simulated': 'simulate',
}


@dataclass
class RunContext:
    run_config: RunConfig
    settings: type = Config

    @property
    def layout(self) -> ArtifactLayout:
        return ArtifactLayout(self.run_config.output_dir)

    def begin(self, command: str, **overrides) -> RunConfig:
        """Apply subcommand flags, echo the effective config and log the start"""
        self.run_config = self.run_config.override(**overrides)
        echo_config(self.run_config)
        logger.info("Command started", command=command, output_dir=self.run_config.output_dir,
                    seed=self.run_config.seed)
        return self.run_config

    def seed_for(self, stage: str, subject: str = '') -> int:
        return int_seed_for(self.run_config.seed, stage, subject)

    def rng_for(self, stage: str, subject: str = ''):
        return rng_for(self.run_config.seed, stage, subject)

    def load_networks(self, variant: str = 'real') -> Dict[str, ConceptNetwork]:
        """Networks of one variant keyed by subject name, limited to the configured subjects"""
        layout = self.layout
        files = layout.network_files(layout.variant_networks_dir(variant), VARIANT_PRODUCERS[variant],
                                     self.run_config.subjects)
        networks = [deserialize_network(path) for path in files.values()]
        return {n.subject: n for n in sorted(networks, key=lambda n: n.subject)}


pass_run = click.make_pass_decorator(RunContext)
