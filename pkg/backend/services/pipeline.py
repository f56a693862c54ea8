"""
Run plumbing shared by the subcommands: seed splitting, subject slugs,
per-subject parallel map and artifact paths
"""

import re
import zlib
from multiprocessing import Pool
from pathlib import Path
from typing import Callable, Dict, Sequence, TypeVar

import numpy as np
import structlog

from errors import MissingArtifactError

logger = structlog.get_logger()

T = TypeVar('T')
R = TypeVar('R')


def split_seed(seed: int, stage: str, subject: str = '') -> np.random.SeedSequence:
    """Independent stream per (stage, subject) derived from the single run seed"""
    return np.random.SeedSequence([int(seed), zlib.crc32(stage.encode('utf-8')), zlib.crc32(subject.encode('utf-8'))])


def rng_for(seed: int, stage: str, subject: str = '') -> np.random.Generator:
    return np.random.default_rng(split_seed(seed, stage, subject))


def int_seed_for(seed: int, stage: str, subject: str = '') -> int:
    return int(split_seed(seed, stage, subject).generate_state(1)[0])


def slugify(name: str) -> str:
    slug = re.sub(r'[^a-z0-9]+', '_', name.lower()).strip('_')
    return slug or 'subject'


def map_subjects(func: Callable[[T], R], items: Dict[str, T], jobs: int = 1) -> Dict[str, R]:
    """
    Apply func to every subject's item, optionally in worker processes.

    Results are merged in sorted subject order so the outcome never depends on jobs.
    """
    keys = sorted(items)
    if jobs <= 1 or len(keys) <= 1:
        return {k: func(items[k]) for k in keys}
    logger.info("Dispatching subjects to workers", jobs=jobs, subjects=len(keys))
    with Pool(processes=min(jobs, len(keys))) as pool:
        results = pool.map(func, [items[k] for k in keys])
    return dict(zip(keys, results))


class ArtifactLayout:
    """Where each subcommand reads and writes under one output directory"""

    def __init__(self, root):
        self.root = Path(root)

    @property
    def corpus_dir(self) -> Path:
        return self.root / 'corpus'

    @property
    def networks_dir(self) -> Path:
        return self.root / 'networks'

    @property
    def metrics_dir(self) -> Path:
        return self.root / 'metrics'

    def nulls_dir(self, kind: str) -> Path:
        return self.root / 'nulls' / kind

    def homology_dir(self, variant: str) -> Path:
        return self.root / 'homology' / variant

    @property
    def simulate_dir(self) -> Path:
        return self.root / 'simulate'

    def temporal_dir(self, variant: str) -> Path:
        return self.root / 'temporal' / variant

    @property
    def influence_dir(self) -> Path:
        return self.root / 'influence'

    @property
    def report_dir(self) -> Path:
        return self.root / 'report'

    def variant_networks_dir(self, variant: str) -> Path:
        """Network directory behind a homology/temporal variant name"""
        if variant == 'real':
            return self.networks_dir
        if variant == 'simulated':
            return self.simulate_dir / 'networks'
        return self.nulls_dir(variant)

    def require(self, path: Path, subcommand: str) -> Path:
        if not path.exists():
            raise MissingArtifactError(str(path), subcommand)
        return path

    def network_files(self, directory: Path, subcommand: str, subjects: Sequence[str] = ()) -> Dict[str, Path]:
        """Network JSON files keyed by slug, filtered to the requested subjects"""
        self.require(directory, subcommand)
        files = {p.stem: p for p in sorted(directory.glob('*.json'))}
        if subjects:
            wanted = {slugify(s) for s in subjects}
            missing = sorted(wanted - set(files))
            if missing:
                raise MissingArtifactError(str(directory / f'{missing[0]}.json'), subcommand)
            files = {k: v for k, v in files.items() if k in wanted}
        if not files:
            raise MissingArtifactError(str(directory / '*.json'), subcommand)
        return files
