"""
Configuration settings for the Knowledge Growth pipeline
"""

import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv
from marshmallow import EXCLUDE, Schema, ValidationError, fields as ma_fields, post_load, validate, validates_schema

from errors import ConfigError

load_dotenv()


class Config:
    """Base configuration class"""

    # Logging settings
    LOG_LEVEL = os.environ.get('LOG_LEVEL', 'INFO')
    LOG_FORMAT = os.environ.get('LOG_FORMAT', 'json')  # json or text

    # Output settings
    OUTPUT_DIR = os.environ.get('OUTPUT_DIR', './runs/default')
    JOBS = int(os.environ.get('JOBS', '1'))

    # Corpus settings
    DUMP_YEAR = int(os.environ.get('DUMP_YEAR', '2019'))  # years after the dump are noise
    DEFAULT_YEAR = int(os.environ.get('DEFAULT_YEAR', '2020'))  # undated after imputation
    MINI_CORPUS_PATH = os.environ.get(
        'MINI_CORPUS_PATH',
        str(Path(__file__).resolve().parents[2] / 'knowledge_base' / 'mini_corpus.json'),
    )

    # Homology guard
    MAX_CLIQUES = int(os.environ.get('MAX_CLIQUES', str(10 ** 7)))


class DevelopmentConfig(Config):
    """Development configuration"""
    LOG_LEVEL = 'DEBUG'
    LOG_FORMAT = 'text'


class TestingConfig(Config):
    """Testing configuration"""
    LOG_LEVEL = 'WARNING'
    LOG_FORMAT = 'text'
    JOBS = 1


class ProductionConfig(Config):
    """Full-dump runs"""
    LOG_LEVEL = 'INFO'
    LOG_FORMAT = 'json'


# Configuration mapping
config = {
    'development': DevelopmentConfig,
    'testing': TestingConfig,
    'production': ProductionConfig,
    'default': Config
}


def get_config():
    """Get configuration based on environment"""
    env = os.environ.get('KNOWLEDGE_GROWTH_ENV', 'default')
    return config.get(env, config['default'])


@dataclass(frozen=True)
class RunConfig:
    """Effective parameters of one pipeline run"""

    corpus: Optional[str] = None
    dump_path: Optional[str] = None
    index_path: Optional[str] = None
    subjects: List[str] = field(default_factory=list)
    seed: int = 0
    max_dim: int = 2
    interslice: float = 0.01   # coupling between adjacent year layers
    gamma: float = 1.0
    q: int = 3                 # changepoints per membership signal
    horizon: int = 5           # impulse-response steps
    restarts: int = 20
    n_epochs: int = 10
    include_h0: bool = True
    sim_start_year: Optional[int] = None
    year_cap: int = 2200
    output_dir: str = Config.OUTPUT_DIR
    jobs: int = Config.JOBS

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def override(self, **changes) -> 'RunConfig':
        """Apply non-None overrides (CLI flags win over the file) and re-validate"""
        changes = {k: v for k, v in changes.items() if v is not None}
        if not changes:
            return self
        return load_run_config({**self.to_dict(), **changes})


class RunConfigSchema(Schema):
    """Schema for run configuration validation"""

    class Meta:
        unknown = EXCLUDE

    corpus = ma_fields.Str(allow_none=True, load_default=None)
    dump_path = ma_fields.Str(allow_none=True, load_default=None)
    index_path = ma_fields.Str(allow_none=True, load_default=None)
    subjects = ma_fields.List(ma_fields.Str(), load_default=list)
    seed = ma_fields.Int(load_default=0, validate=validate.Range(min=0))
    max_dim = ma_fields.Int(load_default=2, validate=validate.Range(min=0, max=5))
    interslice = ma_fields.Float(load_default=0.01, validate=validate.Range(min=0, min_inclusive=False))
    gamma = ma_fields.Float(load_default=1.0, validate=validate.Range(min=0, min_inclusive=False))
    q = ma_fields.Int(load_default=3, validate=validate.Range(min=1))
    horizon = ma_fields.Int(load_default=5, validate=validate.Range(min=0, max=50))
    restarts = ma_fields.Int(load_default=20, validate=validate.Range(min=1))
    n_epochs = ma_fields.Int(load_default=10, validate=validate.Range(min=1))
    include_h0 = ma_fields.Bool(load_default=True)
    sim_start_year = ma_fields.Int(allow_none=True, load_default=None)
    year_cap = ma_fields.Int(load_default=2200)
    output_dir = ma_fields.Str(load_default=Config.OUTPUT_DIR)
    jobs = ma_fields.Int(load_default=Config.JOBS, validate=validate.Range(min=1))

    @validates_schema
    def check_paths(self, data, **kwargs):
        for name in ('corpus', 'dump_path', 'index_path'):
            path = data.get(name)
            if path and not Path(path).exists():
                raise ValidationError(f'path does not exist: {path}', field_name=name)
        if (data.get('sim_start_year') is not None
                and data.get('year_cap', 2200) < data['sim_start_year']):
            raise ValidationError('must be >= sim_start_year', field_name='year_cap')

    @post_load
    def make_config(self, data, **kwargs):
        return RunConfig(**data)


def load_run_config(data: Dict[str, Any]) -> RunConfig:
    """Validate a raw mapping into a RunConfig, naming the violated field on error"""
    try:
        return RunConfigSchema().load(data)
    except ValidationError as e:
        name, messages = next(iter(sorted(e.messages.items())))
        message = messages[0] if isinstance(messages, list) else str(messages)
        raise ConfigError(name, message) from e


def validate_config(path: Optional[str] = None) -> RunConfig:
    """
    Load a JSON config file (or nothing) and fill the documented defaults.

    Args:
        path: JSON file; None or an empty object yields all defaults

    Returns:
        Validated RunConfig
    """
    data: Dict[str, Any] = {}
    if path:
        with open(path, encoding='utf-8') as fh:
            text = fh.read().strip()
        try:
            data = json.loads(text) if text else {}
        except json.JSONDecodeError as e:
            raise ConfigError('<root>', f'invalid JSON: {e.msg}') from e
        if not isinstance(data, dict):
            raise ConfigError('<root>', 'config must be a JSON object')
    return load_run_config(data)


def echo_config(run_config: RunConfig, output_dir: Optional[str] = None) -> Path:
    """Write the effective configuration next to the run's artifacts"""
    out = Path(output_dir or run_config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / 'effective_config.json'
    path.write_text(json.dumps(run_config.to_dict(), indent=2, sort_keys=True) + '\n', encoding='utf-8')
    return path


