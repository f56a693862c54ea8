"""
Knowledge Growth command-line application
Main entry point for the concept-network pipeline
"""

import logging
import sys

import click
import structlog

from commands import COMMANDS
from commands.context import RunContext
from config.settings import Config, get_config, validate_config
from errors import KnowledgeGrowthError

logger = structlog.get_logger()


def configure_logging(level: str = 'INFO', fmt: str = 'json') -> None:
    """Structured logs to standard error; artifacts alone go to files"""
    logging.basicConfig(stream=sys.stderr, level=getattr(logging, level.upper(), logging.INFO),
                        format='%(message)s', force=True)
    renderer = structlog.processors.JSONRenderer() if fmt == 'json' else structlog.dev.ConsoleRenderer(colors=False)
    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.stdlib.PositionalArgumentsFormatter(),
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.processors.UnicodeDecoder(),
            renderer,
        ],
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )


class KnowledgeGrowthGroup(click.Group):
    """Lists subcommands in pipeline order and turns pipeline errors into exit code 1"""

    def list_commands(self, ctx):
        return list(self.commands)

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except KnowledgeGrowthError as e:
            logger.error("Command failed", error=str(e), error_type=type(e).__name__)
            click.echo(f'Error: {e}', err=True)
            ctx.exit(1)


def create_cli(config_class=Config) -> click.Group:
    """CLI factory pattern"""

    @click.group(cls=KnowledgeGrowthGroup)
    @click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False),
                  help='JSON run configuration')
    @click.option('--out', 'output_dir', type=click.Path(file_okay=False), help='Output directory for artifacts')
    @click.option('--seed', type=int, help='Run seed; every random stream is derived from it')
    @click.option('--jobs', type=int, help='Worker processes for per-subject work')
    @click.option('--log-level', type=click.Choice(['DEBUG', 'INFO', 'WARNING', 'ERROR'], case_sensitive=False),
                  help='Log level (default from the environment config)')
    @click.pass_context
    def cli(ctx, config_path, output_dir, seed, jobs, log_level):
        """Grow, measure and compare concept networks"""
        configure_logging(log_level or config_class.LOG_LEVEL, config_class.LOG_FORMAT)
        run_config = validate_config(config_path).override(output_dir=output_dir, seed=seed, jobs=jobs)
        ctx.obj = RunContext(run_config=run_config, settings=config_class)

    for command in COMMANDS:
        cli.add_command(command)
    return cli


def main():
    create_cli(get_config())(prog_name='knowledge-growth')


if __name__ == '__main__':
    main()
