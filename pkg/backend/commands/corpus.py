"""
Corpus commands: ingest articles and build subject networks
"""

import click
import structlog

from commands.context import RunContext, pass_run
from errors import CorpusError
from models.schemas import serialize_network
from services.concept_graph import build_subject_networks
from services.corpus_ingest import ingest_dump, load_corpus, write_corpus
from services.pipeline import slugify

logger = structlog.get_logger()


@click.command('ingest')
@click.option('--corpus', 'corpus_path', type=click.Path(exists=True), help='Mini-corpus JSON or parsed-corpus directory')
@click.option('--dump', 'dump_path', type=click.Path(exists=True, dir_okay=False), help='Multistream .xml.bz2 dump')
@click.option('--index', 'index_path', type=click.Path(exists=True, dir_okay=False), help='Multistream index file')
@click.option('--index-title', 'index_titles', multiple=True, help='Subject index page title (repeatable)')
@click.option('--nobel-page', 'nobel_pages', multiple=True, help='Laureate list page title (repeatable)')
@pass_run
def ingest(run: RunContext, corpus_path, dump_path, index_path, index_titles, nobel_pages):
    """Parse articles from a dump or the mini-corpus into the run's corpus directory"""
    cfg = run.begin('ingest', corpus=corpus_path, dump_path=dump_path, index_path=index_path)
    if cfg.dump_path and cfg.index_path and not corpus_path:
        if not index_titles:
            raise CorpusError('dump ingestion needs at least one --index-title')
        corpus = ingest_dump(cfg.dump_path, cfg.index_path, index_titles, nobel_pages,
                             dump_year=run.settings.DUMP_YEAR)
    else:
        source = cfg.corpus or run.settings.MINI_CORPUS_PATH
        if not cfg.corpus:
            logger.info("No corpus given; using the bundled mini-corpus", path=source)
        corpus = load_corpus(source, dump_year=run.settings.DUMP_YEAR)
    out = write_corpus(corpus, run.layout.corpus_dir)
    click.echo(str(out))


@click.command('build')
@click.option('--corpus', 'corpus_path', type=click.Path(exists=True),
              help='Mini-corpus JSON or parsed-corpus directory (default: the ingested corpus)')
@click.option('--subject', 'subjects', multiple=True, help='Subject to build (repeatable; default all)')
@pass_run
def build(run: RunContext, corpus_path, subjects):
    """Build one concept network per subject"""
    cfg = run.begin('build', corpus=corpus_path, subjects=list(subjects) or None)
    layout = run.layout
    if cfg.corpus:
        corpus = load_corpus(cfg.corpus, dump_year=run.settings.DUMP_YEAR)
    else:
        corpus = load_corpus(layout.require(layout.corpus_dir / 'manifest.json', 'ingest').parent)
    networks = build_subject_networks(corpus, cfg.subjects, default_year=run.settings.DEFAULT_YEAR)
    for subject, network in networks.items():
        path = serialize_network(network, layout.networks_dir / f'{slugify(subject)}.json')
        click.echo(str(path))
