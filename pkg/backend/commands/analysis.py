"""
Analysis commands: structure metrics, null models, homology, growth
simulation, temporal modules and influence
"""

import json
from typing import Dict, List, Tuple

import click
import structlog

from commands.context import RunContext, pass_run
from errors import ConfigError
from models.corpus import NobelNodeSet
from models.network import ConceptNetwork, GrowthFiltration
from models.schemas import serialize_network
from models.topology import LifetimeSummary
from services import homology as homology_service
from services import influence as influence_service
from services.exports import read_json, read_table, write_json, write_table
from services.genetic_model import compare_degree_distributions, estimate_params, run_simulation
from services.null_models import degree_summary, edge_rewire, jitter_years
from services.pipeline import map_subjects, rng_for, slugify
from services.structure_metrics import epoch_lead_lag, lead_lag, pooled_lead_lag, subject_metrics
from services.temporal_paradigms import analyse_network, epoch_signature, robustness_report

logger = structlog.get_logger()

VARIANTS = ('real', 'rewired', 'jittered', 'simulated')
SWEEP_INTERSLICE = (0.001, 0.01, 0.02)

METRIC_COLUMNS = ['variant', 'subject', 'nodes', 'edges', 'clustering_mean', 'clustering_sd',
                  'modularity', 'modules', 'coreness', 'rho']
LEAD_LAG_EDGE_COLUMNS = ['subject', 'scope', 'label', 'core', 'periphery', 'delta']
LEAD_LAG_TEST_COLUMNS = ['subject', 'scope', 'label', 'n', 'mean', 'q1', 'median', 'q3',
                         'lower_fence', 'upper_fence', 'statistic', 'p_value']


# Worker entry points take one tuple so they can be shipped to a process pool.

def _metrics_job(args: Tuple[ConceptNetwork, int, int, int]) -> dict:
    network, seed, restarts, n_epochs = args
    whole = lead_lag(network, scope='whole', rng_seed=seed, restarts=restarts)
    module = lead_lag(network, scope='module', rng_seed=seed, restarts=restarts)
    epochs = epoch_lead_lag(GrowthFiltration(network), n_epochs=n_epochs, rng_seed=seed, restarts=restarts)
    return {'row': subject_metrics(network, seed, restarts), 'reports': [whole, module] + epochs}


def _structure_only_job(args: Tuple[ConceptNetwork, int, int]) -> dict:
    network, seed, restarts = args
    return subject_metrics(network, seed, restarts)


def _barcode_job(args: Tuple[ConceptNetwork, int, int]):
    network, max_dim, max_cliques = args
    return homology_service.compute_barcode(network, max_dim, max_cliques)


def _temporal_job(args: Tuple[ConceptNetwork, float, float, int, int]):
    network, omega, gamma, q, seed = args
    return analyse_network(network, omega=omega, gamma=gamma, q=q, rng_seed=seed)


def _lead_lag_rows(network: ConceptNetwork, reports) -> Tuple[List[dict], List[dict]]:
    titles = {n.id: n.title for n in network.nodes}
    edge_rows, test_rows = [], []
    for report in reports:
        for e in report.edges:
            edge_rows.append({'subject': network.subject, 'scope': report.scope, 'label': report.label,
                              'core': titles[e.core], 'periphery': titles[e.periphery], 'delta': e.delta})
        row = {'subject': network.subject, 'scope': report.scope, 'label': report.label, **report.summary()}
        if report.test is not None:
            row.update(statistic=report.test.statistic, p_value=report.test.p_value)
        test_rows.append(row)
    return edge_rows, test_rows


@click.command('metrics')
@click.option('--restarts', type=int, help='Core-periphery random restarts')
@click.option('--epochs', 'n_epochs', type=int, help='Cumulative epochs for the lead-lag time course')
@pass_run
def metrics(run: RunContext, restarts, n_epochs):
    """Clustering, modularity, coreness and lead-lag per subject"""
    cfg = run.begin('metrics', restarts=restarts, n_epochs=n_epochs)
    layout = run.layout
    networks = run.load_networks('real')
    jobs = {s: (n, run.seed_for('metrics', s), cfg.restarts, cfg.n_epochs) for s, n in networks.items()}
    results = map_subjects(_metrics_job, jobs, cfg.jobs)

    rows, edge_rows, test_rows = [], [], []
    whole_reports = []
    for subject, result in results.items():
        rows.append({'variant': 'real', **result['row']})
        whole_reports.append(result['reports'][0])
        e, t = _lead_lag_rows(networks[subject], result['reports'])
        edge_rows.extend(e)
        test_rows.extend(t)
    pooled = pooled_lead_lag(whole_reports)
    if pooled is not None:
        test_rows.append({'subject': 'ALL', 'scope': 'pooled', 'label': 'pooled', 'n': pooled.sizes[0],
                          'statistic': pooled.statistic, 'p_value': pooled.p_value})

    rewired_dir = layout.nulls_dir('rewired')
    if rewired_dir.exists() and any(rewired_dir.glob('*.json')):
        nulls = run.load_networks('rewired')
        null_jobs = {s: (n, run.seed_for('metrics', s), cfg.restarts) for s, n in nulls.items()}
        for subject, row in map_subjects(_structure_only_job, null_jobs, cfg.jobs).items():
            rows.append({'variant': 'rewired', **row})
    else:
        logger.info("No rewired networks; metrics computed for real networks only")

    write_table(rows, layout.metrics_dir / 'metrics.csv', METRIC_COLUMNS)
    write_table(edge_rows, layout.metrics_dir / 'lead_lag_edges.csv', LEAD_LAG_EDGE_COLUMNS)
    write_table(test_rows, layout.metrics_dir / 'lead_lag_tests.csv', LEAD_LAG_TEST_COLUMNS)
    click.echo(str(layout.metrics_dir))


def _write_nulls(run: RunContext, kind: str, networks: Dict[str, ConceptNetwork], nulls: Dict[str, ConceptNetwork]):
    out = run.layout.nulls_dir(kind)
    for subject, null in nulls.items():
        serialize_network(null, out / f'{slugify(subject)}.json')
    rows = [degree_summary(networks[s], nulls[s]) for s in sorted(nulls)]
    write_table(rows, out / 'degree_summary.csv', list(rows[0].keys()) if rows else ['subject'])
    click.echo(str(out))


@click.command('rewire')
@pass_run
def rewire(run: RunContext):
    """Edge-rewired null network per subject"""
    run.begin('rewire')
    networks = run.load_networks('real')
    nulls = {s: edge_rewire(n, run.seed_for('rewire', s)) for s, n in networks.items()}
    _write_nulls(run, 'rewired', networks, nulls)


@click.command('jitter')
@pass_run
def jitter(run: RunContext):
    """Year-jittered copy of each subject network"""
    run.begin('jitter')
    networks = run.load_networks('real')
    nulls = {s: jitter_years(n, run.seed_for('jitter', s)) for s, n in networks.items()}
    _write_nulls(run, 'jittered', networks, nulls)


def _gap_comparison(run: RunContext) -> None:
    """Compare real cavity lifetimes with every other variant that has been computed"""
    layout = run.layout
    summaries = {}
    for variant in VARIANTS:
        path = layout.homology_dir(variant) / 'lifetimes.json'
        if path.exists():
            data = read_json(path)['subjects']
            summaries[variant] = {s: LifetimeSummary.from_dict(d) for s, d in data.items()}
    if 'real' not in summaries or len(summaries) < 2:
        return
    others = {k: v for k, v in summaries.items() if k != 'real'}
    report = homology_service.compare_gap_statistics(summaries['real'], others)
    write_json(report, layout.root / 'homology' / 'gap_comparison.json')


@click.command('homology')
@click.option('--max-dim', type=int, help='Highest homology dimension')
@click.option('--variant', type=click.Choice(VARIANTS), default='real', show_default=True)
@click.option('--no-h0', 'no_h0', is_flag=True, default=False, help='Leave dimension 0 out of the lifetime summaries')
@pass_run
def homology(run: RunContext, max_dim, variant, no_h0):
    """Persistent homology barcodes of the birth-year filtration"""
    cfg = run.begin('homology', max_dim=max_dim, include_h0=False if no_h0 else None)
    layout = run.layout
    networks = run.load_networks(variant)
    jobs = {s: (n, cfg.max_dim, run.settings.MAX_CLIQUES) for s, n in networks.items()}
    barcodes = map_subjects(_barcode_job, jobs, cfg.jobs)

    barcode_rows, participation_rows = [], []
    lifetimes, betti = {}, {}
    for subject, pairs in barcodes.items():
        network = networks[subject]
        barcode_rows.extend(homology_service.barcode_rows(network, pairs))
        participation_rows.extend(homology_service.participation_rows(network, homology_service.participation(pairs)))
        lifetimes[subject] = homology_service.lifetime_distributions(pairs, cfg.include_h0).to_dict()
        final_year = max(n.year for n in network.nodes) if network.nodes else 0
        betti[subject] = homology_service.betti_numbers(pairs, final_year, cfg.max_dim)

    out = layout.homology_dir(variant)
    write_table(barcode_rows, out / 'barcode.csv',
                ['subject', 'dim', 'birth_year', 'death_year', 'birth_simplex', 'death_simplex'])
    write_table(participation_rows, out / 'participation.csv', ['subject', 'title', 'birth_count', 'death_count'])
    write_json({'include_h0': cfg.include_h0, 'max_dim': cfg.max_dim, 'subjects': lifetimes,
                'final_betti': betti}, out / 'lifetimes.json')
    _gap_comparison(run)
    click.echo(str(out))


@click.command('simulate')
@click.option('--start-year', type=int, help='First simulated year; nodes born earlier seed the model')
@click.option('--year-cap', type=int, help='Last year the simulation may reach')
@pass_run
def simulate(run: RunContext, start_year, year_cap):
    """Grow a preference-free genetic-model network per subject"""
    cfg = run.begin('simulate', sim_start_year=start_year, year_cap=year_cap)
    if cfg.sim_start_year is None:
        raise ConfigError('sim_start_year', 'required for simulate (pass --start-year)')
    layout = run.layout
    out = layout.simulate_dir
    networks = run.load_networks('real')
    ks_rows, growth_rows = [], []
    for subject, network in networks.items():
        slug = slugify(subject)
        params = estimate_params(network, rng_for(cfg.seed, 'calibrate', subject))
        trace = run_simulation(network, params, run.seed_for('simulate', subject), cfg.sim_start_year, cfg.year_cap)
        write_json(params.to_dict(), out / f'{slug}.params.json')
        write_json(trace.to_dict(), out / f'{slug}.trace.json')
        serialize_network(trace.network, out / 'networks' / f'{slug}.json')
        test = compare_degree_distributions(network, trace.network)
        ks_rows.append({'subject': subject, 'statistic': test.statistic, 'p_value': test.p_value,
                        'real_nodes': network.n_nodes, 'simulated_nodes': trace.network.n_nodes})
        growth_rows.extend({'subject': subject, 'year': y, 'nodes': c} for y, c in sorted(trace.counts.items()))
    write_table(ks_rows, out / 'degree_ks.csv', ['subject', 'statistic', 'p_value', 'real_nodes', 'simulated_nodes'])
    write_table(growth_rows, out / 'growth.csv', ['subject', 'year', 'nodes'])
    click.echo(str(out))


def _traces(run: RunContext, networks: Dict[str, ConceptNetwork], omega: float):
    cfg = run.run_config
    jobs = {s: (n, omega, cfg.gamma, cfg.q, run.seed_for('temporal', s)) for s, n in networks.items()}
    return map_subjects(_temporal_job, jobs, cfg.jobs)


@click.command('temporal')
@click.option('--interslice', type=float, help='Interslice coupling weight')
@click.option('--gamma', type=float, help='Resolution parameter')
@click.option('--q', type=int, help='Number of changepoints')
@click.option('--variant', type=click.Choice(VARIANTS), default='real', show_default=True)
@click.option('--sweep', is_flag=True, default=False, help='Also check the signature under other couplings and jittered years')
@pass_run
def temporal(run: RunContext, interslice, gamma, q, variant, sweep):
    """Temporal modules, membership changes, changepoints and the epoch signature"""
    cfg = run.begin('temporal', interslice=interslice, gamma=gamma, q=q)
    layout = run.layout
    networks = run.load_networks(variant)
    traces = _traces(run, networks, cfg.interslice)

    membership, changes = [], []
    for subject, trace in traces.items():
        titles = {n.id: n.title for n in networks[subject].nodes}
        for (node, layer), label in sorted(trace.labels.items(), key=lambda kv: (kv[0][1], kv[0][0])):
            membership.append({'subject': subject, 'year': trace.years[layer], 'title': titles[node], 'module': label})
        for layer, count in enumerate(trace.changes):
            changes.append({'subject': subject, 'layer': layer, 'year': trace.years[layer], 'changes': count,
                            'epoch': trace.epoch_of(layer) + 1})

    out = layout.temporal_dir(variant)
    write_table(membership, out / 'membership.csv', ['subject', 'year', 'title', 'module'])
    write_table(changes, out / 'changes.csv', ['subject', 'layer', 'year', 'changes', 'epoch'])
    write_table(epoch_signature(list(traces.values())), out / 'signature.csv',
                ['subject', 'epoch', 'mean_change', 'duration'])

    if sweep:
        variants = {f'interslice={omega:g}': list(_traces(run, networks, omega).values()) for omega in SWEEP_INTERSLICE}
        jittered_dir = layout.nulls_dir('jittered')
        if variant == 'real' and jittered_dir.exists() and any(jittered_dir.glob('*.json')):
            variants['jittered'] = list(_traces(run, run.load_networks('jittered'), cfg.interslice).values())
        report = robustness_report(variants, reference=f'interslice={cfg.interslice:g}')
        write_json({'rank_orders': report.rank_orders, 'reference': report.reference, 'preserved': report.preserved},
                   layout.root / 'temporal' / 'sweep.json')
        logger.info("Signature robustness checked", variants=sorted(variants), preserved=report.preserved)
    click.echo(str(out))


@click.command('influence')
@click.option('--horizon', type=int, help='Impulse-response time horizon')
@pass_run
def influence(run: RunContext, horizon):
    """Impulse response over the union network, against cavity participation and Nobel recognition"""
    cfg = run.begin('influence', horizon=horizon)
    layout = run.layout
    networks = run.load_networks('real')
    rows = read_table(layout.require(layout.homology_dir('real') / 'participation.csv', 'homology'),
                      dtype={'title': str, 'subject': str})
    nobel_path = layout.require(layout.corpus_dir / 'nobel.json', 'ingest')
    nobel = NobelNodeSet(frozenset(json.loads(nobel_path.read_text(encoding='utf-8'))))

    union = influence_service.build_union(list(networks.values()))
    scores, a_norm = influence_service.influence_scores(union, cfg.horizon)
    participation = influence_service.participation_by_title(
        r for r in rows if r['subject'] in networks
    )
    report = {
        'union': {'nodes': union.network.n_nodes, 'edges': union.network.n_edges, 'subjects': sorted(networks)},
        'lambda_max': scores.lambda_max,
        'horizon': scores.horizon,
        'correlation': influence_service.correlate_participation(scores, participation),
        'horizon_sweep': influence_service.horizon_sweep(union, participation, a_norm, scores.lambda_max,
                                                         max(1, cfg.horizon)),
        'nobel': influence_service.nobel_comparison(participation, nobel, scores.titles),
    }
    out = layout.influence_dir
    write_table(influence_service.influence_rows(scores, participation, nobel), out / 'influence.csv',
                ['title', 'score', 'birth_count', 'death_count', 'is_nobel'])
    write_json(report, out / 'influence_report.json')
    click.echo(str(out))
