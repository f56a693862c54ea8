"""
Exports Service
Tidy CSV/JSON artifact writers and the end-of-run report: one JSON summary
plus one plot-ready CSV per result
"""

import hashlib
import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd
import structlog

from services.pipeline import ArtifactLayout, slugify

logger = structlog.get_logger()

LIFETIME_SUBJECTS_KEY = 'subjects'


def write_table(rows: Sequence[Dict[str, Any]], path: Path, columns: Sequence[str]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(list(rows), columns=list(columns)).to_csv(path, index=False, lineterminator='\n')
    return path


def read_table(path: Path, dtype: Optional[Dict[str, Any]] = None) -> List[Dict[str, Any]]:
    """CSV rows as plain Python records; empty cells become None"""
    frame = pd.read_csv(path, keep_default_na=False, na_values=[''], dtype=dtype)
    return json.loads(frame.to_json(orient='records'))


def write_json(data: Any, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=1, sort_keys=True, ensure_ascii=False) + '\n', encoding='utf-8')
    return path


def read_json(path: Path) -> Any:
    return json.loads(Path(path).read_text(encoding='utf-8'))


def _optional_json(path: Path) -> Optional[Any]:
    return read_json(path) if path.exists() else None


def _optional_table(path: Path) -> Optional[List[Dict[str, Any]]]:
    return read_table(path) if path.exists() else None


def _lifetime_rows(lifetimes: Dict[str, Any]) -> List[Dict[str, Any]]:
    rows = []
    for subject, summary in sorted(lifetimes[LIFETIME_SUBJECTS_KEY].items()):
        dead = summary['dead_lifetimes']
        rows.append({
            'subject': subject,
            'dead': len(dead),
            'alive': summary['alive_count'],
            'mean_dead_lifetime': sum(dead) / len(dead) if dead else None,
            'dimension_histogram': summary['dimension_histogram'],
        })
    return rows


def _signature_summary(signature: List[Dict[str, Any]]) -> Dict[str, Any]:
    average = [r for r in signature if r['subject'] == 'AVERAGE']
    ranked = sorted(average, key=lambda r: (-r['mean_change'], r['epoch']))
    return {'average': average, 'rank_order': [r['epoch'] for r in ranked]}


def build_summary(layout: ArtifactLayout) -> Dict[str, Any]:
    """
    Collect every upstream artifact into one document keyed by result.

    Raises MissingArtifactError naming the subcommand when a required artifact
    is absent; optional comparisons (nulls, simulation, sweeps) are null when
    their subcommand never ran.
    """
    metrics = read_table(layout.require(layout.metrics_dir / 'metrics.csv', 'metrics'))
    lead_lag = read_table(layout.require(layout.metrics_dir / 'lead_lag_tests.csv', 'metrics'))
    lifetimes = read_json(layout.require(layout.homology_dir('real') / 'lifetimes.json', 'homology'))
    signature = read_table(layout.require(layout.temporal_dir('real') / 'signature.csv', 'temporal'))
    influence = read_json(layout.require(layout.influence_dir / 'influence_report.json', 'influence'))

    return {
        'structure': {
            'rows': metrics,
            'degrees': _optional_table(layout.nulls_dir('rewired') / 'degree_summary.csv'),
        },
        'lead_lag': {'tests': lead_lag},
        'lifetimes': {'subjects': _lifetime_rows(lifetimes)},
        'gap_comparison': {'tests': _optional_json(layout.root / 'homology' / 'gap_comparison.json')},
        'simulation': {'degree_ks': _optional_table(layout.simulate_dir / 'degree_ks.csv')},
        'signature': {**_signature_summary(signature),
                      'robustness': _optional_json(layout.root / 'temporal' / 'sweep.json')},
        'influence': {
            'lambda_max': influence['lambda_max'],
            'horizon': influence['horizon'],
            'correlation': influence['correlation'],
            'horizon_sweep': influence['horizon_sweep'],
        },
        'nobel': influence['nobel'],
    }


def emit_plot_data(layout: ArtifactLayout) -> List[Path]:
    """One tidy CSV per plotted result under report/plots"""
    plots = layout.report_dir / 'plots'
    written = []

    metrics = read_table(layout.require(layout.metrics_dir / 'metrics.csv', 'metrics'))
    written.append(write_table(metrics, plots / 'structure.csv',
                               ['variant', 'subject', 'clustering_mean', 'clustering_sd', 'modularity', 'coreness']))

    edges = read_table(layout.require(layout.metrics_dir / 'lead_lag_edges.csv', 'metrics'))
    written.append(write_table([e for e in edges if e['scope'] == 'whole'], plots / 'lead_lag.csv',
                               ['subject', 'delta']))

    barcode = read_table(layout.require(layout.homology_dir('real') / 'barcode.csv', 'homology'),
                         dtype={'death_year': str, 'birth_simplex': str, 'death_simplex': str})
    for subject in sorted({r['subject'] for r in barcode}):
        rows = [{'dim': r['dim'], 'birth': r['birth_year'], 'death': r['death_year']}
                for r in barcode if r['subject'] == subject]
        written.append(write_table(rows, plots / f'barcode_{slugify(subject)}.csv', ['dim', 'birth', 'death']))

    lifetimes = read_json(layout.require(layout.homology_dir('real') / 'lifetimes.json', 'homology'))
    rows = [{'subject': s, 'lifetime': x}
            for s, summary in sorted(lifetimes[LIFETIME_SUBJECTS_KEY].items()) for x in summary['dead_lifetimes']]
    written.append(write_table(rows, plots / 'lifetimes.csv', ['subject', 'lifetime']))

    growth = layout.simulate_dir / 'growth.csv'
    if growth.exists():
        written.append(write_table(read_table(growth), plots / 'growth.csv', ['subject', 'year', 'nodes']))

    changes = read_table(layout.require(layout.temporal_dir('real') / 'changes.csv', 'temporal'))
    written.append(write_table(changes, plots / 'changes.csv', ['subject', 'year', 'changes', 'epoch']))
    signature = read_table(layout.require(layout.temporal_dir('real') / 'signature.csv', 'temporal'))
    written.append(write_table([r for r in signature if r['subject'] != 'AVERAGE'], plots / 'signature.csv',
                               ['subject', 'epoch', 'mean_change', 'duration']))

    influence = read_table(layout.require(layout.influence_dir / 'influence.csv', 'influence'), dtype={'title': str})
    written.append(write_table(influence, plots / 'influence.csv',
                               ['title', 'score', 'birth_count', 'death_count', 'is_nobel']))
    report = read_json(layout.require(layout.influence_dir / 'influence_report.json', 'influence'))
    curve = [{'kind': kind, 'count': point, 'difference': diff}
             for kind in ('birth', 'death')
             for point, diff in zip(report['nobel'][kind]['curve']['points'],
                                    report['nobel'][kind]['curve']['difference'])]
    written.append(write_table(curve, plots / 'nobel_cdf.csv', ['kind', 'count', 'difference']))
    sweep = [{'horizon': r['horizon'],
              'birth_r': r['birth']['statistic'] if r['birth'] else None,
              'death_r': r['death']['statistic'] if r['death'] else None}
             for r in report['horizon_sweep']]
    written.append(write_table(sweep, plots / 'horizon_sweep.csv', ['horizon', 'birth_r', 'death_r']))
    return written


def build_report(layout: ArtifactLayout, plots: bool = True) -> Path:
    summary = build_summary(layout)
    path = write_json(summary, layout.report_dir / 'summary.json')
    digest = hashlib.sha256(path.read_bytes()).hexdigest()
    n_plots = len(emit_plot_data(layout)) if plots else 0
    logger.info("Report written", path=str(path), sha256=digest, plots=n_plots)
    return path
