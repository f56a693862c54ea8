"""
Report command: aggregate every artifact into one summary
"""

import click

from commands.context import RunContext, pass_run
from services.exports import build_report


@click.command('report')
@click.option('--no-plots', 'no_plots', is_flag=True, default=False, help='Skip the plot-ready CSVs')
@pass_run
def report(run: RunContext, no_plots):
    """Write report/summary.json and report/plots/*.csv from upstream artifacts"""
    run.begin('report')
    path = build_report(run.layout, plots=not no_plots)
    click.echo(str(path))
