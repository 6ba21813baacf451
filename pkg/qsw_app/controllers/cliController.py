'''
==============================================================================
CLI Controller - command-line front end
==============================================================================

Commands:
    - run     : one alpha (alpha = 0 writes the pure-state trace only)
    - scan    : a list of alphas
    - figure  : data behind fig1a | fig1b | fig2
    - fit     : re-fit the information dimension of an existing trace CSV

Every ExperimentConfig field is available as a flag; flags override the
TOML file given with --config, which overrides the environment.

Exit Codes:
    - 0 : success
    - 2 : configuration error (messages on stderr)
    - 3 : numerical failure (per-alpha detail in the summary status column)
'''

import functools
import logging

import click

from qsw_app import configure_logging
from qsw_app.controllers import experimentController as experiments
from qsw_app.models.scalingModels import FitWindow
from qsw_app.utils.errors import (
    EXIT_CONFIG_ERROR, EXIT_NUMERICAL_ERROR, ConfigError, NumericalError,
)
from qsw_app.utils.validators import CONVENTIONS, FIT_MODES, TOPOLOGIES

logger = logging.getLogger(__name__)


# =============================================================================
# OPTION PARSING
# =============================================================================

def _parse_initial_node(value):
    if value is None or value in ('center', 'corner'):
        return value
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"Initial node must be 'center', 'corner' or an index (got {value!r})")


def _parse_alphas(value):
    if value is None:
        return None
    try:
        return [float(part) for part in value.split(',') if part.strip()]
    except ValueError:
        raise ConfigError(f"Alpha list must be comma-separated numbers (got {value!r})")


def experiment_options(command):
    """Flags shared by run, scan and figure; each mirrors an ExperimentConfig field."""
    options = [
        click.option('--config', 'config_file', type=click.Path(dir_okay=False), help='TOML experiment file.'),
        click.option('--topology', type=click.Choice(TOPOLOGIES)),
        click.option('--size', type=int, help='Chain length.'),
        click.option('--generation', type=int, help='Sierpinski gasket generation.'),
        click.option('--edge-file', type=click.Path(dir_okay=False), help='Edge list for custom topology.'),
        click.option('--convention', type=click.Choice(CONVENTIONS)),
        click.option('--initial-node', help="'center', 'corner' or a node index."),
        click.option('--dephasing-rate', type=float),
        click.option('--t-min', type=float),
        click.option('--t-max', type=float),
        click.option('--points-per-decade', type=int),
        click.option('--rtol', type=float),
        click.option('--atol', type=float),
        click.option('--fit-mode', type=click.Choice(FIT_MODES)),
        click.option('--window-lo', type=float),
        click.option('--window-hi', type=float),
        click.option('--min-decades', type=float),
        click.option('--saturation-margin', type=float),
        click.option('--transient-time', type=float),
        click.option('--output-dir', type=click.Path(file_okay=False)),
        click.option('--workers', type=int, help='Parallel alpha workers.'),
        click.option('--seed', type=int, help='Reserved; runs are deterministic.'),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def _overrides(flags):
    overrides = dict(flags)
    overrides.pop('config_file', None)
    overrides['initial_node'] = _parse_initial_node(overrides.get('initial_node'))
    return overrides


def handle_errors(command):
    """Translate qsw_app errors into the documented exit codes."""
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            return command(*args, **kwargs)
        except ConfigError as e:
            for message in e.messages:
                click.echo(f"Configuration error: {message}", err=True)
            ctx.exit(EXIT_CONFIG_ERROR)
        except NumericalError as e:
            click.echo(f"Numerical failure: {e}", err=True)
            ctx.exit(EXIT_NUMERICAL_ERROR)
    return wrapper


def _finish(report):
    """Echo a scan summary and exit 3 if any alpha failed."""
    for outcome in report.outcomes:
        fits = [f for f in outcome.fits.values() if f is not None]
        if fits:
            fit = fits[0]
            click.echo(f"alpha={outcome.alpha:g}  d_info={fit.d_info:.4f}  R^2={fit.r_squared:.5f}  "
                       f"window=[{fit.window.t_lo:.4g}, {fit.window.t_hi:.4g}]")
        else:
            status = '; '.join(outcome.statuses.values()) or 'ok'
            click.echo(f"alpha={outcome.alpha:g}  {status}")
    if report.failed:
        click.get_current_context().exit(EXIT_NUMERICAL_ERROR)


# =============================================================================
# COMMANDS
# =============================================================================

@click.group()
@click.option('--log-level', default=None, help='DEBUG, INFO, WARNING or ERROR.')
def cli(log_level):
    """Dissipative quantum walk simulator: entropy growth and information dimension."""
    configure_logging(log_level)


@cli.command()
@click.option('--alpha', type=float, required=True, help='Interpolation weight in [0, 1].')
@experiment_options
@handle_errors
def run(alpha, config_file, **flags):
    """Propagate and fit a single alpha."""
    cfg = experiments.ExperimentConfig.fromSources(config_file, _overrides(flags))
    _finish(experiments.run_single(cfg, alpha))


@cli.command()
@click.option('--alphas', help='Comma-separated alpha values, e.g. 0.1,0.2,1.0.')
@experiment_options
@handle_errors
def scan(alphas, config_file, **flags):
    """Propagate and fit a list of alphas."""
    overrides = _overrides(flags)
    overrides['alphas'] = _parse_alphas(alphas)
    cfg = experiments.ExperimentConfig.fromSources(config_file, overrides)
    _finish(experiments.run_scan(cfg))


@cli.command()
@click.argument('which', type=click.Choice(['fig1a', 'fig1b', 'fig2']))
@experiment_options
@handle_errors
def figure(which, config_file, **flags):
    """Write the data behind one figure as CSV."""
    files = experiments.figure_data(which, config_file, _overrides(flags))
    failed = False
    for name, path in files.items():
        if name != 'reports':
            click.echo(f"wrote {path}")
    for report in files['reports'].values():
        failed = failed or bool(report.failed)
    if failed:
        click.get_current_context().exit(EXIT_NUMERICAL_ERROR)


@cli.command()
@click.argument('trace_file', type=click.Path(exists=True, dir_okay=False))
@click.option('--window-lo', type=float, help='Fixed window start; omit both for an automatic window.')
@click.option('--window-hi', type=float)
@click.option('--n-nodes', type=int, help='Network size (read from run_metadata.json if omitted).')
@click.option('--alpha', type=float, help='Alpha label (parsed from the file name if omitted).')
@click.option('--min-decades', type=float, default=0.7, show_default=True)
@click.option('--saturation-margin', type=float, default=0.9, show_default=True)
@click.option('--transient-time', type=float, default=1.0, show_default=True)
@handle_errors
def fit(trace_file, window_lo, window_hi, n_nodes, alpha, min_decades, saturation_margin, transient_time):
    """Re-fit the information dimension of a trace CSV."""
    if (window_lo is None) != (window_hi is None):
        raise ConfigError("Give both --window-lo and --window-hi, or neither")
    window = FitWindow(window_lo, window_hi) if window_lo is not None else None
    result = experiments.refit_trace(trace_file, window=window, n_nodes=n_nodes, alpha=alpha,
                                     min_decades=min_decades, saturation_margin=saturation_margin,
                                     transient_time=transient_time)
    click.echo(f"d_info={result.d_info:.6f}  intercept={result.intercept:.6f}  "
               f"R^2={result.r_squared:.6f}  window=[{result.window.t_lo:.4g}, {result.window.t_hi:.4g}]  "
               f"n_points={result.n_points}")
