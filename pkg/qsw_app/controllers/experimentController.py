'''
==============================================================================
Experiment Controller - alpha scans, figure data and re-fits
==============================================================================

This module sits between the CLI and the models: it turns configuration into
networks and walk parameters, runs one propagation per alpha (optionally in a
process pool), fits the information dimension and writes CSV/JSON outputs.

Outputs of a scan directory:
    - trace_alpha_<alpha>.csv  : t,entropy,return_prob (t = 0 row included)
    - summary.csv              : alpha,d_info,intercept,r_squared,window_lo,
                                 window_hi,n_points,status
    - summary_auto.csv         : same columns, auto windows (fit mode 'both')
    - run_metadata.json        : config echo, start node, relaxation time, versions, wall time

Model Dependencies:
    - networkModels: make_chain, make_sierpinski, load_edge_list, hamiltonian,
      golden_rule_rates
    - dynamicsModels: QswParams
    - trajectoryModels: TimeGrid, propagate
    - entropyModels: entropy_trace, return_probability, EntropyTrace
    - scalingModels: FitWindow, fit_information_dimension, auto_window

Rules Enforced:
    - A numerical failure for one alpha is recorded in its status column and
      never aborts the rest of the scan
    - Results are gathered in alpha order, so serial and parallel runs write
      identical files
    - Floats are written with 17 significant digits
'''

import json
import logging
import math
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import networkx
import numpy as np
import scipy

from qsw_app import __version__, settings
from qsw_app.config.settings import (
    DEFAULT_INITIAL_NODES, FIGURE_ALPHAS, REFERENCE_WINDOWS, get_run_defaults, load_experiment_file,
)
from qsw_app.models.dynamicsModels import QswParams
from qsw_app.models.entropyModels import EntropyTrace, entropy_trace, relaxation_time, return_probability
from qsw_app.models.networkModels import (
    golden_rule_rates, hamiltonian, load_edge_list, make_chain, make_sierpinski,
)
from qsw_app.models.scalingModels import FitWindow, auto_window, fit_information_dimension
from qsw_app.models.trajectoryModels import TimeGrid, propagate
from qsw_app.utils import helpers, validators
from qsw_app.utils.errors import ConfigError, NumericalError

logger = logging.getLogger(__name__)

TRACE_HEADER = ['t', 'entropy', 'return_prob']
SUMMARY_HEADER = ['alpha', 'd_info', 'intercept', 'r_squared', 'window_lo', 'window_hi',
                  'n_points', 'status']
FIGURE_TRACE_HEADER = ['alpha', 't', 'entropy']
FIGURE_DIMENSION_HEADER = ['network', 'alpha', 'd_info', 'r_squared', 'window_lo', 'window_hi', 'status']

FIGURES = {
    'fig1a': {'topology': 'chain', 'size': 100, 'initial_node': 'center'},
    'fig1b': {'topology': 'sierpinski', 'generation': 5, 'initial_node': 'corner'},
}

STATUS_OK = 'ok'
# grid length, in relaxation times, after which traces sit at ln N
SATURATION_RELAXATION_TIMES = 10


# =============================================================================
# EXPERIMENT CONFIGURATION
# =============================================================================

class ExperimentConfig:
    """
    Validated configuration of one scan. Built from a flat dictionary whose
    keys match the attributes below (see config.settings.DEFAULTS).
    """

    def __init__(self, data, max_generation=None):
        """
        Validate every field and map it onto attributes.

        Raises:
            ConfigError: With every validation message collected.
        """
        limit = settings['max_generation'] if max_generation is None else max_generation
        if data.get('initial_node') is None:
            data = dict(data, initial_node=DEFAULT_INITIAL_NODES.get(data.get('topology'), 'center'))
        errors = validators.validate_all_experiment_fields(data, max_generation=limit)
        if errors:
            raise ConfigError(errors)

        self.max_generation = limit
        self.topology = data['topology']
        self.size = data.get('size')
        self.generation = data.get('generation')
        self.edge_file = data.get('edge_file')
        self.convention = data['convention']
        self.alphas = [float(a) for a in data['alphas']]
        self.initial_node = data['initial_node']
        self.dephasing_rate = float(data['dephasing_rate'])
        self.t_min = float(data['t_min'])
        self.t_max = float(data['t_max'])
        self.points_per_decade = int(data['points_per_decade'])
        self.rtol = float(data['rtol'])
        self.atol = float(data['atol'])
        self.fit_mode = data['fit_mode']
        self.window_lo = data.get('window_lo')
        self.window_hi = data.get('window_hi')
        self.min_decades = float(data['min_decades'])
        self.saturation_margin = float(data['saturation_margin'])
        self.transient_time = float(data['transient_time'])
        self.output_dir = Path(data['output_dir'])
        self.seed = data.get('seed')  # reserved; runs are deterministic
        self.workers = int(data['workers'])

    # =========================================================================
    # CONSTRUCTION
    # =========================================================================

    @classmethod
    def fromSources(cls, config_file=None, overrides=None, base=None):
        """
        Layer defaults, environment, TOML file and CLI overrides.

        Args:
            config_file (str|Path|None): TOML experiment file.
            overrides (dict|None): Flag values; None entries are ignored.
            base (dict|None): Replaces the built-in defaults (figure presets).

        Returns:
            ExperimentConfig
        """
        data = get_run_defaults()
        if base:
            data.update(base)
        if config_file:
            data.update(load_experiment_file(config_file))
        for key, value in (overrides or {}).items():
            if value is not None:
                data[key] = value
        if data.get('topology') == 'sierpinski' and data.get('generation') is None:
            data['generation'] = 5

        # fixed windows default to the regime used for the reference figures
        if data.get('fit_mode') in ('fixed', 'both') and data.get('topology') in REFERENCE_WINDOWS:
            lo, hi = REFERENCE_WINDOWS[data['topology']]
            if data.get('window_lo') is None:
                data['window_lo'] = lo
            if data.get('window_hi') is None:
                data['window_hi'] = hi
        return cls(data)

    def toDict(self):
        """Flat dictionary echo, used for run metadata and for copies."""
        return {
            'topology': self.topology,
            'size': self.size,
            'generation': self.generation,
            'edge_file': self.edge_file,
            'convention': self.convention,
            'alphas': list(self.alphas),
            'initial_node': self.initial_node,
            'dephasing_rate': self.dephasing_rate,
            't_min': self.t_min,
            't_max': self.t_max,
            'points_per_decade': self.points_per_decade,
            'rtol': self.rtol,
            'atol': self.atol,
            'fit_mode': self.fit_mode,
            'window_lo': self.window_lo,
            'window_hi': self.window_hi,
            'min_decades': self.min_decades,
            'saturation_margin': self.saturation_margin,
            'transient_time': self.transient_time,
            'output_dir': str(self.output_dir),
            'seed': self.seed,
            'workers': self.workers,
        }

    def withChanges(self, **changes):
        """Copy with some fields replaced (re-validated)."""
        data = self.toDict()
        data.update(changes)
        return ExperimentConfig(data, max_generation=self.max_generation)

    # =========================================================================
    # MODEL BUILDERS
    # =========================================================================

    def buildNetwork(self):
        if self.topology == 'sierpinski':
            return make_sierpinski(self.generation, max_generation=self.max_generation)
        if self.topology == 'dimer':
            return make_chain(2)
        if self.topology == 'custom':
            return load_edge_list(self.edge_file, max_generation=self.max_generation)
        return make_chain(self.size)

    def buildGrid(self):
        return TimeGrid(t_min=self.t_min, t_max=self.t_max, points_per_decade=self.points_per_decade)

    def fixedWindow(self):
        if self.fit_mode == 'auto':
            return None
        return FitWindow(float(self.window_lo), float(self.window_hi))


# =============================================================================
# PER-ALPHA RESULTS
# =============================================================================

@dataclass
class AlphaOutcome:
    """
    Everything one alpha produced. Plain data so it crosses process boundaries.

    Attributes:
        alpha (float): Interpolation weight.
        trace_rows (list): (t, entropy, return_prob) rows, t = 0 first.
        fits (dict): 'fixed' / 'auto' -> FitResult or None.
        statuses (dict): 'fixed' / 'auto' -> 'ok' or the error text.
        n_steps (int): Accepted integrator steps.
        wall_time (float): Seconds spent on this alpha.
    """
    alpha: float
    trace_rows: list = field(default_factory=list)
    fits: dict = field(default_factory=dict)
    statuses: dict = field(default_factory=dict)
    n_steps: int = 0
    wall_time: float = 0.0

    @property
    def failed(self):
        return any(status != STATUS_OK for status in self.statuses.values())


def _error_status(error):
    return f"{type(error).__name__}: {error}"


def _fit_modes(fit_mode):
    return {'fixed': ('fixed',), 'auto': ('auto',), 'both': ('fixed', 'auto')}[fit_mode]


def fit_trace(trace, cfg):
    """
    Fit a trace in every mode the configuration asks for.

    Returns:
        tuple: (fits dict, statuses dict) keyed by 'fixed' / 'auto'.
    """
    fits, statuses = {}, {}
    for mode in _fit_modes(cfg.fit_mode):
        try:
            if mode == 'fixed':
                window = cfg.fixedWindow()
            else:
                window = auto_window(trace, min_decades=cfg.min_decades,
                                     saturation_margin=cfg.saturation_margin,
                                     transient_time=cfg.transient_time)
            fits[mode] = fit_information_dimension(trace, window)
            statuses[mode] = STATUS_OK
        except NumericalError as e:
            fits[mode] = None
            statuses[mode] = _error_status(e)
            logger.warning("[FIT] alpha=%s (%s window) failed: %s", trace.alpha, mode, e)
    return fits, statuses


def _run_alpha(cfg, network, initial_node, alpha):
    """
    Propagate, measure and fit one alpha. Module level so a process pool can
    pickle it; numerical failures are captured in the outcome.
    """
    started = time.perf_counter()
    outcome = AlphaOutcome(alpha=alpha)
    h = hamiltonian(network, cfg.convention)
    params = QswParams(alpha=alpha, hamiltonian=h, rates=golden_rule_rates(h),
                       initial_node=initial_node, dephasing_rate=cfg.dephasing_rate)
    try:
        traj = propagate(params, cfg.buildGrid(), rtol=cfg.rtol, atol=cfg.atol,
                         network_tag=network.describe())
        trace = entropy_trace(traj)
        returns = return_probability(traj)
    except NumericalError as e:
        logger.error("[SCAN] alpha=%s propagation failed: %s", alpha, e)
        status = _error_status(e)
        outcome.statuses = {mode: status for mode in _fit_modes(cfg.fit_mode)}
        outcome.fits = {mode: None for mode in _fit_modes(cfg.fit_mode)}
        outcome.wall_time = time.perf_counter() - started
        return outcome

    entropies = [trace.value_at_zero] + list(trace.values)
    outcome.trace_rows = [(float(t), float(s), float(p))
                          for (t, p), s in zip(returns, entropies)]
    outcome.fits, outcome.statuses = fit_trace(trace, cfg)
    outcome.n_steps = traj.n_steps
    outcome.wall_time = time.perf_counter() - started
    logger.info("[SCAN] alpha=%s done in %.1fs (%d steps)", alpha, outcome.wall_time, traj.n_steps)
    return outcome


# =============================================================================
# SCANS
# =============================================================================

@dataclass
class ScanReport:
    """Result of run_scan: outcomes in alpha order plus the files written."""
    config: ExperimentConfig
    network_label: str
    n_nodes: int
    initial_node: int
    outcomes: list
    files: dict
    wall_time: float

    @property
    def failed(self):
        return [o.alpha for o in self.outcomes if o.failed]

    def fitFor(self, alpha, mode=None):
        mode = mode or _fit_modes(self.config.fit_mode)[0]
        for outcome in self.outcomes:
            if outcome.alpha == alpha:
                return outcome.fits.get(mode)
        return None


def _summary_row(outcome, mode):
    fit = outcome.fits.get(mode)
    status = outcome.statuses.get(mode, STATUS_OK)
    if fit is None:
        return [outcome.alpha, None, None, None, None, None, None, status]
    return [outcome.alpha, fit.d_info, fit.intercept, fit.r_squared,
            fit.window.t_lo, fit.window.t_hi, fit.n_points, status]


def _versions():
    return {
        'qsw_app': __version__,
        'python': platform.python_version(),
        'numpy': np.__version__,
        'scipy': scipy.__version__,
        'networkx': networkx.__version__,
    }


def check_saturation_time(cfg, network):
    """
    Slowest classical relaxation time of the network. Warns when the grid
    ends before 10 of them, since the entropy is then not expected to reach
    ln N within 1%.
    """
    tau = relaxation_time(golden_rule_rates(hamiltonian(network, cfg.convention)))
    if cfg.t_max < SATURATION_RELAXATION_TIMES * tau:
        logger.warning("[SCAN] t_max=%g is shorter than %d relaxation times (1/|lambda_2| = %.4g); "
                       "traces may stop short of ln N", cfg.t_max, SATURATION_RELAXATION_TIMES, tau)
    return tau


def _write_metadata(out, cfg, network, initial_node, outcomes, wall_time):
    metadata = {
        'config': dict(cfg.toDict(), alphas=[o.alpha for o in outcomes]),
        'network': network.describe(),
        'n_nodes': network.n_nodes,
        'initial_node': initial_node,
        'relaxation_time': check_saturation_time(cfg, network),
        'versions': _versions(),
        'wall_time_seconds': round(wall_time, 3),
        'per_alpha': [{'alpha': o.alpha, 'n_steps': o.n_steps,
                       'wall_time_seconds': round(o.wall_time, 3)} for o in outcomes],
    }
    return helpers.write_json(out / 'run_metadata.json', metadata)


def run_scan(cfg, output_dir=None):
    """
    Run every alpha of the configuration and write the scan outputs.

    Args:
        cfg (ExperimentConfig): Validated configuration.
        output_dir (str|Path|None): Overrides cfg.output_dir.

    Returns:
        ScanReport
    """
    started = time.perf_counter()
    out = Path(output_dir) if output_dir is not None else cfg.output_dir
    network = cfg.buildNetwork()
    initial_node = helpers.resolve_initial_node(network, cfg.initial_node)
    label = network.describe()
    logger.info("[SCAN] %s start=%d convention=%s alphas=%s workers=%d",
                label, initial_node, cfg.convention, cfg.alphas, cfg.workers)

    if cfg.workers > 1 and len(cfg.alphas) > 1:
        with ProcessPoolExecutor(max_workers=min(cfg.workers, len(cfg.alphas))) as pool:
            outcomes = list(pool.map(_run_alpha, [cfg] * len(cfg.alphas), [network] * len(cfg.alphas),
                                     [initial_node] * len(cfg.alphas), cfg.alphas))
    else:
        outcomes = [_run_alpha(cfg, network, initial_node, alpha) for alpha in cfg.alphas]

    files = {}
    for outcome in outcomes:
        name = f"trace_alpha_{helpers.alpha_label(outcome.alpha)}.csv"
        files[name] = helpers.write_csv(out / name, TRACE_HEADER, outcome.trace_rows)

    modes = _fit_modes(cfg.fit_mode)
    files['summary.csv'] = helpers.write_csv(out / 'summary.csv', SUMMARY_HEADER,
                                             [_summary_row(o, modes[0]) for o in outcomes])
    if len(modes) > 1:
        files['summary_auto.csv'] = helpers.write_csv(out / 'summary_auto.csv', SUMMARY_HEADER,
                                                      [_summary_row(o, 'auto') for o in outcomes])

    wall_time = time.perf_counter() - started
    files['run_metadata.json'] = _write_metadata(out, cfg, network, initial_node, outcomes, wall_time)

    report = ScanReport(config=cfg, network_label=label, n_nodes=network.n_nodes,
                        initial_node=initial_node, outcomes=outcomes, files=files, wall_time=wall_time)
    if report.failed:
        logger.warning("[SCAN] %d alpha value(s) failed: %s", len(report.failed), report.failed)
    logger.info("[SCAN] Finished %s in %.1fs, outputs in %s", label, wall_time, out)
    return report


def run_single(cfg, alpha, output_dir=None):
    """One-alpha scan (the `run` subcommand)."""
    error = validators.validate_alpha(alpha, allow_zero=True)
    if error:
        raise ConfigError(error)
    if alpha == 0:
        # alpha = 0 is a valid walk (pure states) but has no information dimension
        return _run_pure(cfg, output_dir)
    return run_scan(cfg.withChanges(alphas=[alpha]), output_dir=output_dir)


def _run_pure(cfg, output_dir=None):
    """Propagate the coherent walk and write its trace; no fit is attempted."""
    started = time.perf_counter()
    out = Path(output_dir) if output_dir is not None else cfg.output_dir
    network = cfg.buildNetwork()
    initial_node = helpers.resolve_initial_node(network, cfg.initial_node)
    h = hamiltonian(network, cfg.convention)
    params = QswParams(alpha=0.0, hamiltonian=h, rates=golden_rule_rates(h),
                       initial_node=initial_node, dephasing_rate=cfg.dephasing_rate)
    outcome = AlphaOutcome(alpha=0.0)
    try:
        traj = propagate(params, cfg.buildGrid(), rtol=cfg.rtol, atol=cfg.atol,
                         network_tag=network.describe())
        trace = entropy_trace(traj)
        entropies = [trace.value_at_zero] + list(trace.values)
        outcome.trace_rows = [(float(t), float(s), float(p))
                              for (t, p), s in zip(return_probability(traj), entropies)]
        outcome.n_steps = traj.n_steps
        outcome.statuses = {'none': STATUS_OK}
    except NumericalError as e:
        outcome.statuses = {'none': _error_status(e)}
    outcome.wall_time = time.perf_counter() - started
    files = {'trace_alpha_0.csv': helpers.write_csv(out / 'trace_alpha_0.csv', TRACE_HEADER,
                                                     outcome.trace_rows)}
    files['run_metadata.json'] = _write_metadata(out, cfg, network, initial_node, [outcome],
                                                 outcome.wall_time)
    return ScanReport(config=cfg, network_label=network.describe(), n_nodes=network.n_nodes,
                      initial_node=initial_node, outcomes=[outcome], files=files,
                      wall_time=outcome.wall_time)


# =============================================================================
# FIGURE DATA
# =============================================================================

def _figure_config(which, config_file=None, overrides=None):
    base = dict(FIGURES[which])
    base['alphas'] = list(FIGURE_ALPHAS)
    return ExperimentConfig.fromSources(config_file=config_file, overrides=overrides, base=base)


def _write_figure_traces(path, report):
    rows = []
    for outcome in report.outcomes:
        rows.extend((outcome.alpha, t, s) for t, s, _ in outcome.trace_rows)
    return helpers.write_csv(path, FIGURE_TRACE_HEADER, rows)


def figure_data(which, config_file=None, overrides=None):
    """
    Produce the data behind the entropy and dimension figures.

    Args:
        which (str): 'fig1a' (chain N=100 traces), 'fig1b' (gasket g=5
                     traces) or 'fig2' (d_I(alpha) for both networks).
        config_file (str|Path|None): TOML file applied on top of the preset.
        overrides (dict|None): CLI overrides applied last.

    Returns:
        dict: Figure file name -> path, plus the scan reports under 'reports'.
    """
    if which not in ('fig1a', 'fig1b', 'fig2'):
        raise ConfigError(f"Unknown figure '{which}' (expected fig1a, fig1b or fig2)")
    panels = ('fig1a', 'fig1b') if which == 'fig2' else (which,)

    files, reports = {}, {}
    for panel in panels:
        cfg = _figure_config(panel, config_file, overrides)
        report = run_scan(cfg, output_dir=cfg.output_dir / panel)
        reports[panel] = report
        if which != 'fig2':
            name = f"{panel}.csv"
            files[name] = _write_figure_traces(cfg.output_dir / name, report)

    if which == 'fig2':
        rows = []
        for panel, report in reports.items():
            mode = _fit_modes(report.config.fit_mode)[-1]
            for outcome in report.outcomes:
                fit = outcome.fits.get(mode)
                status = outcome.statuses.get(mode, STATUS_OK)
                if fit is None:
                    rows.append([report.config.topology, outcome.alpha, None, None, None, None, status])
                else:
                    rows.append([report.config.topology, outcome.alpha, fit.d_info, fit.r_squared,
                                 fit.window.t_lo, fit.window.t_hi, status])
        out = reports['fig1a'].config.output_dir
        files['fig2.csv'] = helpers.write_csv(out / 'fig2.csv', FIGURE_DIMENSION_HEADER, rows)

    files['reports'] = reports
    return files


# =============================================================================
# RE-FIT
# =============================================================================

def _alpha_from_name(path):
    stem = Path(path).stem
    prefix = 'trace_alpha_'
    if stem.startswith(prefix):
        try:
            return float(stem[len(prefix):])
        except ValueError:
            pass
    return float('nan')


def refit_trace(path, window=None, n_nodes=None, alpha=None, min_decades=0.7,
                saturation_margin=0.9, transient_time=1.0):
    """
    Fit d_I on an existing trace CSV (the `fit` subcommand).

    Args:
        path (str|Path): trace_alpha_<alpha>.csv written by a scan.
        window (FitWindow|None): Fixed window; None selects auto_window.
        n_nodes (int|None): Network size; read from run_metadata.json next to
                            the trace when not given.
        alpha (float|None): Label; parsed from the file name when not given.

    Returns:
        FitResult
    """
    path = Path(path)
    header, rows = helpers.read_csv(path)
    if header[:2] != TRACE_HEADER[:2]:
        raise ConfigError(f"{path} does not look like a trace file (header {header})")
    try:
        data = [(float(r['t']), float(r['entropy'])) for r in rows]
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Malformed trace file {path}: {e}")
    data = [(t, s) for t, s in data if t > 0]

    if n_nodes is None:
        metadata_path = path.parent / 'run_metadata.json'
        if metadata_path.exists():
            n_nodes = json.loads(metadata_path.read_text()).get('n_nodes')
    if n_nodes is None:
        if window is None:
            raise ConfigError("Automatic windows need the network size (--n-nodes or run_metadata.json)")
        # smallest network size consistent with the recorded entropies
        n_nodes = max(2, math.ceil(math.exp(max(s for _, s in data)) - 1e-9))

    trace = EntropyTrace(times=[t for t, _ in data], values=[s for _, s in data], kind='von_neumann',
                         alpha=_alpha_from_name(path) if alpha is None else alpha,
                         network_tag=path.stem, n_nodes=int(n_nodes))
    if window is None:
        window = auto_window(trace, min_decades=min_decades, saturation_margin=saturation_margin,
                             transient_time=transient_time)
    return fit_information_dimension(trace, window)
