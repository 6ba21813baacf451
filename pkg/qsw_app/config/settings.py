"""
==============================================================================
Settings - environment defaults and experiment-file loading
==============================================================================

Two sources feed an ExperimentConfig before any CLI flag is applied:

    - Environment variables (optionally from a .env file, loaded by the
      package init through python-dotenv): output directory, worker count,
      log level, gasket size limit and integrator tolerances.
    - A TOML experiment file whose sections mirror ExperimentConfig.

Precedence (highest first): CLI flag > TOML file > environment > default.
Both loaders return FLAT dictionaries keyed like ExperimentConfig fields so
the controller can merge them with a plain dict update.
"""

import logging
import os

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from qsw_app.utils.errors import ConfigError

logger = logging.getLogger(__name__)

# =============================================================================
# BUILT-IN DEFAULTS
# =============================================================================

# Alpha grid covering every value quoted for the entropy figures, plus fill
FIGURE_ALPHAS = (0.05, 0.1, 0.2, 0.4, 0.6, 0.8, 1.0)

DEFAULTS = {
    'topology': 'chain',
    'size': 100,
    'generation': None,
    'edge_file': None,
    'convention': 'laplacian',
    'alphas': list(FIGURE_ALPHAS),
    'initial_node': None,      # center on chains, corner on gaskets
    'dephasing_rate': 1.0,
    't_min': 1e-2,
    't_max': 1e3,
    'points_per_decade': 20,
    'rtol': 1e-8,
    'atol': 1e-10,
    'fit_mode': 'auto',
    'window_lo': None,
    'window_hi': None,
    'min_decades': 0.7,
    'saturation_margin': 0.9,
    'transient_time': 1.0,
    'output_dir': 'results',
    'seed': None,
    'workers': 1,
}

# Start node used when none is configured
DEFAULT_INITIAL_NODES = {
    'chain': 'center',
    'dimer': 'center',
    'sierpinski': 'corner',
    'custom': 'center',
}

# Fixed windows where the logarithmic regime was fitted for alpha >= 0.2
REFERENCE_WINDOWS = {
    'chain': (10.0, 100.0),
    'sierpinski': (1.0, 10.0),
}

# TOML section -> {toml key: config field}
TOML_SECTIONS = {
    'network': {'topology': 'topology', 'size': 'size', 'generation': 'generation',
                'convention': 'convention', 'edge_file': 'edge_file'},
    'scan': {'alphas': 'alphas', 'initial_node': 'initial_node',
             'dephasing_rate': 'dephasing_rate', 'workers': 'workers', 'seed': 'seed'},
    'grid': {'t_min': 't_min', 't_max': 't_max', 'points_per_decade': 'points_per_decade'},
    'solver': {'rtol': 'rtol', 'atol': 'atol'},
    'fit': {'mode': 'fit_mode', 'window_lo': 'window_lo', 'window_hi': 'window_hi',
            'min_decades': 'min_decades', 'saturation_margin': 'saturation_margin',
            'transient_time': 'transient_time'},
    'output': {'directory': 'output_dir'},
}


# =============================================================================
# ENVIRONMENT
# =============================================================================

def _get_number_env(name, default, cast):
    """
    Read a numeric environment variable, falling back to the default (with a
    warning) when the value cannot be parsed.
    """
    raw = os.environ.get(name)
    if raw is None or raw.strip() == '':
        return default
    try:
        return cast(raw)
    except ValueError:
        logger.warning("Invalid value for %s (%s), falling back to default %s", name, raw, default)
        return default


def get_env_settings():
    """
    Package-level settings taken from the environment.

    Returns:
        dict: output_dir, workers, log_level, max_generation, rtol, atol
    """
    return {
        'output_dir': os.environ.get('QSW_OUTPUT_DIR', DEFAULTS['output_dir']),
        'workers': _get_number_env('QSW_WORKERS', DEFAULTS['workers'], int),
        'log_level': os.environ.get('QSW_LOG_LEVEL', 'INFO').upper(),
        'max_generation': _get_number_env('QSW_MAX_GENERATION', 8, int),
        'rtol': _get_number_env('QSW_RTOL', DEFAULTS['rtol'], float),
        'atol': _get_number_env('QSW_ATOL', DEFAULTS['atol'], float),
    }


def get_run_defaults(env=None):
    """
    Built-in defaults overlaid with the environment-controlled fields.

    Args:
        env (dict|None): Result of get_env_settings(); read fresh when None.

    Returns:
        dict: Flat configuration dictionary.
    """
    env = get_env_settings() if env is None else env
    data = dict(DEFAULTS)
    data['alphas'] = list(DEFAULTS['alphas'])
    for key in ('output_dir', 'workers', 'rtol', 'atol'):
        data[key] = env[key]
    return data


# =============================================================================
# TOML EXPERIMENT FILES
# =============================================================================

def load_experiment_file(path):
    """
    Parse a TOML experiment file into a flat configuration dictionary.

    Only keys that appear in the file are returned, so the result can be
    layered over the defaults. Unknown sections or keys are configuration
    errors rather than being silently ignored.

    Args:
        path (str|Path): TOML file location.

    Returns:
        dict: Flat configuration fields present in the file.
    """
    try:
        with open(path, 'rb') as handle:
            document = tomllib.load(handle)
    except FileNotFoundError:
        raise ConfigError(f"Experiment file not found: {path}")
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"Experiment file {path} is not valid TOML: {e}")

    flat = {}
    errors = []
    for section, table in document.items():
        mapping = TOML_SECTIONS.get(section)
        if mapping is None or not isinstance(table, dict):
            errors.append(f"Unknown section [{section}] in {path}")
            continue
        for key, value in table.items():
            if key not in mapping:
                errors.append(f"Unknown key '{key}' in section [{section}]")
                continue
            flat[mapping[key]] = value
    if errors:
        raise ConfigError(errors)

    logger.debug("[CONFIG] Loaded %d field(s) from %s", len(flat), path)
    return flat
