"""
Validation utilities for simulation inputs across qsw_app.
Provides consistent validation across modules and centralizes rules.

All validation logic should go through this module to ensure:
1. Consistent error messages
2. Single source of truth for parameter ranges
3. Easy testing of validation logic

Every validate_* function returns an error message or None if valid.
Callers collect the messages and raise ConfigError when the list is not empty.
"""

import math
import numbers

# Valid enumerations
TOPOLOGIES = ('chain', 'sierpinski', 'dimer', 'custom')
CONVENTIONS = ('laplacian', 'adjacency')
FIT_MODES = ('fixed', 'auto', 'both')
SYMBOLIC_NODES = ('center', 'corner')

# Smallest accepted width of a fit window, t_hi / t_lo
MIN_WINDOW_RATIO = 3.0

# ================================
# Scalar helpers
# ================================

def _is_integer(value):
    return isinstance(value, numbers.Integral) and not isinstance(value, bool)


def _is_real(value):
    return isinstance(value, numbers.Real) and not isinstance(value, bool) and math.isfinite(value)


# ================================
# Network methods
# ================================

def validate_chain_length(n):
    """
    Validate the node count of a linear chain.
    A 1-node graph has no dynamics, so at least 2 nodes are required.
    """
    if not _is_integer(n):
        return "Chain length must be an integer"
    if n < 2:
        return f"Chain length must be at least 2 (got {n})"
    return None


def validate_generation(g, max_generation=8):
    """
    Validate a Sierpinski gasket generation against the configured limit.
    """
    if not _is_integer(g):
        return "Gasket generation must be an integer"
    if g < 1:
        return f"Gasket generation must be at least 1 (got {g})"
    if g > max_generation:
        return f"Gasket generation {g} exceeds the limit of {max_generation}"
    return None


def validate_edges(n_nodes, edges):
    """
    Validate an edge set: integer endpoints inside [0, n_nodes), no self-loops,
    no duplicates (either orientation).
    """
    if not _is_integer(n_nodes) or n_nodes < 1:
        return "Node count must be a positive integer"

    seen = set()
    for edge in edges:
        if len(edge) != 2:
            return f"Edge {edge!r} must have exactly two endpoints"
        i, j = edge
        if not (_is_integer(i) and _is_integer(j)):
            return f"Edge {edge!r} has non-integer endpoints"
        if i == j:
            return f"Self-loop on node {i} is not allowed"
        if not (0 <= i < n_nodes and 0 <= j < n_nodes):
            return f"Edge {edge!r} references a node outside 0..{n_nodes - 1}"
        key = (min(i, j), max(i, j))
        if key in seen:
            return f"Duplicate edge {key!r}"
        seen.add(key)
    return None


def validate_topology(tag):
    if tag not in TOPOLOGIES:
        return f"Unknown topology '{tag}' (expected one of {', '.join(TOPOLOGIES)})"
    return None


def validate_convention(convention):
    if convention not in CONVENTIONS:
        return f"Unknown Hamiltonian convention '{convention}' (expected laplacian or adjacency)"
    return None


def validate_node_index(node, n_nodes):
    """Validate a node index against the network size."""
    if not _is_integer(node):
        return f"Node index must be an integer (got {node!r})"
    if not 0 <= node < n_nodes:
        return f"Node {node} does not exist (network has {n_nodes} nodes)"
    return None


def validate_initial_node(value):
    """
    Validate the symbolic or numeric initial node before the network exists.
    Range checks happen later through validate_node_index.
    """
    if value in SYMBOLIC_NODES:
        return None
    if _is_integer(value) and value >= 0:
        return None
    return f"Initial node must be 'center', 'corner' or a non-negative index (got {value!r})"


# ================================
# Dynamics methods
# ================================

def validate_alpha(alpha, allow_zero=True):
    """
    Validate the QSW interpolation weight.
    Propagation accepts alpha in [0, 1]; scans require (0, 1] because the
    information dimension is undefined at alpha = 0.
    """
    if not _is_real(alpha):
        return f"Alpha must be a real number (got {alpha!r})"
    if alpha > 1 or alpha < 0 or (alpha == 0 and not allow_zero):
        interval = "[0, 1]" if allow_zero else "(0, 1]"
        return f"Alpha must lie in {interval} (got {alpha})"
    return None


def validate_alpha_list(alphas):
    """Validate a scan grid: non-empty, values in (0, 1], strictly increasing."""
    if not alphas:
        return "Alpha list must not be empty"
    for alpha in alphas:
        error = validate_alpha(alpha, allow_zero=False)
        if error:
            return error
    for lo, hi in zip(alphas, alphas[1:]):
        if not hi > lo:
            return f"Alpha list must be strictly increasing ({lo} then {hi})"
    return None


def validate_nonnegative(value, field_name):
    if not _is_real(value) or value < 0:
        return f"{field_name} must be a non-negative real number (got {value!r})"
    return None


def validate_positive(value, field_name):
    if not _is_real(value) or value <= 0:
        return f"{field_name} must be a positive real number (got {value!r})"
    return None


# ================================
# Grid, solver and fit methods
# ================================

def validate_time_range(t_min, t_max):
    error = validate_positive(t_min, "t_min")
    if error:
        return error
    error = validate_positive(t_max, "t_max")
    if error:
        return error
    if not t_max > t_min:
        return f"t_max ({t_max}) must be larger than t_min ({t_min})"
    return None


def validate_points_per_decade(value):
    if not _is_integer(value) or value < 1:
        return f"points_per_decade must be a positive integer (got {value!r})"
    return None


def validate_window(t_lo, t_hi):
    """
    Validate a fit window. At least half a decade (t_hi / t_lo >= 3) is
    required; shorter windows give unstable slopes.
    """
    error = validate_time_range(t_lo, t_hi)
    if error:
        return error.replace("t_min", "window_lo").replace("t_max", "window_hi")
    if t_hi / t_lo < MIN_WINDOW_RATIO:
        return f"Fit window [{t_lo}, {t_hi}] is narrower than t_hi/t_lo = {MIN_WINDOW_RATIO:g}"
    return None


def validate_fit_mode(mode):
    if mode not in FIT_MODES:
        return f"Unknown fit mode '{mode}' (expected one of {', '.join(FIT_MODES)})"
    return None


def validate_fraction(value, field_name):
    if not _is_real(value) or not 0 < value <= 1:
        return f"{field_name} must lie in (0, 1] (got {value!r})"
    return None


def validate_workers(value):
    if not _is_integer(value) or value < 1:
        return f"workers must be a positive integer (got {value!r})"
    return None


def validate_all_experiment_fields(data, max_generation=8):
    """
    Validate all experiment configuration fields at once.
    Returns list of error messages (empty if all valid).

    Args:
        data (dict): Flat configuration dictionary (see ExperimentConfig).
        max_generation (int): Largest accepted gasket generation.
    """
    errors = []

    def check(error):
        if error:
            errors.append(error)

    topology = data.get('topology')
    check(validate_topology(topology))
    if topology == 'chain':
        check(validate_chain_length(data.get('size')))
    elif topology == 'sierpinski':
        check(validate_generation(data.get('generation'), max_generation))
    elif topology == 'custom' and not data.get('edge_file'):
        errors.append("Custom topology requires an edge_file")

    check(validate_convention(data.get('convention')))
    check(validate_alpha_list(list(data.get('alphas') or [])))
    if data.get('initial_node') is not None:  # None picks the topology default
        check(validate_initial_node(data['initial_node']))
    check(validate_nonnegative(data.get('dephasing_rate'), "dephasing_rate"))
    check(validate_time_range(data.get('t_min'), data.get('t_max')))
    check(validate_points_per_decade(data.get('points_per_decade')))
    check(validate_positive(data.get('rtol'), "rtol"))
    check(validate_positive(data.get('atol'), "atol"))

    mode = data.get('fit_mode')
    check(validate_fit_mode(mode))
    if mode in ('fixed', 'both'):
        check(validate_window(data.get('window_lo'), data.get('window_hi')))
    check(validate_positive(data.get('min_decades'), "min_decades"))
    check(validate_fraction(data.get('saturation_margin'), "saturation_margin"))
    check(validate_positive(data.get('transient_time'), "transient_time"))
    check(validate_workers(data.get('workers')))

    return errors
