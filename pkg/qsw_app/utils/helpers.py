"""
Shared helper functions for node resolution and CSV output.
"""

import csv
import json
from pathlib import Path

from qsw_app.models.networkModels import center_node
from qsw_app.utils import validators
from qsw_app.utils.errors import ConfigError

# ============================================================================
# NODE HELPERS
# ============================================================================

def resolve_initial_node(net, value):
    """
    Turn a symbolic or numeric start node into an index.

    - 'center': floor(N/2) on a chain, otherwise the lowest-index node of
      the graph center (minimal eccentricity)
    - 'corner': first recorded corner (chain end, gasket apex)
    - integer: used as given

    Returns:
        int: Node index valid for net.
    """
    if value == 'center':
        if net.topology_tag in ('chain', 'dimer'):
            return net.n_nodes // 2
        return center_node(net)
    if value == 'corner':
        if not net.corners:
            raise ConfigError(f"Network {net.describe()} has no recorded corner nodes")
        return net.corners[0]

    error = validators.validate_initial_node(value) or validators.validate_node_index(value, net.n_nodes)
    if error:
        raise ConfigError(error)
    return value


# ============================================================================
# CSV HELPERS
# ============================================================================

def format_float(value):
    """17 significant digits, so CSV bodies round-trip and diff byte for byte."""
    return format(float(value), '.17g')


def format_cell(value):
    if value is None:
        return ''
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def write_csv(path, header, rows):
    """
    Write a CSV file with a fixed header and '\\n' line endings.

    Args:
        path (str|Path): Destination.
        header (list[str]): Column names.
        rows (iterable): Row sequences; floats are written with format_float.

    Returns:
        Path: The written path.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', encoding='utf-8', newline='') as handle:
        writer = csv.DictWriter(handle, fieldnames=header, extrasaction='ignore', lineterminator='\n')
        writer.writeheader()
        for row in rows:
            writer.writerow({name: format_cell(value) for name, value in zip(header, row)})
    return path


def read_csv(path):
    """
    Read a CSV file written by write_csv.

    Returns:
        tuple: (header list, list of row dicts with string values)
    """
    path = Path(path)
    try:
        with path.open(encoding='utf-8', newline='') as handle:
            reader = csv.DictReader(handle)
            rows = list(reader)
            return list(reader.fieldnames or []), rows
    except FileNotFoundError:
        raise ConfigError(f"File not found: {path}")


def write_json(path, data):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True, default=str) + "\n")
    return path


def alpha_label(alpha):
    """File-name friendly alpha, e.g. 0.05 -> '0.05', 1.0 -> '1'."""
    return format(float(alpha), 'g')
