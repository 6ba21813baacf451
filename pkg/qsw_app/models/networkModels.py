"""
==============================================================================
Network Model - network topologies, walk Hamiltonians and hopping rates
==============================================================================

This module builds the networks the walks run on (linear chains, the dimer,
Sierpinski gaskets and custom edge lists), the network Hamiltonian H0 and the
incoherent hopping rates derived from it with Fermi's golden rule.

Node Indexing (bit-reproducible):
    - chain: path order 0..N-1
    - sierpinski: lexicographic by exact integer coordinates (x2, y), where
      x2 is twice the horizontal coordinate and y the row, both in units of
      the smallest triangle so every midpoint is an integer
    - custom: as given in the edge list

Hamiltonian Conventions:
    - laplacian (default): degree on the diagonal, -1 per edge
    - adjacency: +1 per edge, zero diagonal
    Both yield rate 1 per edge under the golden rule, so the classical limit
    does not depend on the convention.

Class Relationships:
    - Network --builds-- HermitianMatrix (hamiltonian)
    - HermitianMatrix --builds-- RateMatrix (golden_rule_rates)
    - QswParams (dynamicsModels) holds one HermitianMatrix and one RateMatrix
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import networkx as nx
import numpy as np

from qsw_app.utils import validators
from qsw_app.utils.errors import ConfigError

# =============================================================================
# MODULE CONSTANTS
# =============================================================================

HERMITIAN_ATOL = 1e-12
DEFAULT_MAX_GENERATION = 8


def sierpinski_node_count(g):
    """Closed-form node count of a generation-g gasket: 3(3^(g-1) + 1) / 2."""
    return 3 * (3 ** (g - 1) + 1) // 2


def sierpinski_edge_count(g):
    return 3 ** g


# =============================================================================
# DOMAIN TYPES
# =============================================================================

@dataclass(frozen=True)
class Network:
    """
    Undirected, unweighted, connected graph with generator metadata.
    Edges are stored as sorted (i, j) pairs with i < j.
    """
    n_nodes: int
    edges: tuple
    topology_tag: str = 'custom'
    generation: Optional[int] = None
    corners: tuple = field(default=())

    def __post_init__(self):
        edges = tuple(sorted((min(i, j), max(i, j)) for i, j in self.edges))
        object.__setattr__(self, 'edges', edges)

        errors = []
        for error in (validators.validate_topology(self.topology_tag),
                      validators.validate_edges(self.n_nodes, edges)):
            if error:
                errors.append(error)
        if errors:
            raise ConfigError(errors)

        if self.topology_tag == 'sierpinski':
            if self.generation is None or self.n_nodes != sierpinski_node_count(self.generation):
                raise ConfigError(f"Sierpinski network of generation {self.generation} "
                                  f"cannot have {self.n_nodes} nodes")
        if self.topology_tag in ('chain', 'dimer'):
            # connected, N-1 edges and max degree 2 is exactly a path
            if len(edges) != self.n_nodes - 1 or (edges and self.getDegrees().max() > 2):
                raise ConfigError(f"Edges on {self.n_nodes} nodes do not form a chain")
        if not self.isConnected():
            raise ConfigError(f"Network '{self.topology_tag}' with {self.n_nodes} nodes is not connected")

    # =========================================================================
    # GRAPH VIEWS
    # =========================================================================

    def toGraph(self):
        """
        Build a networkx view of the network with nodes 0..n_nodes-1.

        Returns:
            nx.Graph: A fresh graph; mutating it does not affect the Network.
        """
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n_nodes))
        graph.add_edges_from(self.edges)
        return graph

    def isConnected(self):
        """Check that a BFS from node 0 reaches every node."""
        reached = nx.single_source_shortest_path_length(self.toGraph(), 0)
        return len(reached) == self.n_nodes

    def getDegrees(self):
        """
        Returns:
            np.ndarray: Degree of every node, in index order.
        """
        degrees = np.zeros(self.n_nodes, dtype=int)
        for i, j in self.edges:
            degrees[i] += 1
            degrees[j] += 1
        return degrees

    def describe(self):
        """Short label used in logs and output metadata."""
        if self.topology_tag == 'sierpinski':
            return f"sierpinski(g={self.generation}, N={self.n_nodes})"
        return f"{self.topology_tag}(N={self.n_nodes})"


def _freeze(array):
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class HermitianMatrix:
    """Dense complex N x N matrix, Hermitian to 1e-12. Houses H0."""
    entries: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1] or entries.shape[0] == 0:
            raise ConfigError(f"Hermitian matrix must be square and non-empty (got shape {entries.shape})")
        deviation = np.max(np.abs(entries - entries.conj().T))
        if deviation > HERMITIAN_ATOL:
            raise ConfigError(f"Matrix is not Hermitian (max deviation {deviation:.3e})")
        object.__setattr__(self, 'entries', _freeze(entries))

    @property
    def dim(self):
        return self.entries.shape[0]


@dataclass(frozen=True, eq=False)
class RateMatrix:
    """
    Incoherent hopping rates, rates[m][n] = rate for n -> m.
    Non-negative, zero diagonal, symmetric.
    """
    rates: np.ndarray

    def __post_init__(self):
        rates = np.asarray(self.rates, dtype=float)
        if rates.ndim != 2 or rates.shape[0] != rates.shape[1] or rates.shape[0] == 0:
            raise ConfigError(f"Rate matrix must be square and non-empty (got shape {rates.shape})")
        if np.any(rates < 0):
            raise ConfigError("Rates must be non-negative")
        if np.any(np.diag(rates) != 0):
            raise ConfigError("Rate matrix must have a zero diagonal")
        if np.max(np.abs(rates - rates.T)) > HERMITIAN_ATOL:
            raise ConfigError("Rate matrix must be symmetric")
        object.__setattr__(self, 'rates', _freeze(rates))

    @property
    def dim(self):
        return self.rates.shape[0]


# =============================================================================
# GENERATORS
# =============================================================================

def make_chain(n):
    """
    Linear chain (path graph) on n nodes with edges (i, i+1).

    Args:
        n (int): Number of nodes, at least 2.

    Returns:
        Network: Tagged 'chain', or 'dimer' for n == 2; endpoints as corners.
    """
    error = validators.validate_chain_length(n)
    if error:
        raise ConfigError(error)
    tag = 'dimer' if n == 2 else 'chain'
    return Network(n_nodes=n, edges=tuple(nx.path_graph(n).edges()),
                   topology_tag=tag, corners=(0, n - 1))


def make_dimer():
    return make_chain(2)


def _midpoint(a, b):
    return ((a[0] + b[0]) // 2, (a[1] + b[1]) // 2)


def make_sierpinski(g, max_generation=None):
    """
    Sierpinski gasket of generation g by recursive midpoint subdivision.

    The outer triangle has corners (0, 0), (2L, 0) and (L, L) with
    L = 2^(g-1); subdividing g-1 times keeps every midpoint on the integer
    lattice, so shared vertices deduplicate exactly by coordinate.

    Args:
        g (int): Generation, 1 is a single triangle.
        max_generation (int|None): Upper limit; defaults to DEFAULT_MAX_GENERATION.

    Returns:
        Network: 3(3^(g-1)+1)/2 nodes, 3^g edges, the three apex nodes as corners.
    """
    limit = DEFAULT_MAX_GENERATION if max_generation is None else max_generation
    error = validators.validate_generation(g, limit)
    if error:
        raise ConfigError(error)

    side = 2 ** (g - 1)
    apexes = ((0, 0), (2 * side, 0), (side, side))
    triangles = [apexes]
    for _ in range(g - 1):
        subdivided = []
        for a, b, c in triangles:
            ab, bc, ca = _midpoint(a, b), _midpoint(b, c), _midpoint(c, a)
            subdivided.extend(((a, ab, ca), (ab, b, bc), (ca, bc, c)))
        triangles = subdivided

    graph = nx.Graph()
    for a, b, c in triangles:
        graph.add_edges_from(((a, b), (b, c), (c, a)))

    index = {point: k for k, point in enumerate(sorted(graph.nodes))}
    edges = tuple((index[p], index[q]) for p, q in graph.edges)
    corners = tuple(sorted(index[p] for p in apexes))
    return Network(n_nodes=len(index), edges=edges, topology_tag='sierpinski',
                   generation=g, corners=corners)


def graph_distances(net, source):
    """
    Hop distance from source to every node (BFS).

    Returns:
        np.ndarray: distances[k] for k in 0..n_nodes-1.
    """
    error = validators.validate_node_index(source, net.n_nodes)
    if error:
        raise ConfigError(error)
    lengths = nx.single_source_shortest_path_length(net.toGraph(), source)
    return np.array([lengths[k] for k in range(net.n_nodes)], dtype=int)


def center_node(net):
    """Lowest-index node of minimal eccentricity (largest hop distance)."""
    eccentricities = [int(graph_distances(net, k).max()) for k in range(net.n_nodes)]
    return int(np.argmin(eccentricities))


# =============================================================================
# HAMILTONIAN AND RATES
# =============================================================================

def hamiltonian(net, convention='laplacian'):
    """
    Network Hamiltonian H0.

    Args:
        net (Network): The network.
        convention (str): 'laplacian' (degree diagonal, -1 per edge) or
                          'adjacency' (+1 per edge, zero diagonal).

    Returns:
        HermitianMatrix: Real symmetric, hence Hermitian.
    """
    error = validators.validate_convention(convention)
    if error:
        raise ConfigError(error)
    graph = net.toGraph()
    nodelist = list(range(net.n_nodes))
    if convention == 'laplacian':
        matrix = nx.laplacian_matrix(graph, nodelist=nodelist).toarray()
    else:
        matrix = nx.to_numpy_array(graph, nodelist=nodelist)
    return HermitianMatrix(matrix.astype(complex))


def golden_rule_rates(h):
    """
    Fermi's golden-rule hopping rates, rates[m][n] = |<m|H0|n>|^2 for m != n,
    with the proportionality constant fixed to 1.

    Returns:
        RateMatrix: Symmetric because |h_mn|^2 = |h_nm|^2.
    """
    rates = np.abs(h.entries) ** 2
    np.fill_diagonal(rates, 0.0)
    return RateMatrix(rates)


# =============================================================================
# EDGE-LIST FILES
# =============================================================================

def export_edge_list(net, path):
    """
    Write the network as an edge list: a header line
    "# nodes=N topology=TAG" followed by one "i j" pair per line.
    """
    path = Path(path)
    lines = [f"# nodes={net.n_nodes} topology={net.topology_tag}"]
    lines.extend(f"{i} {j}" for i, j in net.edges)
    path.write_text("\n".join(lines) + "\n")
    return path


def load_edge_list(path, max_generation=None):
    """
    Read an edge list written by export_edge_list (or hand-written in the same
    format). Gasket files are rebuilt through make_sierpinski so their
    generation and corner metadata are restored; the header node count is
    checked against the generation limit before anything is built.

    Returns:
        Network
    """
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise ConfigError(f"Edge-list file not found: {path}")

    header = {}
    body = []
    for line in text.splitlines():
        stripped = line.strip()
        if stripped.startswith('#'):
            for token in stripped.lstrip('#').split():
                key, _, value = token.partition('=')
                header[key] = value
        elif stripped:
            body.append(stripped)

    try:
        edge_graph = nx.parse_edgelist(body, nodetype=int, data=False)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Malformed edge list in {path}: {e}")
    edges = tuple(edge_graph.edges)
    if 'nodes' in header:
        try:
            n_nodes = int(header['nodes'])
        except ValueError:
            raise ConfigError(f"Malformed node count in {path}: {header['nodes']!r}")
    else:
        n_nodes = max(max(e) for e in edges) + 1 if edges else 0

    tag = header.get('topology', 'custom')
    if tag == 'sierpinski':
        limit = DEFAULT_MAX_GENERATION if max_generation is None else max_generation
        # node count determines the generation uniquely
        g = next((g for g in range(1, limit + 1) if sierpinski_node_count(g) == n_nodes), None)
        if g is None:
            if n_nodes > sierpinski_node_count(limit):
                raise ConfigError(f"{path}: a gasket with {n_nodes} nodes exceeds the generation limit {limit}")
            raise ConfigError(f"{path} is tagged sierpinski but {n_nodes} is not a gasket node count")
        net = make_sierpinski(g, max_generation=limit)
        if net.n_nodes != n_nodes or set(net.edges) != {(min(e), max(e)) for e in edges}:
            raise ConfigError(f"{path} is tagged sierpinski but is not a gasket")
        return net
    if tag in ('chain', 'dimer'):
        return Network(n_nodes=n_nodes, edges=edges, topology_tag=tag, corners=(0, n_nodes - 1))
    return Network(n_nodes=n_nodes, edges=edges, topology_tag=tag)
