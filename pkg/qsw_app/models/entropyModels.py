"""
==============================================================================
Entropy Model - entropy and probability observables of trajectories
==============================================================================

Natural logarithms throughout, so a maximally mixed state on N nodes has
entropy ln N.

The von Neumann entropy is evaluated from the Hermitian eigendecomposition,
S = -sum lambda ln lambda, never through a matrix logarithm: early-time
states are nearly singular. Eigenvalues in [-1e-8, 1e-14] count as zero;
anything below -1e-8 is a genuine positivity violation and raises.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import entr

from qsw_app.models.dynamicsModels import DensityMatrix, classical_generator
from qsw_app.models.trajectoryModels import propagate_classical
from qsw_app.utils.errors import ConfigError, InvariantViolation

# =============================================================================
# MODULE CONSTANTS
# =============================================================================

EIGENVALUE_CUTOFF = 1e-14
EIGENVALUE_FLOOR = -1e-8
PROBABILITY_FLOOR = -1e-12
PROBABILITY_SUM_TOL = 1e-9
ENTROPY_FLOOR = -1e-12
ENTROPY_CEILING_TOL = 1e-9
KINDS = ('von_neumann', 'shannon')


# =============================================================================
# ENTROPY TRACE
# =============================================================================

@dataclass(frozen=True, eq=False)
class EntropyTrace:
    """
    Entropy against time for one walk.

    Only positive times are held in times/values (ln t must exist for the
    fits); the t = 0 value is kept separately for exports.

    Attributes:
        times (np.ndarray): Positive, increasing sample times.
        values (np.ndarray): Entropy at each time, in [0, ln N].
        kind (str): 'von_neumann' or 'shannon'.
        alpha (float): Interpolation weight of the walk.
        network_tag (str): Network label.
        n_nodes (int): Network size; fixes the ln N ceiling.
        value_at_zero (float|None): Entropy at t = 0 (0 for a localized start).
    """
    times: np.ndarray
    values: np.ndarray
    kind: str
    alpha: float
    network_tag: str
    n_nodes: int
    value_at_zero: Optional[float] = None

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if times.shape != values.shape or times.ndim != 1:
            raise ConfigError("Entropy trace needs equally long 1-D time and value arrays")
        if self.kind not in KINDS:
            raise ConfigError(f"Unknown entropy kind '{self.kind}'")
        if times.size and (times[0] <= 0 or np.any(np.diff(times) <= 0)):
            raise ConfigError("Entropy trace times must be positive and strictly increasing")
        ceiling = np.log(self.n_nodes) + ENTROPY_CEILING_TOL
        if values.size and (values.min() < ENTROPY_FLOOR or values.max() > ceiling):
            raise InvariantViolation(f"Entropy values leave [0, ln {self.n_nodes}] "
                                     f"(min {values.min():.3e}, max {values.max():.6f})")
        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, 'times', times)
        object.__setattr__(self, 'values', values)

    @property
    def max_entropy(self):
        return float(np.log(self.n_nodes))

    def rescaled(self, factor):
        """Same trace on the time axis t -> factor * t."""
        return EntropyTrace(times=self.times * factor, values=self.values, kind=self.kind,
                            alpha=self.alpha, network_tag=self.network_tag,
                            n_nodes=self.n_nodes, value_at_zero=self.value_at_zero)


# =============================================================================
# ENTROPIES
# =============================================================================

def von_neumann_entropy(rho):
    """
    S = -tr(rho ln rho) from the eigenvalues of rho.

    Args:
        rho (DensityMatrix|np.ndarray): Hermitian, unit trace.

    Returns:
        float: Non-negative entropy.

    Raises:
        InvariantViolation: An eigenvalue is below -1e-8.
    """
    entries = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho)
    eigenvalues = np.linalg.eigvalsh(entries)
    if eigenvalues[0] < EIGENVALUE_FLOOR:
        raise InvariantViolation(f"Negative eigenvalue {eigenvalues[0]:.3e} in density matrix")
    eigenvalues = np.where(eigenvalues > EIGENVALUE_CUTOFF, eigenvalues, 0.0)
    return float(np.sum(entr(eigenvalues)))


def shannon_entropy(p):
    """
    H = -sum p_k ln p_k with 0 ln 0 = 0.

    Raises:
        InvariantViolation: An entry is below -1e-12 or the sum is not 1.
    """
    p = np.asarray(p, dtype=float)
    if p.size == 0:
        raise ConfigError("Probability vector must not be empty")
    if p.min() < PROBABILITY_FLOOR:
        raise InvariantViolation(f"Negative probability {p.min():.3e}")
    if abs(p.sum() - 1.0) > PROBABILITY_SUM_TOL:
        raise InvariantViolation(f"Probabilities sum to {p.sum():.12f}, not 1")
    return float(np.sum(entr(np.clip(p, 0.0, None))))


# =============================================================================
# TRAJECTORY OBSERVABLES
# =============================================================================

def entropy_trace(traj):
    """
    Von Neumann entropy at every snapshot of a trajectory.

    Args:
        traj (Trajectory): Propagated walk.

    Returns:
        EntropyTrace: kind 'von_neumann'; the t = 0 value is stored as
                      value_at_zero and left out of times/values.
    """
    values = np.array([von_neumann_entropy(state) for state in traj.states])
    samples = traj.grid.samples
    positive = samples > 0
    zero_value = float(values[~positive][0]) if np.any(~positive) else None
    return EntropyTrace(times=samples[positive], values=values[positive], kind='von_neumann',
                        alpha=traj.params.alpha, network_tag=traj.network_tag,
                        n_nodes=traj.n_nodes, value_at_zero=zero_value)


def return_probability(traj):
    """
    Probability to find the walker back on its start node, p_jj(t).

    Returns:
        np.ndarray: Shape (K, 2), columns t and p_jj, t = 0 row included.
    """
    j = traj.initial_node
    values = []
    for state in traj.states:
        entry = state.entries[j, j]
        if abs(entry.imag) > 1e-12:
            raise InvariantViolation(f"Return probability has imaginary part {entry.imag:.3e}")
        values.append(entry.real)
    return np.column_stack((traj.grid.samples, values))


def shannon_trace(T, j, grid, alpha=1.0, network_tag=''):
    """
    Shannon entropy of the classical random walk, the alpha -> 1 oracle.

    Args:
        T (np.ndarray): Classical generator (see classical_generator).
        j (int): Start node.
        grid (TimeGrid): Sample times.
        alpha (float): Label stored on the trace.
        network_tag (str): Label stored on the trace.

    Returns:
        EntropyTrace: kind 'shannon'.
    """
    probabilities = propagate_classical(T, j, grid)
    values = np.array([shannon_entropy(p) for p in probabilities])
    samples = grid.samples
    positive = samples > 0
    return EntropyTrace(times=samples[positive], values=values[positive], kind='shannon',
                        alpha=alpha, network_tag=network_tag, n_nodes=T.shape[0],
                        value_at_zero=float(values[0]))


def relaxation_time(rates):
    """
    Slowest classical relaxation time 1 / |lambda_2(T)|, with lambda_2 the
    second-largest eigenvalue of the (symmetric) classical generator.
    """
    T = classical_generator(rates)
    eigenvalues = np.sort(np.linalg.eigvalsh(0.5 * (T + T.T)))[::-1]
    if eigenvalues.size < 2 or eigenvalues[1] >= 0:
        raise ConfigError("Generator has no relaxing mode (is the network connected?)")
    return float(1.0 / abs(eigenvalues[1]))
