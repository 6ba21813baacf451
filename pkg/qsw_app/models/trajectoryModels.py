"""
==============================================================================
Trajectory Model - time grids and propagation of the QSW master equation
==============================================================================

propagate() integrates drho/dt = qsw_rhs from the localized state |j><j|
with the Dormand-Prince 5(4) pair (scipy's RK45 stepper) and records a
snapshot at every sample of a log-spaced TimeGrid.

The coherent walk (alpha = 0) is not integrated: it is evaluated exactly as
|psi(t)><psi(t)| with psi(t) = V exp(-iEt) V^dag e_j from eigh(H0), so every
snapshot is pure to rounding.

Snapshot Strategy:
    - The integrator is restarted on every [t_k, t_k+1] segment so each
      snapshot lands exactly on its sample time (no dense-output
      interpolation). The step size the controller proposes at the end of a
      segment seeds the next one.
    - Every snapshot is re-symmetrized, rho <- (rho + rho^dag) / 2, and its
      trace renormalized when it drifts by more than 1e-12; integration then
      continues from the cleaned state.
    - Every snapshot is validated as a DensityMatrix; a violation aborts the
      propagation with the offending time in the message.

propagate_classical() evaluates p(t) = exp(tT) e_j for the classical limit,
through the eigendecomposition of T when T is symmetric (the golden-rule
rates always are) and through scipy's expm otherwise.
"""

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import RK45
from scipy.linalg import eigh, expm

from qsw_app.models.dynamicsModels import DensityMatrix, QswParams, liouvillian_terms
from qsw_app.utils import validators
from qsw_app.utils.errors import ConfigError, InvariantViolation, StepSizeUnderflow

logger = logging.getLogger(__name__)

# =============================================================================
# MODULE CONSTANTS
# =============================================================================

DEFAULT_RTOL = 1e-8
DEFAULT_ATOL = 1e-10
TRACE_RENORMALIZE_TOL = 1e-12
GENERATOR_COLUMN_TOL = 1e-10


# =============================================================================
# TIME GRID
# =============================================================================

@dataclass(frozen=True)
class TimeGrid:
    """
    Log-uniform sample times on [t_min, t_max] with t = 0 prepended.

    Attributes:
        t_min (float): First positive sample.
        t_max (float): Last sample.
        points_per_decade (int): Sampling density, default 20.
        samples (np.ndarray): 0, t_min, ..., t_max, strictly increasing.
    """
    t_min: float
    t_max: float
    points_per_decade: int = 20
    samples: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        errors = [e for e in (validators.validate_time_range(self.t_min, self.t_max),
                              validators.validate_points_per_decade(self.points_per_decade)) if e]
        if errors:
            raise ConfigError(errors)
        decades = math.log10(self.t_max / self.t_min)
        # round first so an exact number of decades does not gain a point
        count = max(2, math.ceil(round(decades * self.points_per_decade, 9)) + 1)
        positive = np.geomspace(self.t_min, self.t_max, count)
        samples = np.concatenate(([0.0], positive))
        samples.setflags(write=False)
        object.__setattr__(self, 'samples', samples)

    @property
    def positive_samples(self):
        return self.samples[1:]


def make_time_grid(t_min=1e-2, t_max=1e3, points_per_decade=20):
    return TimeGrid(t_min=t_min, t_max=t_max, points_per_decade=points_per_decade)


# =============================================================================
# TRAJECTORY
# =============================================================================

@dataclass(frozen=True)
class Trajectory:
    """
    Density-matrix snapshots aligned with grid.samples.

    Attributes:
        grid (TimeGrid): Sample times.
        states (tuple[DensityMatrix]): states[0] is |j><j|.
        params (QswParams): Provenance.
        network_tag (str): Label of the network, carried into entropy traces.
        n_steps (int): Accepted integrator steps.
        renormalizations (int): Snapshots whose trace had to be rescaled.
    """
    grid: TimeGrid
    states: tuple
    params: QswParams
    network_tag: str = ''
    n_steps: int = 0
    renormalizations: int = 0

    @property
    def initial_node(self):
        return self.params.initial_node

    @property
    def n_nodes(self):
        return self.params.dim


def purity(rho):
    """tr(rho^2); 1 exactly for pure states."""
    entries = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho)
    return float(np.real(np.vdot(entries, entries)))


def _clean_snapshot(y, dim):
    rho = y.reshape(dim, dim)
    rho = 0.5 * (rho + rho.conj().T)
    trace = np.trace(rho).real
    renormalized = abs(trace - 1.0) > TRACE_RENORMALIZE_TOL
    if renormalized:
        rho = rho / trace
    return rho, renormalized


def _propagate_coherent(p, grid, network_tag):
    # alpha = 0: rho(t) = |psi(t)><psi(t)|, psi(t) = V exp(-iEt) V^dag e_j
    dim = p.dim
    energies, vectors = eigh(p.hamiltonian.entries)
    weights = vectors[p.initial_node, :].conj()
    states = [DensityMatrix.pure(dim, p.initial_node)]
    renormalizations = 0
    for t in grid.positive_samples:
        psi = vectors @ (np.exp(-1j * energies * t) * weights)
        rho, renormalized = _clean_snapshot(np.outer(psi, psi.conj()), dim)
        renormalizations += renormalized
        try:
            states.append(DensityMatrix(rho))
        except InvariantViolation as e:
            raise InvariantViolation(f"At t={t:.6g} (alpha=0): {e}") from e

    logger.debug("[PROPAGATE] alpha=0 N=%d: exact unitary evolution", dim)
    return Trajectory(grid=grid, states=tuple(states), params=p, network_tag=network_tag,
                      renormalizations=renormalizations)


def propagate(p, grid, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL, network_tag=''):
    """
    Integrate the QSW master equation over the time grid.
    alpha = 0 is evaluated exactly and ignores rtol and atol.

    Args:
        p (QswParams): Walk parameters, including the start node.
        grid (TimeGrid): Snapshot times.
        rtol (float): Relative tolerance of the RK45 error control.
        atol (float): Absolute tolerance of the RK45 error control.
        network_tag (str): Label recorded on the trajectory.

    Returns:
        Trajectory: One validated DensityMatrix per grid sample.

    Raises:
        StepSizeUnderflow: The stepper could not advance.
        InvariantViolation: A snapshot is not a valid density matrix.
    """
    if not isinstance(p, QswParams):
        raise ConfigError("propagate() needs QswParams")
    errors = [e for e in (validators.validate_positive(rtol, "rtol"),
                          validators.validate_positive(atol, "atol")) if e]
    if errors:
        raise ConfigError(errors)

    if p.alpha == 0:
        return _propagate_coherent(p, grid, network_tag)

    dim = p.dim
    rhs = liouvillian_terms(p)

    def fun(t, y):
        return rhs(y.reshape(dim, dim)).ravel()

    start = DensityMatrix.pure(dim, p.initial_node)
    states = [start]
    y = np.array(start.entries).ravel()
    step = None
    n_steps = 0
    renormalizations = 0
    started = time.perf_counter()

    for t0, t1 in zip(grid.samples[:-1], grid.samples[1:]):
        span = t1 - t0
        first_step = min(step, span) if step else None
        solver = RK45(fun, t0, y, t1, rtol=rtol, atol=atol, first_step=first_step)
        while solver.status == 'running':
            message = solver.step()
            if solver.status == 'failed':
                raise StepSizeUnderflow(f"Integrator failed at t={solver.t:.6g} "
                                        f"(alpha={p.alpha}): {message}")
            n_steps += 1
            if solver.t < t1:
                step = solver.h_abs

        rho, renormalized = _clean_snapshot(solver.y, dim)
        if renormalized:
            renormalizations += 1
            logger.debug("[PROPAGATE] Renormalized trace at t=%.6g", t1)
        try:
            states.append(DensityMatrix(rho))
        except InvariantViolation as e:
            raise InvariantViolation(f"At t={t1:.6g} (alpha={p.alpha}): {e}") from e
        y = rho.ravel()

    logger.debug("[PROPAGATE] alpha=%s N=%d: %d steps, %d renormalizations, %.2fs",
                 p.alpha, dim, n_steps, renormalizations, time.perf_counter() - started)
    return Trajectory(grid=grid, states=tuple(states), params=p, network_tag=network_tag,
                      n_steps=n_steps, renormalizations=renormalizations)


# =============================================================================
# CLASSICAL LIMIT
# =============================================================================

def propagate_classical(T, j, grid):
    """
    Occupation probabilities p(t) = exp(tT) e_j of the classical random walk.

    Args:
        T (np.ndarray): Generator with zero column sums.
        j (int): Start node.
        grid (TimeGrid): Sample times.

    Returns:
        np.ndarray: Shape (len(grid.samples), N); row k is p(grid.samples[k]).
    """
    T = np.asarray(T, dtype=float)
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise ConfigError(f"Generator must be square (got shape {T.shape})")
    if np.max(np.abs(T.sum(axis=0))) > GENERATOR_COLUMN_TOL * max(1.0, np.max(np.abs(T))):
        raise ConfigError("Generator columns must sum to zero")
    error = validators.validate_node_index(j, T.shape[0])
    if error:
        raise ConfigError(error)

    n = T.shape[0]
    probabilities = np.empty((len(grid.samples), n))
    if np.allclose(T, T.T, rtol=0.0, atol=1e-14):
        eigenvalues, vectors = eigh(T)
        weights = vectors[j, :]
        for k, t in enumerate(grid.samples):
            probabilities[k] = vectors @ (np.exp(t * eigenvalues) * weights)
    else:
        for k, t in enumerate(grid.samples):
            probabilities[k] = expm(t * T)[:, j]

    # the t = 0 sample is the start vector itself, not its round-tripped image
    probabilities[0] = 0.0
    probabilities[0, j] = 1.0
    return probabilities
