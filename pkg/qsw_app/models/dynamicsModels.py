"""
==============================================================================
Dynamics Model - right-hand side of the quantum stochastic walk
==============================================================================

The quantum stochastic walk (QSW) interpolates between the coherent walk and
the classical random walk inside one Lindblad master equation:

    drho/dt = (1 - alpha) L_ctqw[rho] + alpha (L_ctrw[rho] + L_deph[rho])

    L_ctqw[rho] = -i [H0, rho]
    L_ctrw[rho] = sum_{m != n} rates[m][n] D[|m><n|, rho]
    L_deph[rho] = lam sum_m D[|m><m|, rho]
    D[L, rho]   = L rho L^dag - 1/2 {L^dag L, rho}

Both dissipators are evaluated in closed form (O(N^2) on top of the O(N^3)
commutator) instead of summing N^2 explicit Lindblad operators:

    L_ctrw[rho] = diag(rates @ diag(rho)) - 1/2 (Gamma rho + rho Gamma),
                  Gamma_nn = sum_m rates[m][n]
    L_deph[rho] = lam (diag(diag(rho)) - rho)

alpha weighs the dephasing channel as well, exactly as the equation is
written. alpha = 1 runs through the same code path as every other alpha.
"""

from dataclasses import dataclass

import numpy as np

from qsw_app.models.networkModels import HermitianMatrix, RateMatrix
from qsw_app.utils import validators
from qsw_app.utils.errors import ConfigError, InvariantViolation

# =============================================================================
# MODULE CONSTANTS
# =============================================================================

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-9
EIGENVALUE_FLOOR = -1e-8


# =============================================================================
# DOMAIN TYPES
# =============================================================================

@dataclass(frozen=True)
class QswParams:
    """
    Parameters of one QSW propagation.

    Attributes:
        alpha (float): Interpolation weight in [0, 1]; 0 is the coherent walk,
                       1 the classical random walk (plus dephasing).
        hamiltonian (HermitianMatrix): H0.
        rates (RateMatrix): Incoherent hopping rates.
        initial_node (int): The walk starts in |j><j|.
        dephasing_rate (float): lam >= 0, default 1.
    """
    alpha: float
    hamiltonian: HermitianMatrix
    rates: RateMatrix
    initial_node: int
    dephasing_rate: float = 1.0

    def __post_init__(self):
        errors = []
        for error in (validators.validate_alpha(self.alpha),
                      validators.validate_nonnegative(self.dephasing_rate, "dephasing_rate")):
            if error:
                errors.append(error)
        if self.hamiltonian.dim != self.rates.dim:
            errors.append(f"Hamiltonian dimension {self.hamiltonian.dim} does not match "
                          f"rate matrix dimension {self.rates.dim}")
        else:
            error = validators.validate_node_index(self.initial_node, self.dim)
            if error:
                errors.append(error)
        if errors:
            raise ConfigError(errors)

    @property
    def dim(self):
        return self.hamiltonian.dim

    def withAlpha(self, alpha):
        """Same network and start node, different alpha."""
        return QswParams(alpha=alpha, hamiltonian=self.hamiltonian, rates=self.rates,
                         initial_node=self.initial_node, dephasing_rate=self.dephasing_rate)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """
    Reduced density matrix rho(t).
    Hermitian to 1e-10, unit trace to 1e-9, eigenvalues >= -1e-8.
    Construction raises InvariantViolation if any of these fail.
    """
    entries: np.ndarray

    def __post_init__(self):
        entries = np.array(self.entries, dtype=complex, copy=True)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1] or entries.shape[0] == 0:
            raise ConfigError(f"Density matrix must be square and non-empty (got shape {entries.shape})")
        entries.setflags(write=False)
        object.__setattr__(self, 'entries', entries)
        self.checkInvariants()

    @classmethod
    def pure(cls, dim, node):
        """Localized state |node><node|."""
        entries = np.zeros((dim, dim), dtype=complex)
        entries[node, node] = 1.0
        return cls(entries)

    @classmethod
    def maximallyMixed(cls, dim):
        return cls(np.eye(dim, dtype=complex) / dim)

    @property
    def dim(self):
        return self.entries.shape[0]

    def checkInvariants(self):
        """
        Raise InvariantViolation when rho is not Hermitian, not normalised or
        has an eigenvalue below the -1e-8 floor.

        Returns:
            np.ndarray: The eigenvalues (ascending), so callers can reuse them.
        """
        rho = self.entries
        deviation = np.max(np.abs(rho - rho.conj().T))
        if deviation > HERMITIAN_TOL:
            raise InvariantViolation(f"Density matrix is not Hermitian (deviation {deviation:.3e})")
        trace = np.trace(rho)
        if abs(trace - 1.0) > TRACE_TOL:
            raise InvariantViolation(f"Density matrix trace {trace.real:.12f} differs from 1")
        eigenvalues = np.linalg.eigvalsh(rho)
        if eigenvalues[0] < EIGENVALUE_FLOOR:
            raise InvariantViolation(f"Density matrix has negative eigenvalue {eigenvalues[0]:.3e}")
        return eigenvalues


# =============================================================================
# HELPERS
# =============================================================================

def _entries(value):
    """Accept the domain wrappers or raw arrays."""
    if isinstance(value, (DensityMatrix, HermitianMatrix)):
        return value.entries
    if isinstance(value, RateMatrix):
        return value.rates
    return np.asarray(value)


def _check_dims(rho, other, what):
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ConfigError(f"Density matrix must be square (got shape {rho.shape})")
    if other.shape != rho.shape:
        raise ConfigError(f"{what} shape {other.shape} does not match density matrix shape {rho.shape}")


# =============================================================================
# LIOUVILLIAN TERMS
# =============================================================================

def ctqw_term(rho, h):
    """Coherent part -i [H, rho]. Traceless, and Hermitian for Hermitian rho."""
    rho, h = _entries(rho), _entries(h)
    _check_dims(rho, h, "Hamiltonian")
    return -1j * (h @ rho - rho @ h)


def ctrw_dissipator(rho, rates):
    """
    Closed-form sum of D[|m><n|, rho] weighted by rates[m][n], m != n.

    gain: diagonal entry m receives sum_n rates[m][n] rho_nn
    loss: -1/2 (Gamma rho + rho Gamma) with Gamma_nn = sum_m rates[m][n]

    The individual Lindblad operators are never materialized.
    """
    rho, rates = _entries(rho), _entries(rates)
    _check_dims(rho, rates, "Rate matrix")
    gamma = rates.sum(axis=0)
    result = -0.5 * (gamma[:, None] + gamma[None, :]) * rho
    result[np.diag_indices_from(result)] += rates @ np.diag(rho)
    return result


def dephasing_dissipator(rho, lam):
    """
    Closed-form sum of lam D[|m><m|, rho]: lam (diag(rho) - rho).
    Populations are untouched and each coherence decays at rate lam.
    """
    error = validators.validate_nonnegative(lam, "Dephasing rate")
    if error:
        raise ConfigError(error)
    rho = _entries(rho)
    return lam * (np.diag(np.diag(rho)) - rho)


def liouvillian_terms(p):
    """
    Prepare the QSW right-hand side for repeated evaluation.

    Gamma, the rates and the weights are computed once. The commutator uses
    rho H = (H rho)^dag, which holds because the propagator only feeds it
    Hermitian states; this also makes every output exactly Hermitian.

    Args:
        p (QswParams): Walk parameters.

    Returns:
        callable: rhs(rho: np.ndarray) -> np.ndarray
    """
    h = p.hamiltonian.entries
    rates = p.rates.rates
    gamma = rates.sum(axis=0)
    loss = -0.5 * (gamma[:, None] + gamma[None, :])
    coherent_weight = 1.0 - p.alpha
    incoherent_weight = p.alpha
    lam = p.dephasing_rate
    diag = np.diag_indices(p.dim)

    def rhs(rho):
        h_rho = h @ rho
        result = (-1j * coherent_weight) * (h_rho - h_rho.conj().T)
        dissipative = (loss - lam) * rho
        populations = np.diag(rho)
        dissipative[diag] += rates @ populations + lam * populations
        result += incoherent_weight * dissipative
        return result

    return rhs


def qsw_rhs(rho, p):
    """
    drho/dt = (1 - alpha) ctqw_term + alpha (ctrw_dissipator + dephasing_dissipator).

    Returns:
        np.ndarray: Hermitian, traceless complex matrix.
    """
    rho = _entries(rho)
    _check_dims(rho, p.hamiltonian.entries, "Hamiltonian")
    return ((1.0 - p.alpha) * ctqw_term(rho, p.hamiltonian)
            + p.alpha * (ctrw_dissipator(rho, p.rates) + dephasing_dissipator(rho, p.dephasing_rate)))


def classical_generator(rates):
    """
    Classical random-walk generator T with dp/dt = T p.

    T[m][n] = rates[m][n] for m != n and T[n][n] = -sum_m rates[m][n], so
    every column sums to zero.
    """
    rates = np.array(_entries(rates), dtype=float)
    return rates - np.diag(rates.sum(axis=0))
