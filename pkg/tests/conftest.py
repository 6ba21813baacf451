import numpy as np
import pytest

from qsw_app.models.dynamicsModels import QswParams
from qsw_app.models.networkModels import golden_rule_rates, hamiltonian, make_chain


@pytest.fixture
def rng():
    return np.random.default_rng(20141017)


def random_density_matrix(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_hermitian(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (a + a.conj().T)


def random_symmetric_rates(rng, n):
    r = rng.uniform(0.0, 2.0, size=(n, n))
    r = 0.5 * (r + r.T)
    np.fill_diagonal(r, 0.0)
    return r


def lindblad_dissipator(op, rho):
    """D[L, rho] = L rho L^dag - 1/2 {L^dag L, rho}, evaluated literally."""
    op_dag = op.conj().T
    return op @ rho @ op_dag - 0.5 * (op_dag @ op @ rho + rho @ op_dag @ op)


def projector(n, m, k):
    op = np.zeros((n, n), dtype=complex)
    op[m, k] = 1.0
    return op


def qsw_params(net, alpha, convention='laplacian', initial_node=0, dephasing_rate=1.0):
    h = hamiltonian(net, convention)
    return QswParams(alpha=alpha, hamiltonian=h, rates=golden_rule_rates(h),
                     initial_node=initial_node, dephasing_rate=dephasing_rate)


@pytest.fixture
def dimer():
    return make_chain(2)


@pytest.fixture
def chain3():
    return make_chain(3)
