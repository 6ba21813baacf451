import numpy as np
import pytest
from scipy.linalg import expm

from conftest import qsw_params
from qsw_app.models.dynamicsModels import DensityMatrix, classical_generator, qsw_rhs
from qsw_app.models.networkModels import make_chain, make_sierpinski
from qsw_app.models.trajectoryModels import (
    TimeGrid, make_time_grid, propagate, propagate_classical, purity,
)
from qsw_app.utils.errors import ConfigError


def superoperator(p):
    """Dense N^2 x N^2 matrix of the QSW generator, column by column."""
    n = p.dim
    columns = []
    for k in range(n * n):
        basis = np.zeros(n * n, dtype=complex)
        basis[k] = 1.0
        columns.append(qsw_rhs(basis.reshape(n, n), p).ravel())
    return np.column_stack(columns)


# ============================================================================
# TIME GRIDS
# ============================================================================

def test_default_grid_covers_five_decades():
    grid = make_time_grid()
    assert grid.samples[0] == 0.0
    assert grid.samples[1] == pytest.approx(1e-2)
    assert grid.samples[-1] == pytest.approx(1e3)
    # 5 decades at 20 points per decade, both ends included, plus t = 0
    assert grid.samples.size == 102
    assert np.all(np.diff(grid.samples) > 0)


def test_grid_is_log_uniform():
    grid = TimeGrid(t_min=1e-3, t_max=1.0, points_per_decade=10)
    ratios = grid.positive_samples[1:] / grid.positive_samples[:-1]
    np.testing.assert_allclose(ratios, np.full(ratios.size, 10 ** 0.1), rtol=1e-12)


def test_grid_with_fractional_decades_keeps_its_endpoint():
    grid = TimeGrid(t_min=1.0, t_max=5.0, points_per_decade=4)
    assert grid.samples[-1] == pytest.approx(5.0)
    assert grid.samples.size == 1 + 4


@pytest.mark.parametrize("t_min, t_max, ppd", [(0.0, 1.0, 20), (1.0, 1.0, 20), (1.0, 0.5, 20), (1e-2, 1.0, 0)])
def test_invalid_grids(t_min, t_max, ppd):
    with pytest.raises(ConfigError):
        TimeGrid(t_min=t_min, t_max=t_max, points_per_decade=ppd)


# ============================================================================
# QUANTUM PROPAGATION
# ============================================================================

def test_trajectory_shape_and_start_state(chain3):
    grid = TimeGrid(t_min=1e-2, t_max=1.0, points_per_decade=5)
    traj = propagate(qsw_params(chain3, 0.5, initial_node=1), grid)
    assert len(traj.states) == grid.samples.size
    assert all(isinstance(state, DensityMatrix) for state in traj.states)
    np.testing.assert_array_equal(traj.states[0].entries, DensityMatrix.pure(3, 1).entries)
    assert traj.n_nodes == 3 and traj.initial_node == 1
    assert traj.n_steps > 0


def test_incoherent_dimer_relaxes_exponentially(dimer):
    grid = TimeGrid(t_min=1e-2, t_max=10.0, points_per_decade=10)
    traj = propagate(qsw_params(dimer, 1.0), grid)
    populations = np.array([state.entries[0, 0].real for state in traj.states])
    np.testing.assert_allclose(populations, 0.5 * (1 + np.exp(-2 * grid.samples)), atol=1e-7)
    for state in traj.states:
        assert abs(state.entries[0, 1]) < 1e-12


def test_coherent_dimer_oscillates_and_stays_pure(dimer):
    grid = TimeGrid(t_min=1e-2, t_max=10.0, points_per_decade=10)
    traj = propagate(qsw_params(dimer, 0.0, convention='adjacency'), grid)
    populations = np.array([state.entries[0, 0].real for state in traj.states])
    np.testing.assert_allclose(populations, np.cos(grid.samples) ** 2, atol=1e-7)
    for state in traj.states:
        assert purity(state) == pytest.approx(1.0, abs=1e-7)


def test_coherent_walk_on_a_long_chain_stays_pure_over_the_default_grid():
    traj = propagate(qsw_params(make_chain(100), 0.0, initial_node=50), make_time_grid())
    assert len(traj.states) == 102
    for state in traj.states:
        assert purity(state) == pytest.approx(1.0, abs=1e-10)
        assert np.linalg.eigvalsh(state.entries)[0] > -1e-12


@pytest.mark.parametrize("alpha", [0.0, 0.1, 0.4, 0.9])
def test_propagation_matches_exact_exponential(chain3, alpha):
    p = qsw_params(chain3, alpha)
    grid = TimeGrid(t_min=1e-2, t_max=20.0, points_per_decade=6)
    traj = propagate(p, grid)
    generator = superoperator(p)
    start = DensityMatrix.pure(3, 0).entries.ravel()
    for t, state in zip(grid.samples, traj.states):
        exact = (expm(t * generator) @ start).reshape(3, 3)
        np.testing.assert_allclose(state.entries, exact, atol=1e-6)


def test_propagation_preserves_the_trace():
    net = make_sierpinski(2)
    traj = propagate(qsw_params(net, 0.3), TimeGrid(t_min=1e-2, t_max=100.0, points_per_decade=5))
    for state in traj.states:
        assert np.trace(state.entries).real == pytest.approx(1.0, abs=1e-11)
        np.testing.assert_array_equal(state.entries, state.entries.conj().T)


def test_dissipation_drives_the_walk_to_the_mixed_state():
    traj = propagate(qsw_params(make_chain(4), 1.0), TimeGrid(t_min=1e-1, t_max=1e3, points_per_decade=4))
    np.testing.assert_allclose(traj.states[-1].entries, np.eye(4) / 4, atol=1e-7)


def test_propagation_is_deterministic(chain3):
    grid = TimeGrid(t_min=1e-2, t_max=10.0, points_per_decade=5)
    a = propagate(qsw_params(chain3, 0.2), grid)
    b = propagate(qsw_params(chain3, 0.2), grid)
    for x, y in zip(a.states, b.states):
        np.testing.assert_array_equal(x.entries, y.entries)


def test_propagate_rejects_bad_tolerances(chain3):
    grid = TimeGrid(t_min=1e-2, t_max=1.0)
    with pytest.raises(ConfigError):
        propagate(qsw_params(chain3, 0.2), grid, rtol=0.0)
    with pytest.raises(ConfigError):
        propagate({'alpha': 0.2}, grid)


def test_purity_bounds():
    assert purity(DensityMatrix.pure(3, 0)) == 1.0
    assert purity(DensityMatrix.maximallyMixed(4)) == pytest.approx(0.25)


# ============================================================================
# CLASSICAL PROPAGATION
# ============================================================================

def test_classical_dimer_relaxes_exponentially():
    grid = TimeGrid(t_min=1e-2, t_max=10.0, points_per_decade=10)
    T = classical_generator(np.array([[0.0, 1.0], [1.0, 0.0]]))
    p = propagate_classical(T, 0, grid)
    np.testing.assert_allclose(p[:, 0], 0.5 * (1 + np.exp(-2 * grid.samples)), atol=1e-12)
    np.testing.assert_array_equal(p[0], [1.0, 0.0])


def test_classical_probabilities_stay_normalized():
    T = classical_generator(qsw_params(make_sierpinski(3), 1.0).rates)
    p = propagate_classical(T, 0, make_time_grid())
    np.testing.assert_allclose(p.sum(axis=1), np.ones(p.shape[0]), atol=1e-10)
    assert p.min() > -1e-12


def test_classical_propagation_of_an_asymmetric_generator():
    rates = np.array([[0.0, 2.0], [1.0, 0.0]])
    T = classical_generator(rates)
    grid = TimeGrid(t_min=1e-2, t_max=10.0, points_per_decade=5)
    p = propagate_classical(T, 0, grid)
    # stationary state balances 1 * p0 = 2 * p1
    np.testing.assert_allclose(p[-1], [2 / 3, 1 / 3], atol=1e-10)


def test_classical_propagation_validates_the_generator():
    grid = TimeGrid(t_min=1e-2, t_max=1.0)
    with pytest.raises(ConfigError):
        propagate_classical(np.array([[0.0, 1.0], [1.0, 0.0]]), 0, grid)
    with pytest.raises(ConfigError):
        propagate_classical(classical_generator(np.array([[0.0, 1.0], [1.0, 0.0]])), 5, grid)
