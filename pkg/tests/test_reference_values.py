"""
Reference values at full network size.

slow        : classical limits, oracles and the quoted quantum-side
              dimensions (run by default, minutes)
reproduction: saturation of every figure trace at t = 1e3 and the trend of
              d_I(alpha) across the figure grid (pytest -m reproduction)

The gasket start node matters on [1, 10]: the corner start gives the
entropy slope closest to ln 3 / ln 5 and the center start gives the
return-probability slope closest to it, so each check uses its own start.
"""

import math

import numpy as np
import pytest

from conftest import qsw_params
from qsw_app.models.dynamicsModels import classical_generator
from qsw_app.models.entropyModels import entropy_trace, return_probability, shannon_entropy
from qsw_app.models.networkModels import make_chain, make_sierpinski
from qsw_app.models.scalingModels import (
    FitWindow, auto_window, classical_prediction, fit_information_dimension, fit_spectral_dimension,
)
from qsw_app.models.trajectoryModels import TimeGrid, make_time_grid, propagate, propagate_classical
from qsw_app.utils.helpers import resolve_initial_node

CHAIN_WINDOW = FitWindow(10.0, 100.0)
GASKET_WINDOW = FitWindow(1.0, 10.0)
SHORT_GRID = TimeGrid(t_min=1e-2, t_max=1e2, points_per_decade=20)


def assert_valid_snapshots(traj):
    for state in traj.states:
        rho = state.entries
        assert abs(np.trace(rho) - 1) < 1e-9
        assert np.max(np.abs(rho - rho.conj().T)) < 1e-10
        assert np.linalg.eigvalsh(rho)[0] > -1e-8


def walk(net, alpha, initial_node, grid):
    p = qsw_params(net, alpha, initial_node=resolve_initial_node(net, initial_node))
    return propagate(p, grid, network_tag=net.describe())


_figure_traces = {}


def figure_trace(network, alpha):
    """Entropy trace of a figure preset on the default grid, computed once per session."""
    key = (network, alpha)
    if key not in _figure_traces:
        if network == 'chain':
            traj = walk(make_chain(100), alpha, 'center', make_time_grid())
        else:
            traj = walk(make_sierpinski(5), alpha, 'corner', make_time_grid())
        _figure_traces[key] = entropy_trace(traj)
    return _figure_traces[key]


@pytest.fixture(scope='module')
def classical_chain():
    return walk(make_chain(100), 1.0, 'center', SHORT_GRID)


@pytest.fixture(scope='module')
def classical_gasket():
    return walk(make_sierpinski(5), 1.0, 'corner', SHORT_GRID)


@pytest.fixture(scope='module')
def classical_gasket_from_center():
    return walk(make_sierpinski(5), 1.0, 'center', SHORT_GRID)


# ============================================================================
# CLASSICAL LIMIT
# ============================================================================

@pytest.mark.slow
def test_classical_chain_information_dimension(classical_chain):
    assert_valid_snapshots(classical_chain)
    result = fit_information_dimension(entropy_trace(classical_chain), CHAIN_WINDOW)
    assert 0.45 <= result.d_info <= 0.55
    assert result.d_info == pytest.approx(classical_prediction('chain'), abs=0.05)


@pytest.mark.slow
def test_classical_chain_return_probability(classical_chain):
    result = fit_spectral_dimension(return_probability(classical_chain), CHAIN_WINDOW)
    assert result.slope == pytest.approx(-0.5, abs=0.06)


@pytest.mark.slow
def test_classical_gasket_information_dimension(classical_gasket):
    assert_valid_snapshots(classical_gasket)
    result = fit_information_dimension(entropy_trace(classical_gasket), GASKET_WINDOW)
    assert 0.63 <= result.d_info <= 0.74


@pytest.mark.slow
def test_classical_gasket_return_probability(classical_gasket_from_center):
    assert classical_gasket_from_center.initial_node == 40
    result = fit_spectral_dimension(return_probability(classical_gasket_from_center), GASKET_WINDOW)
    assert result.slope == pytest.approx(-math.log(3) / math.log(5), abs=0.06)


@pytest.mark.slow
def test_gasket_slopes_depend_on_the_start_node(classical_gasket, classical_gasket_from_center):
    corner = fit_spectral_dimension(return_probability(classical_gasket), GASKET_WINDOW)
    center = fit_spectral_dimension(return_probability(classical_gasket_from_center), GASKET_WINDOW)
    assert corner.slope < center.slope


@pytest.mark.slow
def test_incoherent_walk_matches_the_classical_propagator():
    net = make_chain(8)
    p = qsw_params(net, 1.0, initial_node=4)
    grid = make_time_grid()
    traj = propagate(p, grid, rtol=1e-11, atol=1e-13)
    classical = propagate_classical(classical_generator(p.rates), 4, grid)
    populations = np.array([np.diag(state.entries).real for state in traj.states])
    assert np.max(np.abs(populations - classical)) < 1e-7
    shannon = np.array([shannon_entropy(row) for row in classical])
    np.testing.assert_allclose(entropy_trace(traj).values, shannon[1:], atol=1e-9)


@pytest.mark.slow
def test_halving_rtol_barely_moves_the_entropy():
    net = make_sierpinski(3)
    grid = TimeGrid(t_min=1e-2, t_max=1e2, points_per_decade=10)
    p = qsw_params(net, 0.4, initial_node=0)
    coarse = entropy_trace(propagate(p, grid, rtol=1e-8))
    fine = entropy_trace(propagate(p, grid, rtol=5e-9))
    assert np.max(np.abs(coarse.values - fine.values)) < 1e-6


# ============================================================================
# QUANTUM SIDE
# ============================================================================

@pytest.mark.slow
def test_coherent_chain_stays_pure():
    traj = walk(make_chain(100), 0.0, 'center', make_time_grid())
    values = entropy_trace(traj).values
    assert np.max(np.abs(values)) < 1e-6


@pytest.mark.slow
@pytest.mark.parametrize("alpha, expected, tolerance", [(0.1, 0.6, 0.1), (0.05, 1.0, 0.2)])
def test_quantum_chain_dimensions(alpha, expected, tolerance):
    traj = walk(make_chain(100), alpha, 'center', make_time_grid())
    assert_valid_snapshots(traj)
    trace = entropy_trace(traj)
    result = fit_information_dimension(trace, auto_window(trace))
    assert result.d_info == pytest.approx(expected, abs=tolerance)


@pytest.mark.slow
def test_quantum_gasket_dimension():
    traj = walk(make_sierpinski(5), 0.1, 'corner', make_time_grid())
    assert_valid_snapshots(traj)
    trace = entropy_trace(traj)
    result = fit_information_dimension(trace, auto_window(trace))
    assert result.d_info == pytest.approx(1.4, abs=0.2)


@pytest.mark.slow
@pytest.mark.parametrize("network, window", [('chain', CHAIN_WINDOW), ('sierpinski', GASKET_WINDOW)])
def test_auto_window_finds_the_quoted_regime(network, window):
    if network == 'chain':
        traj = walk(make_chain(100), 0.5, 'center', make_time_grid())
    else:
        traj = walk(make_sierpinski(5), 0.5, 'corner', make_time_grid())
    found = auto_window(entropy_trace(traj))
    assert found.t_lo < window.t_hi and found.t_hi > window.t_lo


@pytest.mark.reproduction
@pytest.mark.parametrize("alpha", [0.05, 0.1, 0.2, 0.4, 0.6, 0.8, 1.0])
@pytest.mark.parametrize("network", ['chain', 'sierpinski'])
def test_entropy_saturates_at_log_n(alpha, network):
    trace = figure_trace(network, alpha)
    assert trace.values[-1] == pytest.approx(trace.max_entropy, rel=0.01)


@pytest.mark.reproduction
@pytest.mark.parametrize("network", ['chain', 'sierpinski'])
def test_dimension_does_not_grow_with_alpha(network):
    curve = []
    for alpha in (0.05, 0.1, 0.2, 0.4, 0.6, 0.8, 1.0):
        trace = figure_trace(network, alpha)
        curve.append(fit_information_dimension(trace, auto_window(trace)).d_info)
    for lower, higher in zip(curve, curve[1:]):
        assert higher <= lower + 0.05
