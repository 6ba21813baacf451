import pytest

from qsw_app.config.settings import get_run_defaults
from qsw_app.utils import validators


@pytest.fixture
def experiment():
    data = get_run_defaults({'output_dir': 'out', 'workers': 1, 'rtol': 1e-8, 'atol': 1e-10,
                             'log_level': 'INFO', 'max_generation': 8})
    return data


def test_valid_chain_length():
    assert validators.validate_chain_length(2) is None
    assert validators.validate_chain_length(100) is None


@pytest.mark.parametrize("n", [1, 0, 2.0, True, "10"])
def test_invalid_chain_length(n):
    assert validators.validate_chain_length(n) is not None


def test_generation_limit():
    assert validators.validate_generation(8) is None
    assert "exceeds" in validators.validate_generation(9)
    assert validators.validate_generation(5, max_generation=4) is not None


def test_edges():
    assert validators.validate_edges(3, [(0, 1), (1, 2)]) is None
    assert "Self-loop" in validators.validate_edges(3, [(1, 1)])
    assert "Duplicate" in validators.validate_edges(3, [(0, 1), (1, 0)])
    assert "outside" in validators.validate_edges(2, [(0, 2)])


def test_alpha_ranges():
    assert validators.validate_alpha(0.0) is None
    assert validators.validate_alpha(1.0) is None
    assert validators.validate_alpha(0.0, allow_zero=False) is not None
    assert validators.validate_alpha(1.0001) is not None
    assert validators.validate_alpha(float('inf')) is not None


def test_alpha_list():
    assert validators.validate_alpha_list([0.1, 0.5, 1.0]) is None
    assert validators.validate_alpha_list([]) is not None
    assert validators.validate_alpha_list([0.0, 0.5]) is not None
    assert "increasing" in validators.validate_alpha_list([0.5, 0.2])
    assert "increasing" in validators.validate_alpha_list([0.5, 0.5])


def test_initial_node():
    for value in ('center', 'corner', 0, 17):
        assert validators.validate_initial_node(value) is None
    for value in ('middle', -1, 1.5):
        assert validators.validate_initial_node(value) is not None


def test_window():
    assert validators.validate_window(10.0, 100.0) is None
    assert validators.validate_window(10.0, 20.0) is not None
    assert "window_lo" in validators.validate_window(-1.0, 10.0)


def test_defaults_are_valid(experiment):
    assert validators.validate_all_experiment_fields(experiment) == []


def test_all_errors_are_collected(experiment):
    experiment.update({'size': 1, 'alphas': [0.5, 0.1], 'dephasing_rate': -1.0, 'workers': 0})
    errors = validators.validate_all_experiment_fields(experiment)
    assert len(errors) == 4


def test_fixed_mode_needs_a_window(experiment):
    experiment['fit_mode'] = 'fixed'
    errors = validators.validate_all_experiment_fields(experiment)
    assert len(errors) == 1 and "window_lo" in errors[0]


def test_custom_topology_needs_an_edge_file(experiment):
    experiment['topology'] = 'custom'
    assert validators.validate_all_experiment_fields(experiment) == ["Custom topology requires an edge_file"]


def test_gasket_generation_is_checked_against_the_limit(experiment):
    experiment.update({'topology': 'sierpinski', 'generation': 6})
    assert validators.validate_all_experiment_fields(experiment, max_generation=5) != []
    assert validators.validate_all_experiment_fields(experiment, max_generation=6) == []
