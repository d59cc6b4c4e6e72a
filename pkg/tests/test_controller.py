"""Adaptive control loop: configuration, termination, trace invariants."""

import pytest

from gasadapt.controller import (
    AdaptiveConfig,
    compute_estimates,
    estimator_threads,
    is_eps_feasible,
    run,
    validate_parameters,
)
from gasadapt.errors import EmptyNetwork
from gasadapt.fixtures import chain5
from gasadapt.models import ModelLevel
from gasadapt.network import Network, Node, Scenario


# -- configuration ------------------------------------------------------------


def test_config_defaults_are_consistent():
    config = AdaptiveConfig()
    assert config.eps == 10.0  # 1e-4 bar in Pa
    assert (config.theta_d, config.phi_d, config.tau, config.mu) == (0.7, 0.3, 1.1, 4)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"theta_d": 1.5},
        {"phi_m": -0.1},
        {"tau": 0.9},
        {"mu": 0},
        {"eps": 0.0},
        {"initial_intervals": 6},
        {"split_tolerance": True, "eps_opt": 100.0},
    ],
)
def test_config_rejects_bad_parameters(kwargs):
    with pytest.raises(ValueError):
        AdaptiveConfig(**kwargs)


def test_split_tolerance_shifts_feasibility_threshold():
    config = AdaptiveConfig(eps=10.0, eps_opt=1.0, split_tolerance=True)
    assert config.eps_feasibility == 9.0
    assert AdaptiveConfig(eps=10.0).eps_feasibility == 10.0


def test_adaptive_eps_opt_is_rejected():
    net, gas, scn = chain5()
    with pytest.raises(NotImplementedError):
        run(net, scn, gas, AdaptiveConfig(adaptive_eps_opt=True))


# -- parameter validator ------------------------------------------------------


def test_validator_flags_second_inequality_for_benchmark_parameters():
    warnings = validate_parameters(AdaptiveConfig(), n_pipes=39)
    assert len(warnings) == 1
    assert "model switching" in warnings[0]


def test_validator_passes_for_large_mu():
    assert validate_parameters(AdaptiveConfig(mu=25), n_pipes=39) == []


def test_validator_flags_both_inequalities():
    config = AdaptiveConfig(theta_d=0.1, theta_m=0.1, phi_d=0.9, phi_m=0.9, mu=1)
    assert len(validate_parameters(config, n_pipes=10)) == 2


def test_validator_inequalities_are_strict():
    # equality violates the strict > requirement
    config = AdaptiveConfig(theta_d=0.5, phi_d=1.0, mu=4)
    warnings = validate_parameters(config, n_pipes=1)
    assert any("refinement/coarsening" in w for w in warnings)


# -- estimator concurrency ----------------------------------------------------


def test_estimator_threads_env(monkeypatch):
    monkeypatch.delenv("GASADAPT_THREADS", raising=False)
    assert estimator_threads() == 1
    monkeypatch.setenv("GASADAPT_THREADS", "4")
    assert estimator_threads() == 4


def test_compute_estimates_thread_count_invariant(monkeypatch):
    from gasadapt import nlp

    net, gas, scn = chain5()
    state = {
        pid: (ModelLevel.FRICTION, p.length / 4) for pid, p in net.pipes.items()
    }
    sol = nlp.solve(nlp.assemble(net, scn, gas, state))
    levels = {pid: lv for pid, (lv, _) in state.items()}
    steps = {pid: h for pid, (_, h) in state.items()}

    monkeypatch.setenv("GASADAPT_THREADS", "1")
    serial, _ = compute_estimates(net, gas, sol, levels, steps)
    monkeypatch.setenv("GASADAPT_THREADS", "4")
    threaded, _ = compute_estimates(net, gas, sol, levels, steps)
    assert serial == threaded


# -- end-to-end loop ----------------------------------------------------------


@pytest.fixture(scope="module")
def chain5_run():
    net, gas, scn = chain5()
    config = AdaptiveConfig()
    sol, state = run(net, scn, gas, config)
    return net, config, sol, state


def test_run_terminates_eps_feasible(chain5_run):
    _, config, _, state = chain5_run
    assert is_eps_feasible(state.estimates.values(), config.eps)
    assert state.trace[-1].avg_eta <= config.eps


def test_run_respects_grid_floor_and_alignment(chain5_run):
    net, _, _, state = chain5_run
    for pid, pipe in net.pipes.items():
        assert state.stepsizes[pid] <= state.initial_stepsizes[pid]
        n = round(pipe.length / state.stepsizes[pid])
        assert n % 4 == 0
        assert n * state.stepsizes[pid] == pytest.approx(pipe.length)


def test_run_levels_stay_in_hierarchy(chain5_run):
    _, _, _, state = chain5_run
    assert all(lv in (1, 2, 3) for lv in state.levels.values())


def test_run_trace_one_record_per_solve(chain5_run):
    _, _, _, state = chain5_run
    indices = [r.solve_index for r in state.trace]
    assert indices == list(range(len(state.trace)))
    assert state.trace[0].outer_k == 0 and state.trace[0].inner_j == 0
    assert state.trace[0].n_refined == 0 and state.trace[0].n_switched_up == 0


def test_run_inner_rounds_do_not_increase_total_error(chain5_run):
    # up to first-order estimator noise: decrease >= -0.1 * previous total
    _, _, _, state = chain5_run
    for prev, cur in zip(state.trace, state.trace[1:]):
        if cur.n_refined + cur.n_switched_up > 0:
            assert prev.sum_eta - cur.sum_eta >= -0.1 * prev.sum_eta


def test_run_estimates_cover_every_pipe(chain5_run):
    net, _, _, state = chain5_run
    assert set(state.estimates) == set(net.pipes)


def test_run_solution_is_accepted_state(chain5_run):
    _, _, sol, state = chain5_run
    assert sol is state.solution
    assert sol.status == "LocalOptimum"


def test_run_empty_network_raises():
    net = Network([Node("a", "entry", 1e5, 1e7)], [])
    with pytest.raises(EmptyNetwork):
        run(net, Scenario({}), None, AdaptiveConfig())
