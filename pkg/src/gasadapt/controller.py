"""Outer adaptive control loop: marking, model switching, grid adaptation.

The loop alternates mu rounds of refine/switch-up with one round of
coarsen/switch-down and terminates as soon as the average per-pipe total
error estimate drops below the tolerance.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import nlp
from .errors import EmptyNetwork, InfeasibleProblem, IterationLimit
from .estimators import estimate_with_alternatives, network_error_summary
from .models import ModelLevel
from .network import GasParameters, Network, Scenario, slope_of

THREADS_ENV_VAR = "GASADAPT_THREADS"


def estimator_threads() -> int:
    return max(1, int(os.environ.get(THREADS_ENV_VAR, "1")))


@dataclass
class AdaptiveConfig:
    eps: float = 10.0  # Pa; the canonical configuration unit is bar (1e-4 bar)
    theta_d: float = 0.7
    theta_m: float = 0.7
    phi_d: float = 0.3
    phi_m: float = 0.3
    tau: float = 1.1
    mu: int = 4
    eps_opt: float = nlp.DEFAULT_EPS_OPT
    max_outer_iterations: int = 100
    initial_intervals: int = 4
    initial_level: int = 3
    split_tolerance: bool = False  # check feasibility against eps - eps_opt
    adaptive_eps_opt: bool = False  # reserved; rejected as unimplemented

    def __post_init__(self):
        for name in ("theta_d", "theta_m", "phi_d", "phi_m"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} = {value} outside [0, 1]")
        if self.tau < 1.0:
            raise ValueError(f"tau = {self.tau} must be >= 1")
        if self.mu < 1:
            raise ValueError(f"mu = {self.mu} must be a positive integer")
        if self.eps <= 0.0:
            raise ValueError("eps must be positive")
        if self.initial_intervals % 4 != 0 or self.initial_intervals <= 0:
            raise ValueError("initial_intervals must be a positive multiple of 4")
        if self.split_tolerance and self.eps_opt >= self.eps:
            raise ValueError("tolerance splitting requires eps_opt < eps")

    @property
    def eps_feasibility(self) -> float:
        """Tolerance used in the feasibility checks of the loop."""
        return self.eps - self.eps_opt if self.split_tolerance else self.eps


@dataclass
class TraceRecord:
    solve_index: int
    outer_k: int
    inner_j: int
    n_vars: int
    n_cons: int
    nlp_seconds: float
    ivp_seconds: float
    sum_eta_d: float
    sum_eta_m: float
    sum_eta: float
    avg_eta: float
    n_refined: int
    n_switched_up: int
    n_coarsened: int
    n_switched_down: int


@dataclass
class AdaptiveState:
    levels: dict = field(default_factory=dict)  # pipe id -> ModelLevel
    stepsizes: dict = field(default_factory=dict)  # pipe id -> h [m]
    initial_stepsizes: dict = field(default_factory=dict)
    solution: nlp.NlpSolution = None
    estimates: dict = field(default_factory=dict)  # pipe id -> ErrorEstimate
    eta_m_by_level: dict = field(default_factory=dict)  # pipe id -> {level: eta_m}
    trace: list = field(default_factory=list)


# -- model switch-up rule --------------------------------------------------


def switch_up_target(level, eta_m_at, eps) -> ModelLevel:
    """Next level when switching up: one step if that alone reduces the model
    error by more than eps, otherwise straight to the most accurate model."""
    level = ModelLevel.of(level)
    if level == ModelLevel.FULL:
        return ModelLevel.FULL
    reduction = eta_m_at(level) - eta_m_at(ModelLevel.of(level - 1))
    if reduction > eps:
        return ModelLevel.of(level - 1)
    return ModelLevel.FULL


# -- marking strategies ------------------------------------------------------


def mark_refine(eta_d: dict, theta_d: float) -> set:
    """Greedy bulk marking by descending discretization error."""
    target = theta_d * sum(eta_d.values())
    marked, acc = set(), 0.0
    for pid in sorted(eta_d, key=lambda p: (-eta_d[p], p)):
        if acc >= target:
            break
        marked.add(pid)
        acc += eta_d[pid]
    return marked


def mark_switch_up(eta_m_reduction: dict, theta_m: float, eps: float) -> set:
    """Greedy marking among pipes whose switch-up reduction exceeds eps."""
    eligible = {p: r for p, r in eta_m_reduction.items() if r > eps}
    target = theta_m * sum(eligible.values())
    marked, acc = set(), 0.0
    for pid in sorted(eligible, key=lambda p: (-eligible[p], p)):
        if acc >= target:
            break
        marked.add(pid)
        acc += eligible[pid]
    return marked


def mark_coarsen(eta_d: dict, phi_d: float, eligible=None) -> set:
    """Greedy maximal set by ascending discretization error within the budget.

    Pipes already at their coarsest admissible grid are passed via
    `eligible`; the budget is always taken over all pipes."""
    budget = phi_d * sum(eta_d.values())
    candidates = set(eta_d) if eligible is None else set(eligible)
    marked, acc = set(), 0.0
    for pid in sorted(candidates, key=lambda p: (eta_d[p], p)):
        if acc + eta_d[pid] <= budget:
            marked.add(pid)
            acc += eta_d[pid]
        else:
            break
    return marked


def mark_switch_down(eta_m_increase: dict, phi_m: float, tau: float, eps: float) -> set:
    """Greedy maximal set by ascending model-error increase, restricted to
    pipes whose increase stays below tau * eps."""
    eligible = {p: inc for p, inc in eta_m_increase.items() if inc <= tau * eps}
    budget = phi_m * sum(eligible.values())
    marked, acc = set(), 0.0
    for pid in sorted(eligible, key=lambda p: (eligible[p], p)):
        if acc + eligible[pid] <= budget:
            marked.add(pid)
            acc += eligible[pid]
        else:
            break
    return marked


def is_eps_feasible(estimates, eps: float) -> bool:
    return network_error_summary(estimates) <= eps


def validate_parameters(config: AdaptiveConfig, n_pipes: int) -> list:
    """Check the strict finite-termination inequalities (evaluated with the
    existential constant sent to zero); violations are warnings, not errors."""
    warnings = []
    lhs1 = 0.5 * config.theta_d * config.mu
    rhs1 = config.phi_d
    if not lhs1 > rhs1:
        warnings.append(
            "refinement/coarsening inequality violated: "
            f"0.5 * theta_d * mu = {lhs1} <= phi_d = {rhs1}"
        )
    lhs2 = config.theta_m * config.mu
    rhs2 = config.tau * config.phi_m * n_pipes
    if not lhs2 > rhs2:
        warnings.append(
            "model switching inequality violated: "
            f"theta_m * mu = {lhs2} <= tau * phi_m * n_pipes = {rhs2}"
        )
    return warnings


# -- estimator evaluation ---------------------------------------------------


def _extra_levels(level: ModelLevel):
    # switch-up marking needs eta_m one level up (only meaningful at level 3);
    # switch-down marking needs eta_m at min(level + 1, 3)
    if level == ModelLevel.FRICTION:
        return (ModelLevel.GRAVITY,)
    if level == ModelLevel.GRAVITY:
        return (ModelLevel.FRICTION,)
    return (ModelLevel.GRAVITY,)


def compute_estimates(
    net: Network,
    gas: GasParameters,
    sol: nlp.NlpSolution,
    levels: dict,
    stepsizes: dict,
) -> tuple:
    """Per-pipe estimate bundles at the current NLP solution.

    Evaluation fans out over a thread pool capped by GASADAPT_THREADS;
    results are aggregated in pipe-id order for determinism."""

    def one(pipe):
        q = sol.arc_flows[pipe.id]
        slope = slope_of(pipe, net)
        if q >= 0.0:
            p0 = sol.node_pressures[pipe.from_node]
            q_eff, slope_eff = q, slope
        else:
            # integrate from the pressure-known inlet of the reversed flow
            p0 = sol.node_pressures[pipe.to_node]
            q_eff, slope_eff = -q, -slope
        level = levels[pipe.id]
        return estimate_with_alternatives(
            pipe,
            gas,
            p0,
            q_eff,
            level,
            stepsizes[pipe.id],
            slope=slope_eff,
            extra_levels=_extra_levels(ModelLevel.of(level)),
        )

    pipes = sorted(net.pipes.values(), key=lambda p: p.id)
    workers = estimator_threads()
    if workers == 1:
        bundles = [one(p) for p in pipes]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            bundles = list(pool.map(one, pipes))
    estimates = {p.id: b.estimate for p, b in zip(pipes, bundles)}
    eta_m_by_level = {p.id: b.eta_m_by_level for p, b in zip(pipes, bundles)}
    return estimates, eta_m_by_level


def _switch_up_reductions(levels, estimates, eta_m_by_level, eps):
    """eta_m(level) - eta_m(new level) per pipe, new level from the
    switch-up rule."""
    reductions = {}
    for pid, level in levels.items():
        level = ModelLevel.of(level)
        by_level = dict(eta_m_by_level[pid])
        by_level[ModelLevel.FULL] = 0.0

        def eta_m_at(lv, _by=by_level):
            return _by[ModelLevel.of(lv)]

        target = switch_up_target(level, eta_m_at, eps)
        reductions[pid] = eta_m_at(level) - eta_m_at(target)
    return reductions


def _switch_down_increases(levels, eta_m_by_level):
    """eta_m(min(level+1, 3)) - eta_m(level) for pipes below level 3."""
    increases = {}
    for pid, level in levels.items():
        level = ModelLevel.of(level)
        if level == ModelLevel.FRICTION:
            continue
        by_level = dict(eta_m_by_level[pid])
        by_level[ModelLevel.FULL] = 0.0
        down = ModelLevel.of(min(level + 1, 3))
        increases[pid] = by_level[down] - by_level[level]
    return increases


# -- the control loop --------------------------------------------------------


def run(
    net: Network,
    scn: Scenario,
    gas: GasParameters,
    config: AdaptiveConfig,
    progress=None,
) -> tuple:
    """Adaptive model and discretization control; returns the accepted NLP
    solution and the full adaptation state including the trace."""
    if config.adaptive_eps_opt:
        raise NotImplementedError("adaptive eps_opt tightening is unimplemented")
    if not net.pipes:
        raise EmptyNetwork("adaptive control requires at least one pipe")

    state = AdaptiveState()
    for pid, pipe in net.pipes.items():
        state.levels[pid] = ModelLevel.of(config.initial_level)
        state.stepsizes[pid] = pipe.length / config.initial_intervals
        state.initial_stepsizes[pid] = state.stepsizes[pid]

    eps = config.eps_feasibility
    solve_index = 0
    pending_coarsened = 0
    pending_switched_down = 0

    def solve_and_estimate(warm, outer_k, inner_j, n_ref, n_up):
        nonlocal solve_index, pending_coarsened, pending_switched_down
        pipe_state = {
            pid: (state.levels[pid], state.stepsizes[pid]) for pid in net.pipes
        }
        instance = nlp.assemble(net, scn, gas, pipe_state)
        sol = nlp.solve(instance, warm_start=warm, eps_opt=config.eps_opt)
        if sol.status == nlp.STATUS_INFEASIBLE:
            raise InfeasibleProblem(f"NLP infeasible at solve {solve_index}")
        if sol.status == nlp.STATUS_ITERATION_LIMIT:
            raise IterationLimit(f"NLP hit its iteration limit at solve {solve_index}")
        t0 = time.perf_counter()
        estimates, eta_m_by_level = compute_estimates(
            net, gas, sol, state.levels, state.stepsizes
        )
        ivp_seconds = time.perf_counter() - t0
        state.solution = sol
        state.estimates = estimates
        state.eta_m_by_level = eta_m_by_level
        sum_d = sum(e.eta_d for e in estimates.values())
        sum_m = sum(e.eta_m for e in estimates.values())
        record = TraceRecord(
            solve_index=solve_index,
            outer_k=outer_k,
            inner_j=inner_j,
            n_vars=instance.n_vars,
            n_cons=instance.n_cons,
            nlp_seconds=sol.solve_seconds,
            ivp_seconds=ivp_seconds,
            sum_eta_d=sum_d,
            sum_eta_m=sum_m,
            sum_eta=sum_d + sum_m,
            avg_eta=(sum_d + sum_m) / len(estimates),
            n_refined=n_ref,
            n_switched_up=n_up,
            n_coarsened=pending_coarsened,
            n_switched_down=pending_switched_down,
        )
        pending_coarsened = 0
        pending_switched_down = 0
        state.trace.append(record)
        if progress is not None:
            progress(record)
        solve_index += 1
        return sol

    sol = solve_and_estimate(None, 0, 0, 0, 0)
    if is_eps_feasible(state.estimates.values(), eps):
        return sol, state

    for k in range(1, config.max_outer_iterations + 1):
        for j in range(1, config.mu + 1):
            reductions = _switch_up_reductions(
                state.levels, state.estimates, state.eta_m_by_level, eps
            )
            marked_up = mark_switch_up(reductions, config.theta_m, eps)
            eta_d = {pid: e.eta_d for pid, e in state.estimates.items()}
            marked_refine = mark_refine(eta_d, config.theta_d)

            for pid in marked_up:
                by_level = dict(state.eta_m_by_level[pid])
                by_level[ModelLevel.FULL] = 0.0
                state.levels[pid] = switch_up_target(
                    state.levels[pid],
                    lambda lv, _by=by_level: _by[ModelLevel.of(lv)],
                    eps,
                )
            for pid in marked_refine:
                state.stepsizes[pid] /= 2.0

            sol = solve_and_estimate(sol, k, j, len(marked_refine), len(marked_up))
            if is_eps_feasible(state.estimates.values(), eps):
                return sol, state

        increases = _switch_down_increases(state.levels, state.eta_m_by_level)
        marked_down = mark_switch_down(increases, config.phi_m, config.tau, eps)
        eta_d = {pid: e.eta_d for pid, e in state.estimates.items()}
        coarsenable = {
            pid
            for pid in net.pipes
            if state.stepsizes[pid] < state.initial_stepsizes[pid]
        }
        marked_coarsen = mark_coarsen(eta_d, config.phi_d, eligible=coarsenable)

        for pid in marked_down:
            state.levels[pid] = ModelLevel.of(min(state.levels[pid] + 1, 3))
        for pid in marked_coarsen:
            state.stepsizes[pid] *= 2.0
        pending_coarsened = len(marked_coarsen)
        pending_switched_down = len(marked_down)

    raise IterationLimit(
        f"no eps-feasible solution within {config.max_outer_iterations} outer iterations"
    )
