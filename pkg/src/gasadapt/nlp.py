"""Finite-dimensional NLP assembly and a primal-dual interior-point solver.

The instance carries node pressures, arc flows, compressor lifts, and
interior pipe pressures; each pipe contributes its implicit-Euler relation
per gridpoint as an equality constraint. Internally pressures are scaled
to bar so that residual tolerances are meaningful across the whole
variable vector; the public solution is plain SI.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import InvalidGrid
from .models import ModelLevel
from .network import GasParameters, Network, Scenario, slope_of

PRESSURE_SCALE = 1e5  # internal pressure unit is bar
FLOW_SMOOTHING = 1e-6  # kg/s, smooths |q| q at q = 0
PRESSURE_FLOOR = 1e4  # Pa, protects 1/p terms
DEFAULT_EPS_OPT = 1e-8

STATUS_OPTIMAL = "LocalOptimum"
STATUS_INFEASIBLE = "Infeasible"
STATUS_ITERATION_LIMIT = "IterationLimit"


def _smooth_abs_flow(q):
    """phi(q) = q * sqrt(q^2 + sigma^2), a smooth stand-in for |q| q."""
    return q * math.sqrt(q * q + FLOW_SMOOTHING**2)


def _smooth_abs_flow_d1(q):
    s = math.sqrt(q * q + FLOW_SMOOTHING**2)
    return s + q * q / s


def _smooth_abs_flow_d2(q):
    s = math.sqrt(q * q + FLOW_SMOOTHING**2)
    return q * (2.0 * q * q + 3.0 * FLOW_SMOOTHING**2) / s**3


@dataclass
class _PipeBlock:
    pipe_id: str
    level: ModelLevel
    h: float
    pressure_idx: np.ndarray  # n+1 variable indices, inlet to outlet
    flow_idx: int
    k_coef: float  # h * lambda c^2 / (2 A^2 D) / PRESSURE_SCALE^2 (bar units)
    grav_coef: float  # h * g * s / c^2
    ram_coef: float  # c^2 / (A^2 * PRESSURE_SCALE^2); zero below level 1

    @property
    def n_constraints(self):
        return len(self.pressure_idx) - 1

    def residual(self, x):
        p = x[self.pressure_idx]
        q = x[self.flow_idx]
        pk, pkm1 = p[1:], p[:-1]
        phi = _smooth_abs_flow(q)
        ram = 1.0 - self.ram_coef * q * q / pk**2
        return (pk - pkm1) * ram + self.k_coef * phi / pk + self.grav_coef * pk

    def jacobian_triplets(self, x, row0):
        p = x[self.pressure_idx]
        q = x[self.flow_idx]
        pk, pkm1 = p[1:], p[:-1]
        delta = pk - pkm1
        phi = _smooth_abs_flow(q)
        dphi = _smooth_abs_flow_d1(q)
        bq2 = self.ram_coef * q * q
        ram = 1.0 - bq2 / pk**2
        n = self.n_constraints
        rows = np.concatenate([np.arange(n)] * 3) + row0
        d_pkm1 = -ram
        d_pk = (
            ram
            + 2.0 * delta * bq2 / pk**3
            - self.k_coef * phi / pk**2
            + self.grav_coef
        )
        d_q = (
            -2.0 * delta * self.ram_coef * q / pk**2 + self.k_coef * dphi / pk
        )
        cols = np.concatenate(
            [
                self.pressure_idx[:-1],
                self.pressure_idx[1:],
                np.full(n, self.flow_idx),
            ]
        )
        data = np.concatenate([d_pkm1, d_pk, d_q])
        return rows, cols, data

    def hessian_triplets(self, x, y):
        """Triplets of sum_k y_k * Hess(r_k); lower and upper both emitted."""
        p = x[self.pressure_idx]
        q = x[self.flow_idx]
        pk, pkm1 = p[1:], p[:-1]
        delta = pk - pkm1
        phi = _smooth_abs_flow(q)
        dphi = _smooth_abs_flow_d1(q)
        d2phi = _smooth_abs_flow_d2(q)
        b = self.ram_coef
        bq2 = b * q * q
        h_pk_pk = y * (
            4.0 * bq2 / pk**3
            - 6.0 * delta * bq2 / pk**4
            + 2.0 * self.k_coef * phi / pk**3
        )
        h_pk_pkm1 = y * (-2.0 * bq2 / pk**3)
        h_q_pkm1 = y * (2.0 * b * q / pk**2)
        h_q_pk = y * (
            -2.0 * b * q / pk**2
            + 4.0 * delta * b * q / pk**3
            - self.k_coef * dphi / pk**2
        )
        h_qq = y * (-2.0 * delta * b / pk**2 + self.k_coef * d2phi / pk)
        iq = self.flow_idx
        ipk = self.pressure_idx[1:]
        ipkm1 = self.pressure_idx[:-1]
        nfull = np.full(len(pk), iq)
        rows = np.concatenate([ipk, ipk, ipkm1, ipkm1, nfull, ipk, nfull, nfull])
        cols = np.concatenate([ipk, ipkm1, ipk, nfull, ipkm1, nfull, ipk, nfull])
        data = np.concatenate(
            [h_pk_pk, h_pk_pkm1, h_pk_pkm1, h_q_pkm1, h_q_pkm1, h_q_pk, h_q_pk, h_qq]
        )
        return rows, cols, data


@dataclass
class NlpInstance:
    net: Network
    scn: Scenario
    gas: GasParameters
    state: dict  # pipe id -> (ModelLevel, stepsize)
    n_vars: int = 0
    node_idx: dict = field(default_factory=dict)
    flow_idx: dict = field(default_factory=dict)
    lift_idx: dict = field(default_factory=dict)
    interior_idx: dict = field(default_factory=dict)  # pipe id -> ndarray
    n_intervals: dict = field(default_factory=dict)  # pipe id -> n
    lb: np.ndarray = None
    ub: np.ndarray = None
    grad: np.ndarray = None  # linear objective gradient (scaled units)
    linear_A: sp.csr_matrix = None
    linear_b: np.ndarray = None
    pipe_blocks: list = field(default_factory=list)
    n_cons: int = 0

    # -- evaluation in scaled units -------------------------------------

    def objective(self, x):
        return float(self.grad @ x)

    def constraints(self, x):
        parts = [self.linear_A @ x - self.linear_b]
        for block in self.pipe_blocks:
            parts.append(block.residual(x))
        return np.concatenate(parts)

    def jacobian(self, x):
        rows, cols, data = [], [], []
        coo = self.linear_A.tocoo()
        rows.append(coo.row)
        cols.append(coo.col)
        data.append(coo.data)
        row0 = self.linear_A.shape[0]
        for block in self.pipe_blocks:
            r, c, d = block.jacobian_triplets(x, row0)
            rows.append(r)
            cols.append(c)
            data.append(d)
            row0 += block.n_constraints
        return sp.csr_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.n_cons, self.n_vars),
        )

    def lagrangian_hessian(self, x, y):
        rows, cols, data = [], [], []
        row0 = self.linear_A.shape[0]
        for block in self.pipe_blocks:
            yb = y[row0 : row0 + block.n_constraints]
            r, c, d = block.hessian_triplets(x, yb)
            rows.append(r)
            cols.append(c)
            data.append(d)
            row0 += block.n_constraints
        if not rows:
            return sp.csr_matrix((self.n_vars, self.n_vars))
        return sp.csr_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.n_vars, self.n_vars),
        )

    def dump(self, x=None):
        """Plain-text listing of the instance, optionally with residuals at x."""
        lines = [f"nlp instance: {self.n_vars} variables, {self.n_cons} constraints"]
        names = self.variable_names()
        for i, name in enumerate(names):
            entry = f"  var {i:5d} {name:30s} in [{self.lb[i]:.6g}, {self.ub[i]:.6g}]"
            if self.grad[i] != 0.0:
                entry += f" obj_coef {self.grad[i]:.6g}"
            if x is not None:
                entry += f" value {x[i]:.10g}"
            lines.append(entry)
        if x is not None:
            c = self.constraints(x)
            lines.append(f"  max constraint violation {np.max(np.abs(c)):.3e}")
        return "\n".join(lines)

    def variable_names(self):
        names = [""] * self.n_vars
        for node, i in self.node_idx.items():
            names[i] = f"p[{node}]"
        for arc, i in self.flow_idx.items():
            names[i] = f"q[{arc}]"
        for comp, i in self.lift_idx.items():
            names[i] = f"dp[{comp}]"
        for pipe, idx in self.interior_idx.items():
            for k, i in enumerate(idx, start=1):
                names[i] = f"p[{pipe},{k}]"
        return names


@dataclass
class NlpSolution:
    status: str
    objective: float  # SI cost units
    node_pressures: dict  # Pa
    arc_flows: dict  # kg/s
    compressor_lifts: dict  # Pa
    interior_pressures: dict  # pipe id -> ndarray of n-1 values, Pa
    kkt_error: float
    n_iterations: int
    solve_seconds: float = 0.0
    # converged multipliers (y, zl, zu) for warm starts; only reusable on an
    # instance with identical dimensions
    duals: tuple = None

    def pipe_inlet(self, pipe):
        """Inlet node id and pressure for the flow direction on this pipe."""
        q = self.arc_flows[pipe.id]
        node = pipe.from_node if q >= 0.0 else pipe.to_node
        return node, self.node_pressures[node]


def assemble(
    net: Network, scn: Scenario, gas: GasParameters, state: dict
) -> NlpInstance:
    """Build the NLP for the given per-pipe (level, stepsize) assignment."""
    inst = NlpInstance(net=net, scn=scn, gas=gas, state=dict(state))
    c2 = gas.specific_gas_constant * gas.temperature * gas.compressibility

    idx = 0
    lb, ub, grad = [], [], []

    def add_var(lo, hi, cost=0.0):
        nonlocal idx
        lb.append(lo)
        ub.append(hi)
        grad.append(cost)
        idx += 1
        return idx - 1

    for node in net.nodes.values():
        inst.node_idx[node.id] = add_var(
            max(node.pressure_min, PRESSURE_FLOOR) / PRESSURE_SCALE,
            node.pressure_max / PRESSURE_SCALE,
        )
    for arc in list(net.pipes.values()) + list(net.compressors.values()):
        inst.flow_idx[arc.id] = add_var(arc.flow_min, arc.flow_max)
    for comp in net.compressors.values():
        # objective is cost per Pa of lift; lift variable is in bar
        inst.lift_idx[comp.id] = add_var(
            0.0, comp.lift_max / PRESSURE_SCALE, cost=comp.cost_coeff * PRESSURE_SCALE
        )
    for pipe in net.pipes.values():
        level, h = state[pipe.id]
        n = round(pipe.length / h)
        if n % 4 != 0 or not math.isclose(n * h, pipe.length, rel_tol=1e-9):
            raise InvalidGrid(f"pipe {pipe.id}: L/h must be a multiple of 4")
        inst.n_intervals[pipe.id] = n
        interior = np.array(
            [
                add_var(PRESSURE_FLOOR / PRESSURE_SCALE, np.inf)
                for _ in range(n - 1)
            ],
            dtype=int,
        )
        inst.interior_idx[pipe.id] = interior

    inst.n_vars = idx
    inst.lb = np.array(lb)
    inst.ub = np.array(ub)
    inst.grad = np.array(grad)

    # linear constraints: mass balance per node, compressor coupling
    rows, cols, data, rhs = [], [], [], []
    row = 0
    for node_id in net.nodes:
        for arc in net.in_arcs(node_id):
            rows.append(row)
            cols.append(inst.flow_idx[arc.id])
            data.append(1.0)
        for arc in net.out_arcs(node_id):
            rows.append(row)
            cols.append(inst.flow_idx[arc.id])
            data.append(-1.0)
        rhs.append(scn.flow_at(node_id))
        row += 1
    for comp in net.compressors.values():
        rows.extend([row, row, row])
        cols.extend(
            [
                inst.node_idx[comp.to_node],
                inst.node_idx[comp.from_node],
                inst.lift_idx[comp.id],
            ]
        )
        data.extend([1.0, -1.0, -1.0])
        rhs.append(0.0)
        row += 1
    inst.linear_A = sp.csr_matrix(
        (data, (rows, cols)), shape=(row, inst.n_vars)
    )
    inst.linear_b = np.array(rhs)

    for pipe in net.pipes.values():
        level, h = state[pipe.id]
        level = ModelLevel.of(level)
        slope = slope_of(pipe, net)
        pressure_idx = np.concatenate(
            [
                [inst.node_idx[pipe.from_node]],
                inst.interior_idx[pipe.id],
                [inst.node_idx[pipe.to_node]],
            ]
        ).astype(int)
        k_coef = (
            h
            * pipe.friction
            * c2
            / (2.0 * pipe.cross_area**2 * pipe.diameter)
            / PRESSURE_SCALE**2
        )
        grav_coef = (
            h * gas.gravity * slope / c2 if level != ModelLevel.FRICTION else 0.0
        )
        ram_coef = (
            c2 / (pipe.cross_area**2 * PRESSURE_SCALE**2)
            if level == ModelLevel.FULL
            else 0.0
        )
        inst.pipe_blocks.append(
            _PipeBlock(
                pipe_id=pipe.id,
                level=level,
                h=h,
                pressure_idx=pressure_idx,
                flow_idx=inst.flow_idx[pipe.id],
                k_coef=k_coef,
                grav_coef=grav_coef,
                ram_coef=ram_coef,
            )
        )
    inst.n_cons = inst.linear_A.shape[0] + sum(
        b.n_constraints for b in inst.pipe_blocks
    )
    return inst


# -- warm starting -------------------------------------------------------


def _initial_point(inst: NlpInstance, warm_start: NlpSolution = None) -> np.ndarray:
    x = np.zeros(inst.n_vars)
    finite_lb = np.where(np.isfinite(inst.lb), inst.lb, 0.0)
    finite_ub = np.where(np.isfinite(inst.ub), inst.ub, finite_lb + 100.0)
    x[:] = 0.5 * (finite_lb + finite_ub)

    if warm_start is None:
        # default interior pipe pressures: linear between endpoint midpoints
        for pipe in inst.net.pipes.values():
            idx = inst.interior_idx[pipe.id]
            if len(idx) == 0:
                continue
            p_from = x[inst.node_idx[pipe.from_node]]
            p_to = x[inst.node_idx[pipe.to_node]]
            frac = np.arange(1, len(idx) + 1) / (len(idx) + 1)
            x[idx] = p_from + frac * (p_to - p_from)
        return x

    for node, i in inst.node_idx.items():
        if node in warm_start.node_pressures:
            x[i] = warm_start.node_pressures[node] / PRESSURE_SCALE
    for arc, i in inst.flow_idx.items():
        if arc in warm_start.arc_flows:
            x[i] = warm_start.arc_flows[arc]
    for comp, i in inst.lift_idx.items():
        if comp in warm_start.compressor_lifts:
            x[i] = warm_start.compressor_lifts[comp] / PRESSURE_SCALE
    for pipe in inst.net.pipes.values():
        idx = inst.interior_idx[pipe.id]
        if len(idx) == 0:
            continue
        old = warm_start.interior_pressures.get(pipe.id)
        p_from = warm_start.node_pressures.get(pipe.from_node)
        p_to = warm_start.node_pressures.get(pipe.to_node)
        if old is None or p_from is None or p_to is None:
            p_from_bar = x[inst.node_idx[pipe.from_node]]
            p_to_bar = x[inst.node_idx[pipe.to_node]]
            frac = np.arange(1, len(idx) + 1) / (len(idx) + 1)
            x[idx] = p_from_bar + frac * (p_to_bar - p_from_bar)
            continue
        old_profile = np.concatenate([[p_from], np.asarray(old), [p_to]])
        old_pos = np.linspace(0.0, 1.0, len(old_profile))
        new_pos = np.arange(1, len(idx) + 1) / (len(idx) + 1)
        x[idx] = np.interp(new_pos, old_pos, old_profile) / PRESSURE_SCALE
    return x


def _extract_solution(inst, x, status, kkt_error, iterations, seconds, duals=None):
    node_pressures = {
        node: float(x[i]) * PRESSURE_SCALE for node, i in inst.node_idx.items()
    }
    arc_flows = {arc: float(x[i]) for arc, i in inst.flow_idx.items()}
    lifts = {
        comp: float(x[i]) * PRESSURE_SCALE for comp, i in inst.lift_idx.items()
    }
    interior = {
        pipe: x[idx] * PRESSURE_SCALE for pipe, idx in inst.interior_idx.items()
    }
    objective = sum(
        inst.net.compressors[comp].cost_coeff * lifts[comp] for comp in lifts
    )
    return NlpSolution(
        status=status,
        objective=objective,
        node_pressures=node_pressures,
        arc_flows=arc_flows,
        compressor_lifts=lifts,
        interior_pressures=interior,
        kkt_error=kkt_error,
        n_iterations=iterations,
        solve_seconds=seconds,
        duals=duals,
    )


# -- interior-point solver ------------------------------------------------


def solve(
    inst: NlpInstance,
    warm_start: NlpSolution = None,
    eps_opt: float = DEFAULT_EPS_OPT,
    max_iterations: int = 500,
) -> NlpSolution:
    """Primal-dual interior-point solve with a logarithmic barrier on bounds,
    damped Newton steps on the perturbed KKT system, and a
    fraction-to-the-boundary rule."""
    t0 = time.perf_counter()
    n, m = inst.n_vars, inst.n_cons
    lb, ub = inst.lb.copy(), inst.ub.copy()

    fixed = (ub - lb) <= 1e-12 * np.maximum(1.0, np.abs(lb))
    has_lb = np.isfinite(lb) & ~fixed
    has_ub = np.isfinite(ub) & ~fixed

    x = _initial_point(inst, warm_start)
    x[fixed] = lb[fixed]
    # push strictly inside the bounds; a warm start is presumed near-optimal,
    # so barely perturb it
    margin = 1e-12 if warm_start is not None else 1e-2
    gap = np.where(np.isfinite(ub - lb), ub - lb, np.inf)
    push = np.minimum(margin * np.maximum(1.0, np.abs(lb)), 1e-2 * gap)
    push_u = np.minimum(margin * np.maximum(1.0, np.abs(ub)), 1e-2 * gap)
    x[has_lb] = np.maximum(x[has_lb], lb[has_lb] + push[has_lb])
    x[has_ub] = np.minimum(x[has_ub], ub[has_ub] - push_u[has_ub])

    free = ~fixed
    mu_min = max(eps_opt / 10.0, 1e-14)

    y = np.zeros(m)
    reused_duals = (
        warm_start is not None
        and warm_start.duals is not None
        and len(warm_start.duals[0]) == m
        and len(warm_start.duals[1]) == n
    )
    if reused_duals:
        # identical instance dimensions: continue from the converged
        # multipliers so a solve from an exact solution terminates immediately
        y = warm_start.duals[0].copy()
        zl = np.where(has_lb, np.maximum(warm_start.duals[1], 1e-16), 0.0)
        zu = np.where(has_ub, np.maximum(warm_start.duals[2], 1e-16), 0.0)
        mu = mu_min
    elif warm_start is not None:
        mu = 1e-3
        zl = np.where(has_lb, mu / np.maximum(x - lb, 1e-8), 0.0)
        zu = np.where(has_ub, mu / np.maximum(ub - x, 1e-8), 0.0)
        zl = np.clip(zl, 0.0, 1e8) * has_lb
        zu = np.clip(zu, 0.0, 1e8) * has_ub
    else:
        mu = 0.1
        zl = np.where(has_lb, mu / np.maximum(x - lb, 1e-8), 0.0)
        zu = np.where(has_ub, mu / np.maximum(ub - x, 1e-8), 0.0)
        zl = np.clip(zl, 0.0, 1e8) * has_lb
        zu = np.clip(zu, 0.0, 1e8) * has_ub
    delta_w = 0.0
    nu = 1.0  # l1 penalty weight for the merit function
    best_viol = np.inf
    stall = 0

    def kkt_errors(x, y, zl, zu, mu):
        g = inst.grad + inst.jacobian(x).T @ y - zl + zu
        c = inst.constraints(x)
        comp_l = np.zeros(n)
        comp_l[has_lb] = (x[has_lb] - lb[has_lb]) * zl[has_lb] - mu
        comp_u = np.zeros(n)
        comp_u[has_ub] = (ub[has_ub] - x[has_ub]) * zu[has_ub] - mu
        s_d = max(
            1.0,
            (np.sum(np.abs(y)) + np.sum(zl) + np.sum(zu)) / max(1, m + n) / 100.0,
        )
        e_dual = np.max(np.abs(g[free])) / s_d if free.any() else 0.0
        e_primal = np.max(np.abs(c)) if m else 0.0
        e_comp = max(
            np.max(np.abs(comp_l), initial=0.0), np.max(np.abs(comp_u), initial=0.0)
        ) / s_d
        return e_dual, e_primal, e_comp

    def barrier_value(x):
        val = inst.objective(x)
        if has_lb.any():
            val -= mu * np.sum(np.log(np.maximum(x[has_lb] - lb[has_lb], 1e-300)))
        if has_ub.any():
            val -= mu * np.sum(np.log(np.maximum(ub[has_ub] - x[has_ub], 1e-300)))
        return val

    iterations = 0
    status = STATUS_ITERATION_LIMIT
    while iterations < max_iterations:
        iterations += 1
        e_dual, e_primal, e_comp = kkt_errors(x, y, zl, zu, 0.0)
        kkt = max(e_dual, e_primal, e_comp)
        if kkt <= eps_opt:
            status = STATUS_OPTIMAL
            break
        if not np.isfinite(kkt):
            status = (
                STATUS_INFEASIBLE
                if best_viol > 1e4 * eps_opt
                else STATUS_ITERATION_LIMIT
            )
            break

        # infeasibility heuristic: constraint violation stalls well above tol
        if e_primal < best_viol * 0.9999:
            best_viol = e_primal
            stall = 0
        else:
            stall += 1
        if stall >= 30 and best_viol > 1e4 * eps_opt:
            status = STATUS_INFEASIBLE
            break

        e_dual_mu, e_primal_mu, e_comp_mu = kkt_errors(x, y, zl, zu, mu)
        if max(e_dual_mu, e_primal_mu, e_comp_mu) <= 10.0 * mu and mu > mu_min:
            mu = max(mu_min, 0.2 * mu)
            continue

        c = inst.constraints(x)
        J = inst.jacobian(x)
        g = inst.grad + J.T @ y - zl + zu
        sl = np.where(has_lb, x - lb, 1.0)
        su = np.where(has_ub, ub - x, 1.0)
        sigma = np.where(has_lb, zl / sl, 0.0) + np.where(has_ub, zu / su, 0.0)
        # condensed dual residual with the complementarity equations folded in
        rd = inst.grad + J.T @ y
        rd = rd - np.where(has_lb, mu / sl, 0.0) + np.where(has_ub, mu / su, 0.0)

        W = inst.lagrangian_hessian(x, y)
        nfree = int(np.sum(free))
        free_idx = np.where(free)[0]
        pos = -np.ones(n, dtype=int)
        pos[free_idx] = np.arange(nfree)

        Wff = W[free_idx][:, free_idx]
        Jf = J[:, free_idx]
        rd_f = rd[free_idx]
        sigma_f = sigma[free_idx]

        solved = False
        trial_delta = delta_w
        for _ in range(12):
            H = Wff + sp.diags(sigma_f + trial_delta)
            K = sp.bmat(
                [[H, Jf.T], [Jf, -sp.eye(m) * 1e-12]], format="csc"
            )
            rhs_kkt = np.concatenate([-rd_f, -c])
            try:
                lu = spla.splu(K)
                step = lu.solve(rhs_kkt)
                # one round of iterative refinement sharpens the attainable
                # KKT tolerance near convergence
                step -= lu.solve(K @ step - rhs_kkt)
            except (RuntimeError, ValueError):
                trial_delta = max(1e-8, 10.0 * trial_delta, 1e-8)
                continue
            if np.all(np.isfinite(step)):
                solved = True
                break
            trial_delta = max(1e-8, 10.0 * trial_delta)
        if not solved:
            status = STATUS_ITERATION_LIMIT
            break
        delta_w = trial_delta / 3.0 if trial_delta > 0 else 0.0

        dx = np.zeros(n)
        dx[free_idx] = step[:nfree]
        dy = step[nfree:]
        dzl = np.where(has_lb, (mu - zl * dx) / sl - zl, 0.0)
        dzu = np.where(has_ub, (mu + zu * dx) / su - zu, 0.0)

        # fraction-to-the-boundary
        tau = max(0.99, 1.0 - mu)
        alpha_p = 1.0
        neg = has_lb & (dx < 0.0)
        if neg.any():
            alpha_p = min(alpha_p, np.min(-tau * sl[neg] / dx[neg]))
        posi = has_ub & (dx > 0.0)
        if posi.any():
            alpha_p = min(alpha_p, np.min(tau * su[posi] / dx[posi]))
        alpha_d = 1.0
        negz = (dzl < 0.0) & has_lb & (zl > 0.0)
        if negz.any():
            alpha_d = min(alpha_d, np.min(-tau * zl[negz] / dzl[negz]))
        negz = (dzu < 0.0) & has_ub & (zu > 0.0)
        if negz.any():
            alpha_d = min(alpha_d, np.min(-tau * zu[negz] / dzu[negz]))

        # Armijo backtracking on the l1 merit function
        nu = max(nu, 2.0 * np.max(np.abs(y), initial=0.0) + 1.0)
        viol0 = np.sum(np.abs(c))
        phi0 = barrier_value(x) + nu * viol0
        dphi = inst.grad @ dx - nu * viol0
        if has_lb.any():
            dphi -= mu * np.sum(dx[has_lb] / sl[has_lb])
        if has_ub.any():
            dphi += mu * np.sum(dx[has_ub] / su[has_ub])
        alpha = alpha_p
        accepted = False
        for _ in range(30):
            x_trial = x + alpha * dx
            c_trial = inst.constraints(x_trial)
            phi_trial = (
                inst.objective(x_trial)
                + nu * np.sum(np.abs(c_trial))
            )
            if has_lb.any():
                phi_trial -= mu * np.sum(
                    np.log(np.maximum(x_trial[has_lb] - lb[has_lb], 1e-300))
                )
            if has_ub.any():
                phi_trial -= mu * np.sum(
                    np.log(np.maximum(ub[has_ub] - x_trial[has_ub], 1e-300))
                )
            if phi_trial <= phi0 + 1e-4 * alpha * min(dphi, 0.0) or phi_trial < phi0:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            # fall back to a tiny step to escape; if it persists the stall
            # counter above will trigger
            alpha = min(alpha_p, 1e-8)
            x_trial = x + alpha * dx

        x = x_trial
        # keep a machine-precision slack so 1/sl and 1/su stay finite even
        # when an infeasible instance pushes the iterate onto its bounds
        lb_l = lb[has_lb]
        x[has_lb] = np.maximum(x[has_lb], lb_l + 1e-12 * np.maximum(1.0, np.abs(lb_l)))
        ub_u = ub[has_ub]
        x[has_ub] = np.minimum(x[has_ub], ub_u - 1e-12 * np.maximum(1.0, np.abs(ub_u)))
        y = y + alpha_d * dy
        zl = np.where(has_lb, np.clip(zl + alpha_d * dzl, 1e-16, 1e16), 0.0)
        zu = np.where(has_ub, np.clip(zu + alpha_d * dzu, 1e-16, 1e16), 0.0)
        # clip duals so sigma stays within a bounded multiple of mu/slack
        zl = np.where(has_lb, np.clip(zl, mu / (1e10 * sl), 1e10 * mu / sl), 0.0)
        zu = np.where(has_ub, np.clip(zu, mu / (1e10 * su), 1e10 * mu / su), 0.0)

    e_dual, e_primal, e_comp = kkt_errors(x, y, zl, zu, 0.0)
    kkt = max(e_dual, e_primal, e_comp)
    if status == STATUS_ITERATION_LIMIT and kkt <= eps_opt:
        status = STATUS_OPTIMAL
    seconds = time.perf_counter() - t0
    return _extract_solution(
        inst, x, status, kkt, iterations, seconds, duals=(y, zl, zu)
    )
