"""Switching Mirror Descent for problems with functional constraints.

Two adaptive variants: one for Lipschitz objectives (with primal-dual
reconstruction of approximate Lagrange multipliers) and one for general,
possibly non-Lipschitz objectives.  Steps alternate between "productive"
iterations driven by the objective subgradient (constraint satisfied at
level eps) and "non-productive" iterations driven by the constraint
subgradient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .oracles import aggregate_max
from .report import RunTrace, TraceRow


class InfeasibleAtEpsError(RuntimeError):
    pass


@dataclass
class ConstrainedReport:
    x_bar: np.ndarray
    f_bar: float
    g_bar: float
    iterations: int
    productive: int
    oracle_calls: int
    trace: RunTrace
    lambda_bar: np.ndarray | None = None
    iteration_bound: int | None = None
    theta0_sq_used: float = float("nan")
    no_productive_steps: bool = False   # infeasibility-at-eps diagnostic
    extras: dict = field(default_factory=dict)


def _iteration_bound(m_f, m_g, theta0_sq, eps):
    if m_f is None or m_g is None:
        return None
    return math.ceil(2.0 * max(m_f**2, m_g**2) * theta0_sq / eps**2)


def solve_constrained_nonsmooth(problem, setup, eps, max_iter=10**7,
                                keep_iterates=False):
    """Switching Mirror Descent for a Lipschitz objective and constraint.

    Steps h_k = eps / M_k^2 with M_k the dual norm of the driving
    subgradient; stops once sum_j 1/M_j^2 >= 2 Theta_0^2 / eps^2.  Returns
    the productive-step average and the approximate dual multipliers grouped
    by active constraint index.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if problem.constraints is None:
        raise ValueError("problem has no constraint bundle")
    theta0_sq = setup.theta0_sq
    if theta0_sq is None:
        raise ValueError("setup.theta0_sq is required")
    m = len(problem.constraints)
    x = setup.prox_center()
    trace = RunTrace()
    iterates = [] if keep_iterates else None
    stop_target = 2.0 * theta0_sq / eps**2
    stop_sum = 0.0
    weighted = np.zeros_like(x)
    h_prod_sum = 0.0
    n_prod = 0
    lam_raw = np.zeros(m)
    calls = 0
    k = 0
    while True:
        g_resp = aggregate_max(problem.constraints, x)
        calls += 1
        if g_resp.value <= eps:
            f_resp = problem.objective(x)
            calls += 1
            m_k = setup.dual_norm(f_resp.subgradient)
            if m_k == 0.0:
                # current productive point is optimal among feasible-at-eps
                h_k = 1.0
                weighted += h_k * x
                h_prod_sum += h_k
                n_prod += 1
                stop_sum = stop_target
                trace.append(TraceRow(k, f_resp.value, g_value=g_resp.value,
                                      step=h_k, M_k=0.0, oracle_calls=calls))
                k += 1
                break
            h_k = eps / m_k**2
            step_grad = f_resp.subgradient
            weighted += h_k * x
            h_prod_sum += h_k
            n_prod += 1
            f_val = f_resp.value
        else:
            m_k = setup.dual_norm(g_resp.subgradient)
            if m_k == 0.0:
                raise InfeasibleAtEpsError(
                    "zero constraint subgradient on a non-productive step")
            h_k = eps / m_k**2
            step_grad = g_resp.subgradient
            lam_raw[g_resp.active_index - 1] += h_k
            f_val = float("nan")
        if keep_iterates:
            iterates.append(x.copy())
        trace.append(TraceRow(k, f_val, g_value=g_resp.value, step=h_k,
                              M_k=m_k, oracle_calls=calls))
        x = setup.mirror_step(x, h_k * step_grad)
        stop_sum += 1.0 / m_k**2
        k += 1
        if stop_sum >= stop_target:
            break
        if k >= max_iter:
            raise RuntimeError("iteration cap reached before the stop rule")
    if n_prod == 0:
        return ConstrainedReport(
            x_bar=x, f_bar=float("nan"), g_bar=float("nan"), iterations=k,
            productive=0, oracle_calls=calls, trace=trace,
            no_productive_steps=True, theta0_sq_used=theta0_sq,
            iteration_bound=_iteration_bound(problem.lipschitz_f,
                                             problem.lipschitz_g,
                                             theta0_sq, eps))
    x_bar = weighted / h_prod_sum
    lambda_bar = lam_raw / h_prod_sum
    f_bar = problem.objective(x_bar).value
    g_bar = aggregate_max(problem.constraints, x_bar).value
    calls += 2
    return ConstrainedReport(
        x_bar=x_bar, f_bar=f_bar, g_bar=g_bar, iterations=k,
        productive=n_prod, oracle_calls=calls, trace=trace,
        lambda_bar=lambda_bar, theta0_sq_used=theta0_sq,
        iteration_bound=_iteration_bound(problem.lipschitz_f,
                                         problem.lipschitz_g, theta0_sq, eps),
        extras={"iterates": iterates, "h_prod_sum": h_prod_sum},
    )


def solve_constrained_general(problem, setup, eps, max_iter=10**7,
                              keep_iterates=False):
    """Switching Mirror Descent for a general (maybe non-Lipschitz) objective.

    Productive steps use h_k = eps/||grad f||_*, non-productive
    h_k = eps/||grad g||_*^2; stops once |I| + sum_{j in J} 1/||grad g||_*^2
    >= 2 Theta_0^2 / eps^2.  Returns the best productive iterate.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if problem.constraints is None:
        raise ValueError("problem has no constraint bundle")
    theta0_sq = setup.theta0_sq
    if theta0_sq is None:
        raise ValueError("setup.theta0_sq is required")
    x = setup.prox_center()
    trace = RunTrace()
    iterates = [] if keep_iterates else None
    productive_points = []
    stop_target = 2.0 * theta0_sq / eps**2
    stop_sum = 0.0
    best_f, best_x = math.inf, None
    n_prod = 0
    calls = 0
    k = 0
    while True:
        g_resp = aggregate_max(problem.constraints, x)
        calls += 1
        if g_resp.value <= eps:
            f_resp = problem.objective(x)
            calls += 1
            nf = setup.dual_norm(f_resp.subgradient)
            if f_resp.value < best_f:
                best_f, best_x = f_resp.value, x.copy()
            productive_points.append(x.copy())
            n_prod += 1
            if nf == 0.0:
                trace.append(TraceRow(k, f_resp.value, g_value=g_resp.value,
                                      step=float("inf"), M_k=0.0,
                                      oracle_calls=calls))
                k += 1
                break
            h_k = eps / nf
            step_grad = f_resp.subgradient
            stop_sum += 1.0
            f_val = f_resp.value
            m_k = nf
        else:
            ng = setup.dual_norm(g_resp.subgradient)
            if ng == 0.0:
                raise InfeasibleAtEpsError(
                    "zero constraint subgradient on a non-productive step")
            h_k = eps / ng**2
            step_grad = g_resp.subgradient
            stop_sum += 1.0 / ng**2
            f_val = float("nan")
            m_k = ng
        if keep_iterates:
            iterates.append(x.copy())
        trace.append(TraceRow(k, f_val, g_value=g_resp.value, step=h_k,
                              M_k=m_k, oracle_calls=calls))
        x = setup.mirror_step(x, h_k * step_grad)
        k += 1
        if stop_sum >= stop_target:
            break
        if k >= max_iter:
            raise RuntimeError("iteration cap reached before the stop rule")
    if n_prod == 0:
        return ConstrainedReport(
            x_bar=x, f_bar=float("nan"), g_bar=float("nan"), iterations=k,
            productive=0, oracle_calls=calls, trace=trace,
            no_productive_steps=True, theta0_sq_used=theta0_sq)
    g_best = aggregate_max(problem.constraints, best_x).value
    calls += 1
    m_g = problem.lipschitz_g
    it_bound = None if m_g is None else \
        math.ceil(2.0 * max(1.0, m_g**2) * theta0_sq / eps**2)
    rep = ConstrainedReport(
        x_bar=best_x, f_bar=best_f, g_bar=g_best, iterations=k,
        productive=n_prod, oracle_calls=calls, trace=trace,
        theta0_sq_used=theta0_sq, iteration_bound=it_bound,
        extras={"iterates": iterates, "productive_points": productive_points},
    )
    if problem.x_star is not None:
        rep.extras["min_vf"] = min(
            directional_merit(problem, setup, problem.x_star, p)
            for p in productive_points)
    return rep


def directional_merit(problem, setup, y, x):
    """<grad f(x)/||grad f(x)||_*, x - y>, the normalized-subgradient merit
    used by the general-objective convergence guarantee (0 at zero grad)."""
    resp = problem.objective(x)
    nrm = setup.dual_norm(resp.subgradient)
    if nrm == 0.0:
        return 0.0
    return float(resp.subgradient @ (np.asarray(x) - np.asarray(y))) / nrm


@dataclass
class Certificates:
    f_bar: float
    g_bar: float
    phi_lambda: float
    duality_gap: float
    eps_tilde: float | None = None


def certify(problem, report, lagrangian_minimizer, eps=None,
            grad_norms_at_opt=None, lipschitz_grads=None):
    """Primal-dual certificates for a ConstrainedReport.

    ``lagrangian_minimizer(lambda)`` must return
    min_{x in X} f(x) + sum_i lambda_i g_i(x) exactly for the instance family.
    When per-piece gradient data is supplied, the smooth-pieces accuracy
    eps_tilde = max(eps, eps*max_i||grad f_i(x*)||_* + eps^2 max_i L_i / 2)
    is evaluated as well.
    """
    lam = report.lambda_bar
    if lam is None:
        raise ValueError("report carries no dual multipliers")
    if np.any(lam < 0):
        raise ValueError("negative multiplier in lambda_bar")
    phi = float(lagrangian_minimizer(lam))
    gap = report.f_bar - phi
    eps_tilde = None
    if eps is not None and grad_norms_at_opt is not None and lipschitz_grads is not None:
        eps_tilde = max(eps, eps * max(grad_norms_at_opt)
                        + eps**2 * max(lipschitz_grads) / 2.0)
    return Certificates(f_bar=report.f_bar, g_bar=report.g_bar,
                        phi_lambda=phi, duality_gap=float(gap),
                        eps_tilde=eps_tilde)
