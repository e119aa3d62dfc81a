"""Configuration-driven experiment runner.

One JSON config describes one experiment: a problem (generator name, sizes,
seed), a method with its parameters, and a prox setup choice.  The runner
writes a trace CSV plus a summary JSON and can check the recorded theorem
bounds.  Identical configs produce byte-identical CSVs; the elapsed_ns
column is informational and excluded from the determinism hash.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from pathlib import Path

import numpy as np
from scipy.optimize import linprog

from . import constrained, mirrorprox, problems, smoothing, subgradient
from .geometry import FeasibleSet, ProxSetup, entropy_setup, euclidean_setup
from .oracles import FunctionOracle, ProblemInstance
from .report import TRACE_COLUMNS

BOUND_SLACK = 1e-9


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# trace serialization
# ---------------------------------------------------------------------------

_INT_COLUMNS = {"k", "oracle_calls", "elapsed_ns"}


def _fmt(col, x):
    if col in _INT_COLUMNS:
        return str(int(x))
    xf = float(x)
    if math.isnan(xf):
        return "nan"
    if math.isinf(xf):
        return "inf" if xf > 0 else "-inf"
    return format(xf, ".17g")


def trace_csv_text(trace, elapsed_ns=None):
    """CSV body with the fixed header; LF endings, '.' decimal, 17 digits."""
    lines = [",".join(TRACE_COLUMNS)]
    for row in trace:
        vals = []
        for col in TRACE_COLUMNS:
            v = getattr(row, col)
            if col == "elapsed_ns" and elapsed_ns is not None:
                v = elapsed_ns
            vals.append(_fmt(col, v))
        lines.append(",".join(vals))
    return "\n".join(lines) + "\n"


def trace_hash(trace):
    """SHA-256 of the CSV serialization with elapsed_ns forced to zero."""
    text = trace_csv_text(trace, elapsed_ns=0)
    return hashlib.sha256(text.encode("ascii")).hexdigest()


def fit_rate(k, values):
    """Least-squares slope of log(value) vs log(k) over the trailing half."""
    k = np.asarray(k, dtype=float)
    values = np.asarray(values, dtype=float)
    if k.size < 10:
        raise ValueError("need at least 10 rows")
    half = k.size // 2
    k, values = k[half:], values[half:]
    if np.any(values <= 0) or np.any(k <= 0):
        raise ValueError("non-positive values in the fitted column")
    return float(np.polyfit(np.log(k), np.log(values), 1)[0])


# ---------------------------------------------------------------------------
# problem builders
# ---------------------------------------------------------------------------

def _build_abs_value(params, seed):
    n = int(params.get("dim", 1))
    oracle = FunctionOracle(lambda x: np.abs(x).sum(), np.sign)
    prob = ProblemInstance(
        objective=oracle, set=FeasibleSet.all_space(n),
        lipschitz_f=float(np.sqrt(n)), f_star=0.0, x_star=np.zeros(n),
        meta={"holder": (0.0, 2.0 * math.sqrt(n))})
    return prob, "convex"


def _build_quadratic_box(params, seed):
    n = int(params.get("dim", 4))
    rng = np.random.default_rng(seed)
    t = rng.uniform(-1.0, 1.0, size=n)
    oracle = FunctionOracle(lambda x: 0.5 * np.sum((x - t) ** 2),
                            lambda x: x - t)
    prob = ProblemInstance(
        objective=oracle,
        set=FeasibleSet.box(np.full(n, -1.0), np.full(n, 1.0)),
        f_star=0.0, x_star=t.copy(),
        meta={"holder": (1.0, 1.0), "L": 1.0, "mu": 1.0})
    return prob, "convex"


def _build_simplex_linear(params, seed):
    n = int(params.get("dim", 10))
    rng = np.random.default_rng(seed)
    c = rng.uniform(0.0, 1.0, size=n)
    i = int(np.argmin(c))
    x_star = np.zeros(n)
    x_star[i] = 1.0
    oracle = FunctionOracle(lambda x: c @ x, lambda x: c.copy())
    prob = ProblemInstance(
        objective=oracle, set=FeasibleSet.simplex(n),
        lipschitz_f=float(np.abs(c).max()), f_star=float(c[i]), x_star=x_star,
        meta={"c": c})
    return prob, "convex"


def _build_toy_lp(params, seed):
    """Linear objective over a box with linear inequality constraints and a
    Slater point at the origin; f_star from an LP oracle."""
    n = int(params.get("dim", 2))
    m = int(params.get("pieces", 2))
    rng = np.random.default_rng(seed)
    c = rng.uniform(-1.0, 1.0, size=n)
    A = rng.uniform(-1.0, 1.0, size=(m, n))
    b = -rng.uniform(0.2, 1.0, size=m)    # g_i(0) = b_i < 0
    lo, hi = np.full(n, -1.0), np.full(n, 1.0)
    res = linprog(c, A_ub=A, b_ub=-b, bounds=list(zip(lo, hi)), method="highs")
    if not res.success:
        raise ConfigError(f"toy LP infeasible: {res.message}")
    from .oracles import LinearMaxBundle, LinearOracle
    prob = ProblemInstance(
        objective=LinearOracle(c),
        set=FeasibleSet.box(lo, hi),
        constraints=LinearMaxBundle(A, b),
        lipschitz_f=float(np.linalg.norm(c)),
        lipschitz_g=float(max(np.linalg.norm(A[i]) for i in range(m))),
        f_star=float(res.fun), x_star=np.asarray(res.x, dtype=float),
        meta={"c": c, "A": A, "b": b})
    return prob, "constrained"


def _build_max_residual(params, seed):
    """f(x) = ||A x - b||_inf over the box [-1, 1]^n with f_star from an LP."""
    m = int(params.get("rows", 8))
    n = int(params.get("cols", 16))
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((m, n))
    b = A @ rng.uniform(-0.5, 0.5, size=n) + 0.1 * rng.standard_normal(m)
    cost = np.concatenate([np.zeros(n), [1.0]])
    A_ub = np.vstack([np.hstack([A, -np.ones((m, 1))]),
                      np.hstack([-A, -np.ones((m, 1))])])
    b_ub = np.concatenate([b, -b])
    bounds = [(-1.0, 1.0)] * n + [(None, None)]
    res = linprog(cost, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if not res.success:
        raise ConfigError(f"residual LP failed: {res.message}")

    def value(x):
        return float(np.abs(A @ x - b).max())

    def subgrad(x):
        r = A @ x - b
        i = int(np.argmax(np.abs(r)))
        return math.copysign(1.0, r[i]) * A[i]

    prob = ProblemInstance(
        objective=FunctionOracle(value, subgrad),
        set=FeasibleSet.box(np.full(n, -1.0), np.full(n, 1.0)),
        f_star=float(res.fun), x_star=np.asarray(res.x[:n], dtype=float),
        meta={"A": A, "b": b})
    return prob, "convex"


def _build_matrix_game(params, seed):
    if "A" in params:
        A = np.asarray(params["A"], dtype=float)
    else:
        m = int(params.get("rows", 4))
        n = int(params.get("cols", 4))
        A = np.random.default_rng(seed).uniform(0.0, 1.0, size=(m, n))
    op = problems.gen_matrix_game(A, params.get("setup", "entropy"))
    return op, "vi"


def _build_bilinear_box(params, seed):
    """Phi(x, u) = (u, -x) for the scalar game f(x, u) = x*u on [-1, 1]^2."""
    from .oracles import SaddleOperator
    from .geometry import ProductSetup
    half = float(params.get("half_width", 1.0))
    box = FeasibleSet.box(np.array([-half]), np.array([half]))
    domain = ProductSetup(euclidean_setup(box), euclidean_setup(box))
    G = np.array([[0.0, 1.0], [-1.0, 0.0]])
    op = SaddleOperator(phi=lambda z: G @ z, domain=domain, lipschitz=1.0,
                        holder_nu=1.0, holder_l=1.0, linear_part=G,
                        affine_part=np.zeros(2),
                        meta={"A": np.array([[1.0]]), "value": 0.0})
    return op, "vi"


def _build_transport_dual(params, seed):
    prob = problems.gen_transport_dual(int(params.get("rows", 3)),
                                       int(params.get("cols", 3)), seed)
    return prob, "convex"


def _build_ttd_dual(params, seed):
    prob = problems.gen_ttd_dual(int(params.get("nodes", 5)),
                                 int(params.get("bars", 6)), seed)
    return prob, "constrained"


PROBLEMS = {
    "abs_value": _build_abs_value,
    "quadratic_box": _build_quadratic_box,
    "simplex_linear": _build_simplex_linear,
    "toy_lp": _build_toy_lp,
    "max_residual": _build_max_residual,
    "matrix_game": _build_matrix_game,
    "bilinear_box": _build_bilinear_box,
    "transport_dual": _build_transport_dual,
    "ttd_dual": _build_ttd_dual,
}


def _make_setup(problem, setup_cfg):
    setup_cfg = setup_cfg or {}
    kind = setup_cfg.get("kind")
    if kind is None:
        kind = "entropy" if problem.set.kind == "simplex" else "euclidean"
    if kind == "entropy":
        if problem.set.kind != "simplex":
            raise ConfigError("entropy setup requires a simplex problem")
        return entropy_setup(problem.set.dim, problem.set.scale,
                             theta0_sq=setup_cfg.get("theta0_sq"))
    if kind != "euclidean":
        raise ConfigError(f"unknown setup kind '{kind}'")
    origin = setup_cfg.get("origin")
    if origin is not None:
        origin = np.asarray(origin, dtype=float)
    setup = euclidean_setup(problem.set, origin=origin,
                            theta0_sq=setup_cfg.get("theta0_sq"))
    if setup.theta0_sq is None and problem.set.kind in ("box", "ball", "simplex"):
        setup = ProxSetup(problem.set, "euclidean", origin=setup.origin,
                          theta0_sq=setup.max_d())
    return setup


# ---------------------------------------------------------------------------
# method dispatch
# ---------------------------------------------------------------------------

def _need(params, *names):
    missing = [n for n in names if n not in params]
    if missing:
        raise ConfigError(f"missing method parameter(s): {', '.join(missing)}")
    return [params[n] for n in names]


def _run_method(name, params, problem, setup, kind):
    if kind == "vi":
        op = problem
        def gap(w):
            x_hat, u_hat = op.domain.split(w)
            return mirrorprox.saddle_gap(op, x_hat, u_hat)
        if name == "mirror_prox":
            L = params.get("L", op.lipschitz)
            (N,) = _need(params, "N")
            return mirrorprox.mirror_prox_solve(op, op.domain, L, int(N),
                                                gap_fn=gap)
        if name == "universal_mirror_prox":
            eps, M_init, N = _need(params, "eps", "M_init", "N")
            return mirrorprox.universal_mirror_prox_solve(
                op, op.domain, float(eps), float(M_init), int(N), gap_fn=gap)
        raise ConfigError(f"method '{name}' does not apply to VI problems")

    if name == "shor":
        lam, N = _need(params, "lam", "N")
        x0 = np.asarray(params.get("x0", setup.prox_center()), dtype=float)
        return subgradient.run_shor(problem, x0, float(lam), int(N))
    if name == "fixed_md":
        R, M, N = _need(params, "R", "M", "N")
        return subgradient.run_fixed_md(problem, setup, float(R), float(M), int(N))
    if name == "adaptive_md":
        eps, N = _need(params, "eps", "N")
        return subgradient.run_adaptive_md(problem, setup, float(eps), int(N))
    if name == "normalized_md":
        R, N = _need(params, "R", "N")
        return subgradient.run_normalized_md(problem, setup, float(R), int(N))
    if name == "strongly_convex_md":
        mu, N = _need(params, "mu", "N")
        return subgradient.run_strongly_convex_md(problem, setup, float(mu),
                                                  int(N), M=params.get("M"))
    if name == "constrained_nonsmooth":
        (eps,) = _need(params, "eps")
        return constrained.solve_constrained_nonsmooth(problem, setup, float(eps))
    if name == "constrained_general":
        (eps,) = _need(params, "eps")
        return constrained.solve_constrained_general(problem, setup, float(eps))
    if name == "agm":
        N = int(_need(params, "N")[0])
        L = params.get("L", (problem.meta or {}).get("L"))
        if L is None:
            raise ConfigError("agm needs L")
        return smoothing.agm_solve(problem, setup, float(L), N)
    if name == "universal_agm":
        eps, L0, N = _need(params, "eps", "L0", "N")
        return smoothing.universal_agm(problem, setup, float(eps), float(L0),
                                       int(N))
    raise ConfigError(f"unknown method '{name}'; available: "
                      + ", ".join(sorted(METHODS)))


METHODS = {"shor", "fixed_md", "adaptive_md", "normalized_md",
           "strongly_convex_md", "constrained_nonsmooth",
           "constrained_general", "agm", "universal_agm", "mirror_prox",
           "universal_mirror_prox"}

# methods whose trace f_value column is itself the certified error quantity
_PER_ROW_CERTIFIED = {"mirror_prox", "universal_mirror_prox"}


# ---------------------------------------------------------------------------
# the runner
# ---------------------------------------------------------------------------

def _validate(config):
    if not isinstance(config, dict):
        raise ConfigError("config must be a JSON object")
    for key in ("seed", "problem", "method"):
        if key not in config:
            raise ConfigError(f"config missing '{key}'")
    pname = config["problem"].get("generator")
    if pname not in PROBLEMS:
        raise ConfigError(f"unknown problem '{pname}'; available: "
                          + ", ".join(sorted(PROBLEMS)))
    mname = config["method"].get("name")
    if mname not in METHODS:
        raise ConfigError(f"unknown method '{mname}'; available: "
                          + ", ".join(sorted(METHODS)))
    return pname, mname


def _check_bounds(report, mname, problem, kind, eps=None):
    """Collect (error, bound) comparisons the run certifies."""
    verdicts = []
    if kind == "vi":
        for row in report.trace:
            if math.isfinite(row.bound_value) and math.isfinite(row.f_value):
                verdicts.append({"k": row.k, "error": row.f_value,
                                 "bound": row.bound_value,
                                 "ok": row.f_value <= row.bound_value + BOUND_SLACK})
        return verdicts
    f_star = getattr(problem, "f_star", None)
    gap = getattr(report, "gap", None)
    bound = getattr(report, "bound", None)
    if gap is not None and bound is not None and math.isfinite(bound):
        verdicts.append({"k": report.iterations, "error": gap, "bound": bound,
                         "ok": gap <= bound + BOUND_SLACK})
    if mname.startswith("constrained") and eps is not None:
        f_bar, g_bar = report.f_bar, report.g_bar
        if mname == "constrained_nonsmooth" and f_star is not None \
                and math.isfinite(f_bar):
            verdicts.append({"k": report.iterations, "error": f_bar - f_star,
                             "bound": eps,
                             "ok": f_bar - f_star <= eps + BOUND_SLACK})
        if math.isfinite(g_bar):
            verdicts.append({"k": report.iterations, "error": g_bar,
                             "bound": eps, "ok": g_bar <= eps + BOUND_SLACK})
        if report.iteration_bound is not None:
            verdicts.append({"k": report.iterations,
                             "error": float(report.iterations),
                             "bound": float(report.iteration_bound),
                             "ok": report.iterations <= report.iteration_bound})
    if f_star is not None and mname in ("agm", "universal_agm"):
        for row in report.trace:
            if math.isfinite(row.bound_value):
                err = row.f_value - f_star
                verdicts.append({"k": row.k, "error": err,
                                 "bound": row.bound_value,
                                 "ok": err <= row.bound_value + BOUND_SLACK})
    return verdicts


def run_experiment(config, out_dir=None, check_bounds=False, stem="experiment"):
    """Run one experiment.  Returns (exit_code, summary dict)."""
    pname, mname = _validate(config)
    seed = int(config["seed"])
    pparams = {k: v for k, v in config["problem"].items() if k != "generator"}
    problem, kind = PROBLEMS[pname](pparams, seed)
    setup = None
    if kind != "vi":
        setup = _make_setup(problem, config.get("setup"))
    mparams = {k: v for k, v in config["method"].items() if k != "name"}

    t0 = time.perf_counter_ns()
    report = _run_method(mname, mparams, problem, setup, kind)
    elapsed = time.perf_counter_ns() - t0

    trace = report.trace
    for row in trace:
        row.elapsed_ns = elapsed

    verdicts = _check_bounds(report, mname, problem, kind,
                             eps=mparams.get("eps")) if check_bounds else []
    all_ok = all(v["ok"] for v in verdicts)

    summary = {
        "problem": pname,
        "method": mname,
        "seed": seed,
        "iterations": int(getattr(report, "iterations", len(trace))),
        "oracle_calls": int(report.oracle_calls),
        "trace_rows": len(trace),
        "trace_sha256": trace_hash(trace),
        "bounds_checked": len(verdicts),
        "bounds_ok": bool(all_ok),
    }
    if kind == "vi":
        last_gap = trace.rows[-1].f_value if len(trace) else float("nan")
        summary["final_gap"] = last_gap
    else:
        f_out = getattr(report, "f_out", getattr(report, "f_bar", None))
        if f_out is not None:
            summary["f_out"] = float(f_out)
        if getattr(problem, "f_star", None) is not None:
            summary["f_star"] = float(problem.f_star)
        gap = getattr(report, "gap", None)
        if gap is None and getattr(problem, "f_star", None) is not None \
                and f_out is not None:
            gap = f_out - problem.f_star
        if gap is not None:
            summary["gap"] = float(gap)
        bound = getattr(report, "bound", None)
        if bound is not None and bound == bound:
            summary["bound"] = float(bound)
        g_bar = getattr(report, "g_bar", None)
        if g_bar is not None:
            summary["g_bar"] = float(g_bar)
    if verdicts:
        summary["worst_margin"] = min(v["bound"] - v["error"] for v in verdicts)

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{stem}_trace.csv").write_text(trace_csv_text(trace),
                                               newline="\n")
        (out / f"{stem}_summary.json").write_text(
            json.dumps(summary, sort_keys=True, indent=2) + "\n", newline="\n")

    code = 0 if (not check_bounds or all_ok) else 3
    return code, summary
