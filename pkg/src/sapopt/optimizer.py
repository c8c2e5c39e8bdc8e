"""Derivative-free direct search over CRAB parameters.

Plain Nelder-Mead with the standard coefficient set (reflection 1,
expansion 2, contraction 0.5, shrink 0.5), terminating when the simplex
diameter falls below the vertex tolerance or the evaluation budget runs
out.  The CRAB driver wraps propagate-and-evaluate into the searched
function, maps evaluation failures to a large finite penalty, and starts
from the all-zero coefficient vector so the guess pulse is always a
simplex vertex (the returned pulse can therefore never be worse than the
guess).
"""
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import BoundaryLeakError, SapoptError
from .pulses import CrabBasis


@dataclass(frozen=True)
class SearchOptions:
    """Nelder-Mead controls."""
    vertex_tolerance: float = 1e-4
    max_evaluations: int = 5000
    initial_step: float = 0.1
    reflection: float = 1.0
    expansion: float = 2.0
    contraction: float = 0.5
    shrink: float = 0.5
    seed: int = 0   # used only by the randomized-frequency mode

    def __post_init__(self):
        ok = (self.vertex_tolerance > 0 and self.reflection > 0
              and self.expansion > 1 and 0 < self.contraction < 1
              and 0 < self.shrink < 1)
        if not ok:
            raise ValueError("Nelder-Mead coefficients out of range")


@dataclass
class OptimizationReport:
    """Outcome of one direct search."""
    best_parameters: np.ndarray
    best_cost: float
    cost_trace: np.ndarray        # cost of every evaluation, in order
    evaluation_count: int
    termination: str              # "tolerance" | "budget"
    wall_time: float
    n_penalized: int = 0
    improved: bool = True
    unreliable: bool = False      # >10% of evaluations were penalized

    @property
    def best_trace(self):
        """Running best cost; non-increasing by construction."""
        return np.minimum.accumulate(self.cost_trace)


def nelder_mead(f, x0, opts):
    """Minimize ``f`` from ``x0`` with a standard Nelder-Mead simplex.

    The initial simplex steps ``opts.initial_step`` along each axis.
    Termination: max inter-vertex distance < ``opts.vertex_tolerance`` or
    ``opts.max_evaluations`` objective calls.
    """
    t0 = time.perf_counter()
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    trace = []

    def ev(x):
        c = float(f(x))
        trace.append(c)
        return c

    verts = [x0.copy()]
    costs = [ev(x0)]
    for i in range(n):
        v = x0.copy()
        v[i] += opts.initial_step
        verts.append(v)
        costs.append(ev(v))
        if len(trace) >= opts.max_evaluations:
            break
    verts = np.array(verts)
    costs = np.array(costs)
    termination = "budget"

    while len(trace) < opts.max_evaluations:
        order = np.argsort(costs, kind="stable")
        verts, costs = verts[order], costs[order]
        if verts.shape[0] == n + 1:
            diam = max(np.linalg.norm(verts[i] - verts[j])
                       for i in range(n + 1) for j in range(i + 1, n + 1))
            if diam < opts.vertex_tolerance:
                termination = "tolerance"
                break
        centroid = verts[:-1].mean(axis=0)
        worst = verts[-1]
        xr = centroid + opts.reflection * (centroid - worst)
        fr = ev(xr)
        if fr < costs[0]:
            if len(trace) < opts.max_evaluations:
                xe = centroid + opts.expansion * (xr - centroid)
                fe = ev(xe)
                if fe < fr:
                    verts[-1], costs[-1] = xe, fe
                else:
                    verts[-1], costs[-1] = xr, fr
            else:
                verts[-1], costs[-1] = xr, fr
        elif fr < costs[-2]:
            verts[-1], costs[-1] = xr, fr
        else:
            if fr < costs[-1]:   # outside contraction
                xc = centroid + opts.contraction * (xr - centroid)
            else:                # inside contraction
                xc = centroid - opts.contraction * (centroid - worst)
            if len(trace) >= opts.max_evaluations:
                break
            fc = ev(xc)
            if fc < min(fr, costs[-1]):
                verts[-1], costs[-1] = xc, fc
            else:
                # shrink toward the best vertex
                for i in range(1, n + 1):
                    if len(trace) >= opts.max_evaluations:
                        break
                    verts[i] = verts[0] + opts.shrink * (verts[i] - verts[0])
                    costs[i] = ev(verts[i])

    order = np.argsort(costs, kind="stable")
    verts, costs = verts[order], costs[order]
    return OptimizationReport(
        best_parameters=verts[0], best_cost=float(costs[0]),
        cost_trace=np.array(trace), evaluation_count=len(trace),
        termination=termination, wall_time=time.perf_counter() - t0)


@dataclass(frozen=True)
class OptimizationProblem:
    """Binding between the searched vector and a physical evaluation.

    ``build_pulses(basis)`` produces the pulse object for a basis;
    ``evaluate(pulses)`` runs the propagation and returns the cost (any
    SapoptError is converted to the penalty).  ``parameter_mode`` selects
    what the vector means: the 2*N_g trigonometric coefficients, or N_g
    bounded frequency perturbations r_k around the harmonics.
    """
    basis_template: CrabBasis
    build_pulses: object
    evaluate: object
    parameter_mode: str = "coefficients"

    def initial_vector(self):
        n = self.basis_template.n_harmonics
        return np.zeros(2 * n if self.parameter_mode == "coefficients"
                        else n)

    def basis_for(self, vector):
        tpl = self.basis_template
        n = tpl.n_harmonics
        if self.parameter_mode == "coefficients":
            return tpl.with_coefficients(vector[:n], vector[n:])
        r = np.clip(vector, -0.5, 0.5)
        k = np.arange(1, n + 1)
        base = 2.0 * np.pi * k / tpl.horizon
        return CrabBasis(tpl.horizon, tpl.a_coefficients,
                         tpl.b_coefficients,
                         frequencies=base * (1.0 + r), support=tpl.support)


def crab_optimize(problem, opts):
    """Direct search over the CRAB vector; returns (pulses, report).

    The zero vector reproduces the guess pulse exactly and seeds the
    simplex, so the reported best is never worse than the guess.  Failed
    evaluations cost 1e6 x |guess cost| and are counted; if more than half
    of them leaked probability off the grid the scenario itself is broken.
    """
    guess_cost = problem.evaluate(problem.build_pulses(
        problem.basis_for(problem.initial_vector())))
    penalty = 1e6 * abs(guess_cost) if guess_cost != 0.0 else 1e6
    stats = {"penalized": 0, "leaks": 0, "calls": 0}

    def f(vector):
        stats["calls"] += 1
        try:
            basis = problem.basis_for(vector)
            return problem.evaluate(problem.build_pulses(basis))
        except BoundaryLeakError:
            stats["penalized"] += 1
            stats["leaks"] += 1
            return penalty
        except (SapoptError, ValueError):
            stats["penalized"] += 1
            return penalty

    report = nelder_mead(f, problem.initial_vector(), opts)
    if stats["leaks"] > 0.5 * stats["calls"]:
        raise BoundaryLeakError(
            f"boundary leak in {stats['leaks']}/{stats['calls']} "
            "evaluations; the grid is too small for this scenario")
    report.n_penalized = stats["penalized"]
    report.unreliable = stats["penalized"] > 0.1 * stats["calls"]
    report.improved = report.best_cost < guess_cost
    best_basis = problem.basis_for(report.best_parameters)
    return problem.build_pulses(best_basis), report


def sweep(points, evaluate_point, max_workers=None):
    """Evaluate ``evaluate_point(point)`` over a list of points.

    Per-point failures are recorded (column ``error``) without aborting
    the sweep.  ``evaluate_point`` must be a picklable top-level callable
    when ``max_workers > 1`` (process pool); row order always follows the
    input order.
    """
    rows = [None] * len(points)

    def run_one(p):
        try:
            row = evaluate_point(p)
            row.setdefault("error", "")
            return row
        except SapoptError as exc:
            return {"error": f"{type(exc).__name__}: {exc}"}

    if max_workers is None or max_workers <= 1:
        for i, p in enumerate(points):
            rows[i] = run_one(p)
        return rows

    from concurrent.futures import ProcessPoolExecutor
    with ProcessPoolExecutor(max_workers=max_workers) as pool:
        futures = {pool.submit(_sweep_worker, evaluate_point, p): i
                   for i, p in enumerate(points)}
        for fut, i in futures.items():
            rows[i] = fut.result()
    return rows


def _sweep_worker(evaluate_point, point):
    try:
        row = evaluate_point(point)
        row.setdefault("error", "")
        return row
    except SapoptError as exc:
        return {"error": f"{type(exc).__name__}: {exc}"}
