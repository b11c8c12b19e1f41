"""Single-loop alternating-direction solver on the perturbed Lagrangian.

One iteration applies, in this order,

    x      <- P_X[x - step_size * (grad f(x) + jac(x).T lam)]
    mu     <- mu + (gamma/rho)(lam - mu),  gamma = rho delta / (||lam - mu||^2 + 1)
    lam    <- mu + rho c(x)          (exact maximization, with the new x and mu)
    z      <- (lam - mu) / alpha     (exact minimization)
    delta  <- decay^(k+1) * delta0

The mu-update reads the pre-update lam and mu; the lam-update reads the
new x and new mu.  The damped dual step gamma keeps the total movement of
mu summable, which is what bounds the dual iterates without any safeguard.
Every update is a closed form or a single projection: nothing is solved
iteratively inside an iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import List

import numpy as np

from .diagnostics import (KktReport, RunHistory, TraceRecord, kkt_report)
from .lagrangian import PenaltyParams, _value, grad_x, lambda_hat
from .model import DimensionMismatch, EvaluationError, Problem


class SolveStatus(Enum):
    CONVERGED = "converged"
    ITERATION_LIMIT = "iteration_limit"
    DIVERGED = "diverged"
    EVALUATION_ERROR = "evaluation_error"


@dataclass(frozen=True)
class SolverParams:
    """Algorithm parameters.

    step_size is the primal step (the reciprocal of the smoothness weight
    in the proximal linearization); it has no default because convergence
    depends on it problem by problem.  delta0 in (0, 1] and decay in (0, 1)
    define the dual movement budget delta_k = decay^k * delta0.  Keep decay
    close to 1 (e.g. 0.999): a fast-shrinking budget freezes mu early and
    can strand lam far from a valid multiplier.
    """

    penalty: PenaltyParams
    step_size: float
    delta0: float = 1.0
    decay: float = 0.999
    tol_optimality: float = 1e-6
    tol_feasibility: float = 1e-6
    max_iterations: int = 200000
    divergence_bound: float = 1e8

    def __post_init__(self):
        if not self.step_size > 0:
            raise ValueError(f"step_size must be > 0, got {self.step_size}")
        if not 0 < self.delta0 <= 1:
            raise ValueError(f"delta0 must be in (0, 1], got {self.delta0}")
        if not 0 < self.decay < 1:
            raise ValueError(f"decay must be in (0, 1), got {self.decay}")
        if not self.tol_optimality > 0:
            raise ValueError(f"tol_optimality must be > 0, got {self.tol_optimality}")
        if not self.tol_feasibility > 0:
            raise ValueError(f"tol_feasibility must be > 0, got {self.tol_feasibility}")
        if self.max_iterations < 0:
            raise ValueError(f"max_iterations must be >= 0, got {self.max_iterations}")
        if not self.divergence_bound > 0:
            raise ValueError(f"divergence_bound must be > 0, got {self.divergence_bound}")


@dataclass
class IterateState:
    """Iterate (x, z, lam, mu) with the schedule position.

    delta is the current budget decay^k * delta0; gamma is the dual step
    actually taken entering this state (0 before the first mu-update).
    """

    k: int
    x: np.ndarray
    z: np.ndarray
    lam: np.ndarray
    mu: np.ndarray
    delta: float
    gamma: float = 0.0


@dataclass
class SolveOutcome:
    status: SolveStatus
    final_state: IterateState
    kkt: KktReport
    trace: List[TraceRecord]
    history: RunHistory
    message: str = ""

    @property
    def iterations(self) -> int:
        return self.final_state.k


# ---------------------------------------------------------------------------
# individual update steps
# ---------------------------------------------------------------------------

def step_x(problem: Problem, params: SolverParams, state) -> np.ndarray:
    """Projected gradient step on the merit function in x."""
    return np.asarray(
        problem.projection(state.x - params.step_size * grad_x(problem, state)),
        dtype=float)


def gamma(params: SolverParams, state) -> float:
    """Damped dual step rho * delta / (||lam - mu||^2 + 1); gamma/rho <= delta <= 1."""
    d = state.lam - state.mu
    return params.penalty.rho * state.delta / (float(d @ d) + 1.0)


def step_mu(params: SolverParams, state) -> np.ndarray:
    """Ascent step mu + (gamma/rho)(lam - mu); moves mu by at most delta/2."""
    return state.mu + (gamma(params, state) / params.penalty.rho) * (state.lam - state.mu)


def step_lambda(problem: Problem, params: SolverParams, x_next, mu_next) -> np.ndarray:
    """Exact maximization in lam at the new point: mu_next + rho c(x_next)."""
    return lambda_hat(problem, params.penalty, x_next, mu_next)


def step_z(params: SolverParams, lam_next, mu_next) -> np.ndarray:
    """Exact minimization in z: (lam_next - mu_next) / alpha."""
    return (np.asarray(lam_next, dtype=float) - np.asarray(mu_next, dtype=float)) \
        / params.penalty.alpha


def iterate(problem: Problem, params: SolverParams, state: IterateState) -> IterateState:
    """Apply one full iteration and return the successor state.

    Order is normative: the mu-update uses the pre-update lam and mu, the
    lam-update uses the new x and new mu.  Raises EvaluationError if any
    component comes out non-finite.
    """
    x_next = step_x(problem, params, state)
    gam = gamma(params, state)
    mu_next = step_mu(params, state)
    lam_next = step_lambda(problem, params, x_next, mu_next)
    z_next = step_z(params, lam_next, mu_next)
    k_next = state.k + 1
    next_state = IterateState(
        k=k_next, x=x_next, z=z_next, lam=lam_next, mu=mu_next,
        delta=params.delta0 * params.decay ** k_next, gamma=gam)
    if not (np.all(np.isfinite(x_next)) and np.all(np.isfinite(lam_next))
            and np.all(np.isfinite(mu_next)) and np.all(np.isfinite(z_next))):
        raise EvaluationError("non-finite iterate component", state=next_state,
                              iteration=k_next)
    return next_state


def initial_state(problem: Problem, params: SolverParams, x0,
                  z0=None, lam0=None, mu0=None) -> IterateState:
    """Build the starting state: x0 projected onto X, duals defaulting to zero."""
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (problem.n,):
        raise DimensionMismatch("x0 length", problem.n, x0.shape)

    def _dual(value, label):
        out = np.zeros(problem.m) if value is None else np.asarray(value, dtype=float)
        if out.shape != (problem.m,):
            raise DimensionMismatch(f"{label} length", problem.m, out.shape)
        return out

    return IterateState(
        k=0,
        x=np.asarray(problem.projection(x0), dtype=float),
        z=_dual(z0, "z0"),
        lam=_dual(lam0, "lam0"),
        mu=_dual(mu0, "mu0"),
        delta=params.delta0,
        gamma=0.0)


# ---------------------------------------------------------------------------
# full solve loop
# ---------------------------------------------------------------------------

def solve(problem: Problem, params: SolverParams, x0, *,
          z0=None, lam0=None, mu0=None, trace_stride: int = 1) -> SolveOutcome:
    """Run the alternating-direction loop from x0 until a stopping condition.

    Stops with CONVERGED when the projected-gradient optimality residual
    and the feasibility residual ||lam - mu||/rho are simultaneously below
    their tolerances, with ITERATION_LIMIT at the iteration budget, with
    DIVERGED when ||x|| exceeds the divergence bound (the boundedness
    assumption failing in practice), and with EVALUATION_ERROR when an
    iterate turns non-finite (the partial trace is retained).

    The history records iterations k with k % trace_stride == 0 plus the
    final one; invariant checking requires trace_stride == 1.

    Parameters
    ----------
    problem, params : the model and algorithm parameters.
    x0 : array_like
        Starting point; projected onto X before the first iteration.
    z0, lam0, mu0 : array_like, optional
        Warm-start values; all default to zero vectors.
    trace_stride : int
        Record every trace_stride-th iteration (default 1: record all).

    Returns
    -------
    SolveOutcome
        Final state, KKT report, trace records, and the full history.
    """
    if trace_stride < 1:
        raise ValueError(f"trace_stride must be >= 1, got {trace_stride}")
    penalty = params.penalty
    rho, alpha, beta = penalty.rho, penalty.alpha, penalty.beta

    cur = initial_state(problem, params, x0, z0=z0, lam0=lam0, mu0=mu0)
    history = RunHistory()
    recorded_k = -1

    def record(fx, opt, feas, merit, step_norm):
        nonlocal recorded_k
        history.append(
            cur.k, cur.x, cur.z, cur.lam, cur.mu,
            objective=fx, feasibility=feas, optimality=opt, lagrangian=merit,
            norm_x=float(np.linalg.norm(cur.x)),
            norm_lambda=float(np.linalg.norm(cur.lam)),
            norm_mu=float(np.linalg.norm(cur.mu)),
            step_x_norm=step_norm, gamma=cur.gamma, delta=cur.delta)
        recorded_k = cur.k

    cx = np.asarray(problem.constraints(cur.x), dtype=float)
    step_norm = 0.0
    status = None
    message = ""
    while True:
        # residuals and merit at the current state; grad is reused by the x-step
        grad = grad_x(problem, cur)
        fx = float(problem.objective(cur.x))
        opt = float(np.linalg.norm(
            cur.x - np.asarray(problem.projection(cur.x - grad), dtype=float)))
        d = cur.lam - cur.mu
        feas = float(np.linalg.norm(d)) / rho
        merit = float(_value(fx, cx, cur.z, cur.lam, cur.mu, alpha, beta))

        if cur.k % trace_stride == 0:
            record(fx, opt, feas, merit, step_norm)

        if not (math.isfinite(fx) and math.isfinite(opt)
                and math.isfinite(feas) and math.isfinite(merit)):
            status = SolveStatus.EVALUATION_ERROR
            message = f"non-finite iterate at k={cur.k}"
            break
        if opt <= params.tol_optimality and feas <= params.tol_feasibility:
            status = SolveStatus.CONVERGED
            break
        if np.linalg.norm(cur.x) > params.divergence_bound:
            status = SolveStatus.DIVERGED
            message = f"||x|| exceeded {params.divergence_bound:g} at k={cur.k}"
            break
        if cur.k >= params.max_iterations:
            status = SolveStatus.ITERATION_LIMIT
            break

        # advance; formulas identical to step_x / gamma / step_mu /
        # step_lambda / step_z, with grad and c(x) evaluations shared
        x_next = np.asarray(problem.projection(cur.x - params.step_size * grad),
                            dtype=float)
        gam = gamma(params, cur)
        mu_next = cur.mu + (gam / rho) * d
        cx = np.asarray(problem.constraints(x_next), dtype=float)
        lam_next = mu_next + rho * cx
        z_next = (lam_next - mu_next) / alpha
        step_norm = float(np.linalg.norm(x_next - cur.x))
        cur.k += 1
        cur.x, cur.z, cur.lam, cur.mu = x_next, z_next, lam_next, mu_next
        cur.delta = params.delta0 * params.decay ** cur.k
        cur.gamma = gam

    if recorded_k != cur.k:
        record(fx, opt, feas, merit, step_norm)
    history.freeze()

    final = replace(cur, x=cur.x.copy(), z=cur.z.copy(),
                    lam=cur.lam.copy(), mu=cur.mu.copy())
    report = kkt_report(problem, penalty, final,
                        tol_optimality=params.tol_optimality,
                        tol_feasibility=params.tol_feasibility)
    return SolveOutcome(status=status, final_state=final, kkt=report,
                        trace=history.records(), history=history, message=message)
