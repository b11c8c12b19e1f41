"""Residual measures, per-iteration trace records, and machine-checked run invariants.

The optimality measure is the projected-gradient fixed-point residual

    ||x - P_X[x - grad_x L(x, z, lam, mu)]||        (unit step inside P_X)

which vanishes exactly at projected-stationary points, and the feasibility
measure is ||lam - mu|| / rho, which equals ||c(x)|| from the first
iteration onward because the lam-update sets lam = mu + rho c(x).  Note the
unit step inside the projection: the solver's own x-update uses the
configured step size instead, so the reported optimality is step-size
independent.

``check_trace`` re-derives the convergence theory's per-iteration
inequalities on a recorded run and reports every violation; an empty list
is a machine-checked consistency certificate for the run.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .lagrangian import PenaltyParams, grad_x
from .model import LipschitzHints, Problem

TRACE_COLUMNS = ("k", "objective", "feasibility", "optimality", "lagrangian",
                 "norm_x", "norm_lambda", "norm_mu", "step_x_norm", "gamma", "delta")


@dataclass(frozen=True, slots=True)
class TraceRecord:
    """One iteration's scalar diagnostics; field order matches the CSV contract."""

    k: int
    objective: float
    feasibility: float
    optimality: float
    lagrangian: float
    norm_x: float
    norm_lambda: float
    norm_mu: float
    step_x_norm: float
    gamma: float
    delta: float


@dataclass(frozen=True)
class KktReport:
    """Final residual pair, multiplier, point, and the convergence verdict."""

    optimality: float
    feasibility: float
    multiplier: np.ndarray
    x_final: np.ndarray
    satisfied: bool


@dataclass(frozen=True)
class InvariantViolation:
    """A single failed inequality: lhs <= rhs was expected but margin = lhs - rhs > 0."""

    name: str
    k: int
    lhs: float
    rhs: float
    margin: float


def _violation(name, k, lhs, rhs):
    return InvariantViolation(name, int(k), float(lhs), float(rhs), float(lhs - rhs))


class RunHistory:
    """Column-oriented record of every stored iteration of a solve run.

    Holds the full iterate vectors (x, z, lam, mu) alongside the scalar
    trace columns, so that vector-level invariants can be re-checked after
    the fact.  Rows are appended by the solver and frozen into numpy arrays
    on first read.  Memory grows with (n + 3m + 10) floats per stored
    iteration.
    """

    _VECTOR = ("x", "z", "lam", "mu")
    _SCALAR = ("objective", "feasibility", "optimality", "lagrangian",
               "norm_x", "norm_lambda", "norm_mu", "step_x_norm", "gamma", "delta")

    def __init__(self):
        self._rows = {name: [] for name in ("k", *self._VECTOR, *self._SCALAR)}
        self._frozen = None

    def append(self, k, x, z, lam, mu, *, objective, feasibility, optimality,
               lagrangian, norm_x, norm_lambda, norm_mu, step_x_norm, gamma, delta):
        if self._frozen is not None:
            raise RuntimeError("history is frozen; no further rows may be appended")
        rows = self._rows
        rows["k"].append(int(k))
        rows["x"].append(x)
        rows["z"].append(z)
        rows["lam"].append(lam)
        rows["mu"].append(mu)
        rows["objective"].append(objective)
        rows["feasibility"].append(feasibility)
        rows["optimality"].append(optimality)
        rows["lagrangian"].append(lagrangian)
        rows["norm_x"].append(norm_x)
        rows["norm_lambda"].append(norm_lambda)
        rows["norm_mu"].append(norm_mu)
        rows["step_x_norm"].append(step_x_norm)
        rows["gamma"].append(gamma)
        rows["delta"].append(delta)

    def __len__(self):
        if self._frozen is not None:
            return len(self._frozen["k"])
        return len(self._rows["k"])

    def freeze(self):
        """Convert stored rows to numpy arrays (idempotent)."""
        if self._frozen is None:
            cols = {"k": np.asarray(self._rows["k"], dtype=int)}
            for name in self._VECTOR:
                rows = self._rows[name]
                cols[name] = (np.asarray(rows, dtype=float) if rows
                              else np.zeros((0, 0)))
            for name in self._SCALAR:
                cols[name] = np.asarray(self._rows[name], dtype=float)
            self._frozen = cols
            self._rows = None
        return self

    def column(self, name: str) -> np.ndarray:
        self.freeze()
        return self._frozen[name]

    @property
    def ks(self):
        return self.column("k")

    @property
    def X(self):
        return self.column("x")

    @property
    def Z(self):
        return self.column("z")

    @property
    def Lam(self):
        return self.column("lam")

    @property
    def Mu(self):
        return self.column("mu")

    def records(self) -> List[TraceRecord]:
        """Materialize one TraceRecord per stored row."""
        self.freeze()
        cols = [self.column(name) for name in TRACE_COLUMNS]
        out = []
        for i in range(len(self)):
            out.append(TraceRecord(int(cols[0][i]), *(float(col[i]) for col in cols[1:])))
        return out


# ---------------------------------------------------------------------------
# residuals and the KKT report
# ---------------------------------------------------------------------------

def optimality_residual(problem: Problem, params: PenaltyParams, state) -> float:
    """||x - P_X[x - grad_x L]|| with a unit step inside the projection."""
    g = grad_x(problem, state)
    projected = np.asarray(problem.projection(state.x - g), dtype=float)
    return float(np.linalg.norm(state.x - projected))


def feasibility_residual(params: PenaltyParams, state) -> float:
    """||lam - mu|| / rho; equals ||c(x)|| after the first lam-update."""
    return float(np.linalg.norm(state.lam - state.mu)) / params.rho


def kkt_report(problem: Problem, params: PenaltyParams, state, *,
               tol_optimality: float, tol_feasibility: float) -> KktReport:
    """Package both residuals at a state with the satisfied verdict."""
    opt = optimality_residual(problem, params, state)
    feas = feasibility_residual(params, state)
    return KktReport(
        optimality=opt,
        feasibility=feas,
        multiplier=np.array(state.lam, dtype=float, copy=True),
        x_final=np.array(state.x, dtype=float, copy=True),
        satisfied=bool(opt <= tol_optimality and feas <= tol_feasibility),
    )


# ---------------------------------------------------------------------------
# trace invariant suite
# ---------------------------------------------------------------------------

# Numerical slack applied to inequalities that hold exactly in real
# arithmetic: scale-relative, so margins of genuine violations dominate it.
_SLACK = 1e-12
_IDENTITY_TOL = 1e-10   # lam - mu = rho c(x), alpha z = rho c(x), for k >= 1
_EXACT_TOL = 1e-12      # ||mu_{k+1} - lam_k|| equality
_DECREASE_TOL = 1e-10   # merit decrease inequalities


def check_trace(problem: Problem, history: RunHistory, params,
                hints: Optional[LipschitzHints] = None,
                grad_lipschitz: Optional[float] = None) -> List[InvariantViolation]:
    """Evaluate every checkable per-iteration inequality over a recorded run.

    Requires a stride-1 history (consecutive iteration numbers).  Checks,
    for every stored transition k -> k+1 (gamma_k is the dual step actually
    taken, delta_k the budget at k):

    - mu_bound:       ||mu_k|| <= ||mu_0|| + (delta_0/2)(1 - r^k)/(1 - r)
    - mu_step:        ||mu_{k+1} - mu_k||^2 <= (gamma_k/rho)||lam_k - mu_k||^2
    - mu_step_budget: (gamma_k/rho)||lam_k - mu_k||^2 <= delta_k
    - mu_lam_contraction (exact, 1e-12 relative):
                      ||mu_{k+1} - lam_k|| = (1 - gamma_k/rho)||lam_k - mu_k||
    - state identities for k >= 1 (1e-10 relative):
                      lam_k - mu_k = rho c(x_k)  and  alpha z_k = rho c(x_k)
    - merit decrease, for transitions from k >= 1 (the lam-update identity
      that the bound rests on first holds at k = 1):
        observed form   L^{k+1} <= L^k + 2 delta_k / rho;
        certified form  L^{k+1} <= L^k - ((eta - Lp - 2 rho Lc^2)/2)||dx||^2
                        + 2 delta_k / rho,
        enforced only when hints supply Lc and ``grad_lipschitz`` supplies
        Lp with eta = 1/step_size > Lp + 2 rho Lc^2
    - lam_step, for transitions from k >= 1, when hints supply Lc:
                      ||lam_{k+1} - lam_k||^2 <= 2 rho^2 Lc^2 ||dx||^2 + 2 delta_k

    Parameters
    ----------
    problem : Problem
        Needed to evaluate c(x_k) for the state identities.
    history : RunHistory
        Stride-1 history as produced by ``solve``.
    params : SolverParams
        The parameters the run used (penalty, step size, schedule).
    hints : LipschitzHints, optional
        Defaults to ``problem.lipschitz_hints``.  Checks needing a missing
        constant are skipped.
    grad_lipschitz : float, optional
        Lipschitz constant of the merit gradient in x (depends on the dual
        magnitudes, so it can only be user-supplied).

    Returns
    -------
    list of InvariantViolation
        Empty when the run is consistent with the theory.
    """
    history.freeze()
    ks = history.ks
    size = len(history)
    if size == 0:
        raise ValueError("empty trace: nothing to check")
    if size > 1 and not np.all(np.diff(ks) == 1):
        raise ValueError("trace is not stride-1: iteration numbers must be consecutive "
                         f"(got k = {ks[:5].tolist()}...)")
    if hints is None:
        hints = problem.lipschitz_hints

    penalty: PenaltyParams = params.penalty
    rho, alpha = penalty.rho, penalty.alpha
    delta0, decay = params.delta0, params.decay

    X, Z, Lam, Mu = history.X, history.Z, history.Lam, history.Mu
    delta = history.column("delta")
    gamma = history.column("gamma")
    merit = history.column("lagrangian")

    violations: List[InvariantViolation] = []

    # --- dual boundedness along the whole run -----------------------------
    norm_mu = np.linalg.norm(Mu, axis=1) if Mu.size else np.zeros(size)
    bound = norm_mu[0] + 0.5 * delta0 * (1.0 - decay ** ks.astype(float)) / (1.0 - decay)
    for i in np.flatnonzero(norm_mu > bound + _SLACK * (1.0 + bound)):
        violations.append(_violation("mu_bound", ks[i], norm_mu[i], bound[i]))

    if size == 1:
        return violations

    # --- transition-level quantities ---------------------------------------
    d = Lam - Mu
    nlm2 = np.einsum("ij,ij->i", d, d) if d.size else np.zeros(size)
    dmu = Mu[1:] - Mu[:-1] if Mu.size else np.zeros((size - 1, 0))
    ndmu2 = np.einsum("ij,ij->i", dmu, dmu) if dmu.size else np.zeros(size - 1)
    g_over_rho = gamma[1:] / rho
    mid = g_over_rho * nlm2[:-1]

    for i in np.flatnonzero(ndmu2 > mid + _SLACK * (1.0 + mid)):
        violations.append(_violation("mu_step", ks[i], ndmu2[i], mid[i]))
    for i in np.flatnonzero(mid > delta[:-1] + _SLACK * (1.0 + delta[:-1])):
        violations.append(_violation("mu_step_budget", ks[i], mid[i], delta[i]))

    if Mu.size:
        lhs = np.linalg.norm(Mu[1:] - Lam[:-1], axis=1)
        rhs = (1.0 - g_over_rho) * np.sqrt(nlm2[:-1])
        gap = np.abs(lhs - rhs)
        tol = _EXACT_TOL * (1.0 + rhs)
        for i in np.flatnonzero(gap > tol):
            violations.append(_violation("mu_lam_contraction", ks[i], gap[i], tol[i]))

    # --- state identities, valid from the first lam/z-update onward --------
    if problem.m > 0:
        for i in range(1, size):
            rho_c = rho * np.asarray(problem.constraints(X[i]), dtype=float)
            scale = 1.0 + float(np.linalg.norm(rho_c))
            gap = float(np.linalg.norm(d[i] - rho_c))
            if gap > _IDENTITY_TOL * scale:
                violations.append(_violation("identity_lam_mu", ks[i], gap,
                                             _IDENTITY_TOL * scale))
            gap = float(np.linalg.norm(alpha * Z[i] - rho_c))
            if gap > _IDENTITY_TOL * scale:
                violations.append(_violation("identity_z", ks[i], gap,
                                             _IDENTITY_TOL * scale))

    # --- merit decrease and lam displacement, from k >= 1 ------------------
    if size > 2:
        ndx = np.linalg.norm(X[2:] - X[1:-1], axis=1)
        L_c = hints.L_c if hints is not None else None

        allowance = merit[1:-1] + 2.0 * delta[1:-1] / rho
        certified = (L_c is not None and grad_lipschitz is not None
                     and 1.0 / params.step_size > grad_lipschitz + 2.0 * rho * L_c ** 2)
        if certified:
            coeff = 0.5 * (1.0 / params.step_size - grad_lipschitz - 2.0 * rho * L_c ** 2)
            allowance = allowance - coeff * ndx ** 2
            name = "merit_decrease_certified"
        else:
            name = "merit_decrease"
        tol = _DECREASE_TOL * (1.0 + np.abs(merit[1:-1]))
        for i in np.flatnonzero(merit[2:] > allowance + tol):
            violations.append(_violation(name, ks[1 + i], merit[2 + i], allowance[i] + tol[i]))

        if L_c is not None and Lam.size:
            dlam2 = np.einsum("ij,ij->i", Lam[2:] - Lam[1:-1], Lam[2:] - Lam[1:-1])
            rhs = 2.0 * rho ** 2 * L_c ** 2 * ndx ** 2 + 2.0 * delta[1:-1]
            for i in np.flatnonzero(dlam2 > rhs + _SLACK * (1.0 + rhs)):
                violations.append(_violation("lam_step", ks[1 + i], dlam2[i], rhs[i]))

    violations.sort(key=lambda v: (v.k, v.name))
    return violations


def tail_step_maxima(history: RunHistory, window: int = 100) -> dict:
    """Max successive-difference norms of x, z, lam, mu over the last `window` steps."""
    history.freeze()
    if len(history) < 2:
        return {"x": 0.0, "z": 0.0, "lambda": 0.0, "mu": 0.0}
    lo = max(0, len(history) - 1 - window)
    out = {}
    for label, M in (("x", history.X), ("z", history.Z),
                     ("lambda", history.Lam), ("mu", history.Mu)):
        if M.size == 0:
            out[label] = 0.0
        else:
            out[label] = float(np.max(np.linalg.norm(M[lo + 1:] - M[lo:-1], axis=1)))
    return out


def perturbation_ratio(history: RunHistory) -> np.ndarray:
    """Diagnostic ratio ||z_k|| / ||z_k - z_{k-1}|| per transition (inf where frozen).

    Logged for inspection only; the theory asserts a large-enough penalty
    weight keeps it below alpha eventually, which is an existence claim and
    never a per-iteration invariant.
    """
    history.freeze()
    Z = history.Z
    if len(history) < 2 or Z.size == 0:
        return np.zeros(0)
    num = np.linalg.norm(Z[1:], axis=1)
    den = np.linalg.norm(Z[1:] - Z[:-1], axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(den > 0, num / den, np.where(num > 0, np.inf, 0.0))
    return ratio


# ---------------------------------------------------------------------------
# trace CSV
# ---------------------------------------------------------------------------

def write_trace_csv(records, path) -> None:
    """Write records as CSV with the fixed column contract, full precision."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(TRACE_COLUMNS) + "\n")
        for r in records:
            fields = [str(r.k)] + ["%.17e" % getattr(r, name) for name in TRACE_COLUMNS[1:]]
            fh.write(",".join(fields) + "\n")


def read_trace_csv(path) -> List[TraceRecord]:
    """Parse a trace CSV written by ``write_trace_csv``."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header.split(",") != list(TRACE_COLUMNS):
            raise ValueError(f"unexpected trace header: {header!r}")
        records = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(TRACE_COLUMNS):
                raise ValueError(f"malformed trace row: {line!r}")
            records.append(TraceRecord(int(parts[0]), *(float(p) for p in parts[1:])))
    return records
