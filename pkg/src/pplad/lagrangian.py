"""Perturbed Lagrangian with dual proximal regularization.

The constraint c(x) = 0 is split via a perturbation variable z into
c(x) = z and z = 0, with multipliers lam and mu respectively.  The merit
function is

    L(x, z, lam, mu) = f(x) + <lam, c(x) - z> + <mu, z>
                       + (alpha/2) ||z||^2 - (beta/2) ||lam - mu||^2,

which carries no quadratic penalty on c(x) - z and is strongly concave in
each multiplier separately thanks to the -(beta/2)||lam - mu||^2 term.
Minimizing in z and maximizing in lam have closed forms (``zhat`` and
``lambda_hat``); substituting zhat gives the reduced form

    f(x) + <lam, c(x)> - (1/(2 rho)) ||lam - mu||^2,   rho = alpha/(1 + alpha beta).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import DimensionMismatch, EvaluationError, Problem


@dataclass(frozen=True)
class PenaltyParams:
    """Penalty weight alpha > 0, proximal weight beta in (0, 1).

    rho = alpha / (1 + alpha*beta) is derived once at construction and
    frozen, so it can never drift from (alpha, beta).  It satisfies
    0 < rho < min(alpha, 1/beta) and 1/(2 rho) = 1/(2 alpha) + beta/2.
    """

    alpha: float
    beta: float
    rho: float = field(init=False)

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if not 0 < self.beta < 1:
            raise ValueError(f"beta must be in (0, 1), got {self.beta}")
        object.__setattr__(self, "rho", self.alpha / (1.0 + self.alpha * self.beta))


@dataclass
class FullState:
    """Primal point x, perturbation z, and the two multipliers."""

    x: np.ndarray
    z: np.ndarray
    lam: np.ndarray
    mu: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.z = np.asarray(self.z, dtype=float)
        self.lam = np.asarray(self.lam, dtype=float)
        self.mu = np.asarray(self.mu, dtype=float)

    def check_dims(self, problem: Problem) -> None:
        if self.x.shape != (problem.n,):
            raise DimensionMismatch("state.x length", problem.n, self.x.shape)
        for label, vec in (("z", self.z), ("lam", self.lam), ("mu", self.mu)):
            if vec.shape != (problem.m,):
                raise DimensionMismatch(f"state.{label} length", problem.m, vec.shape)


def _value(fx, cx, z, lam, mu, alpha, beta):
    # Shared formula so the solver can reuse cached f(x), c(x) evaluations.
    d = lam - mu
    return (fx + lam @ (cx - z) + mu @ z
            + 0.5 * alpha * (z @ z) - 0.5 * beta * (d @ d))


def eval_full(problem: Problem, params: PenaltyParams, state) -> float:
    """Value of the full merit function at (x, z, lam, mu)."""
    fx = float(problem.objective(state.x))
    cx = np.asarray(problem.constraints(state.x), dtype=float)
    value = float(_value(fx, cx, state.z, state.lam, state.mu, params.alpha, params.beta))
    if not np.isfinite(value):
        raise EvaluationError("non-finite merit value", state=state)
    return value


def grad_x(problem: Problem, state) -> np.ndarray:
    """Partial gradient in x: grad f(x) + jac(x).T @ lam.

    Deliberately free of z, mu, alpha and beta: the x-derivative of the
    merit function involves none of them.
    """
    g = np.asarray(problem.objective_gradient(state.x), dtype=float)
    if problem.m == 0:
        return g
    jac = np.asarray(problem.constraint_jacobian(state.x), dtype=float)
    return g + jac.T @ state.lam


def zhat(params: PenaltyParams, lam, mu) -> np.ndarray:
    """Unique minimizer of the merit function in z: (lam - mu) / alpha."""
    lam = np.asarray(lam, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if lam.shape != mu.shape:
        raise DimensionMismatch("zhat multiplier lengths", lam.shape, mu.shape)
    return (lam - mu) / params.alpha


def eval_reduced(problem: Problem, params: PenaltyParams, x, lam, mu) -> float:
    """Merit value with z eliminated: f(x) + <lam, c(x)> - ||lam - mu||^2 / (2 rho).

    Equals eval_full at z = zhat(lam, mu).
    """
    x = np.asarray(x, dtype=float)
    lam = np.asarray(lam, dtype=float)
    mu = np.asarray(mu, dtype=float)
    cx = np.asarray(problem.constraints(x), dtype=float)
    d = lam - mu
    value = float(problem.objective(x)) + float(lam @ cx) - (d @ d) / (2.0 * params.rho)
    if not np.isfinite(value):
        raise EvaluationError("non-finite reduced merit value",
                              state=FullState(x, zhat(params, lam, mu), lam, mu))
    return float(value)


def lambda_hat(problem: Problem, params: PenaltyParams, x, mu) -> np.ndarray:
    """Unique maximizer of the reduced merit in lam: mu + rho * c(x)."""
    mu = np.asarray(mu, dtype=float)
    cx = np.asarray(problem.constraints(np.asarray(x, dtype=float)), dtype=float)
    return mu + params.rho * cx
