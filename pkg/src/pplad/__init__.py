"""First-order solver for nonconvex programs with nonlinear equality constraints.

The method works on a perturbed Lagrangian whose dual proximal term makes
it strongly concave in each multiplier, giving closed-form multiplier and
perturbation updates inside a single projected-gradient loop.  A damped,
geometrically budgeted step on the auxiliary multiplier keeps all dual
iterates bounded without constraint qualifications or safeguards, which is
what lets the built-in test problems (all of which violate LICQ at their
solutions) converge to KKT points.
"""

from .diagnostics import (InvariantViolation, KktReport, RunHistory, TraceRecord,
                          TRACE_COLUMNS, check_trace, feasibility_residual,
                          kkt_report, optimality_residual, perturbation_ratio,
                          read_trace_csv, tail_step_maxima, write_trace_csv)
from .lagrangian import (FullState, PenaltyParams, eval_full, eval_reduced,
                         grad_x, lambda_hat, zhat)
from .model import (Ball, Box, DimensionMismatch, EvaluationError,
                    LipschitzHints, NonnegativeOrthant, Problem,
                    ProjectionKind, ValidationCheck, ValidationReport,
                    WholeSpace, project, projector, validate)
from .numcheck import CompareResult, FdSettings, compare, fd_gradient, fd_jacobian
from .problems import (BUILTIN_PROBLEMS, DEFAULT_START, QcqpSpec, example1,
                       example2, example2_spec, example3, from_qcqp)
from .solver import (IterateState, SolveOutcome, SolveStatus, SolverParams,
                     gamma, initial_state, iterate, solve, step_lambda, step_mu,
                     step_x, step_z)

__version__ = "0.1.0"

__all__ = [
    "Ball", "Box", "BUILTIN_PROBLEMS", "CompareResult", "DEFAULT_START",
    "DimensionMismatch", "EvaluationError", "FdSettings", "FullState",
    "InvariantViolation", "IterateState", "KktReport", "LipschitzHints",
    "NonnegativeOrthant", "PenaltyParams", "Problem", "ProjectionKind",
    "QcqpSpec", "RunHistory", "SolveOutcome", "SolveStatus", "SolverParams",
    "TRACE_COLUMNS", "TraceRecord", "ValidationCheck", "ValidationReport",
    "WholeSpace", "check_trace", "compare", "eval_full", "eval_reduced",
    "example1", "example2", "example2_spec", "example3", "fd_gradient",
    "fd_jacobian", "feasibility_residual", "from_qcqp", "gamma",
    "grad_x", "initial_state", "iterate", "kkt_report", "lambda_hat",
    "optimality_residual", "perturbation_ratio", "project", "projector",
    "read_trace_csv", "solve", "step_lambda", "step_mu", "step_x", "step_z",
    "tail_step_maxima", "validate", "write_trace_csv", "zhat",
]
