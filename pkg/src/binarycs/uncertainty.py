"""Recovery under measurement-matrix uncertainty.

The measurement operator is only known as A(d) = A0 + sum_i d[i]*A_i with an
unknown coefficient vector d.  Recovery alternates between an exact binary
minimization over x (via the QUBO route) and a closed-form ridge update of d,
driving down

    J(x, d) = ||A(d) x - y||^2 + ||d||^2 / gamma + lambda * ||x||_0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import DimensionError, NumericError, ValidationError
from .instances import BinarySignal, CSInstance, MeasurementMatrix, UncertainCSInstance, _frozen, _subseed
from .qubo import _as_binary, build_qubo
from .solvers import AnnealSchedule, solve_qubo

# An iteration whose objective drops by no more than this counts as stalled;
# two stalled iterations in a row terminate the loop.
STAGNATION_TOL = 1e-12
STAGNATION_RUNS = 2


@dataclass(frozen=True, eq=False)
class IterationRecord:
    x: BinarySignal
    d: np.ndarray
    objective: float
    residual: float


@dataclass(frozen=True, eq=False)
class RecoveryTrace:
    """Per-iteration history of the alternating minimization loop."""

    iterations: tuple
    terminated_by: str  # "epsilon" | "max_iters" | "stagnation"
    converged: bool


def assemble_A(inst: UncertainCSInstance, d) -> MeasurementMatrix:
    """A(d) = A0 + sum_i d[i] * perturbations[i]."""
    d = np.asarray(d, dtype=float)
    if d.shape != (inst.r,):
        raise DimensionError(f"d must have length r={inst.r}, got shape {d.shape}")
    M = inst.A0.entries.copy()
    for di, Ai in zip(d, inst.perturbations):
        M += di * Ai.entries
    return MeasurementMatrix(M)


def build_Gc(inst: UncertainCSInstance, x):
    """Least-squares data for the d-subproblem: G[:,i] = A_i x, c = y - A0 x.

    For any d, ||A(d) x - y|| = ||G d - c||.
    """
    v = _as_binary(x, inst.n)
    G = np.column_stack([Ai.entries @ v for Ai in inst.perturbations])
    c = inst.y - inst.A0.entries @ v
    return G, c


def solve_d(G, c, gamma: float) -> np.ndarray:
    """Unique minimizer of ||G d - c||^2 + ||d||^2/gamma.

    d* = (G^T G + I/gamma)^{-1} G^T c, computed with a Cholesky solve; the
    system matrix is positive definite for every gamma > 0.
    """
    G = np.asarray(G, dtype=float)
    c = np.asarray(c, dtype=float)
    if G.ndim != 2 or c.ndim != 1 or G.shape[0] != c.shape[0]:
        raise DimensionError(f"G ({G.shape}) and c ({c.shape}) do not conform")
    if not (np.isfinite(gamma) and gamma > 0):
        raise ValidationError(f"gamma must be finite and > 0, got {gamma}")
    if not (np.all(np.isfinite(G)) and np.all(np.isfinite(c))):
        raise NumericError("solve_d requires finite G and c")
    r = G.shape[1]
    H = G.T @ G + np.eye(r) / gamma
    try:
        return cho_solve(cho_factor(H, lower=True), G.T @ c)
    except LinAlgError as exc:
        raise NumericError(f"ridge system was not positive definite: {exc}") from exc


def uncertain_objective(inst: UncertainCSInstance, x, d) -> float:
    """J(x, d) = ||A(d)x - y||^2 + ||d||^2/gamma + lambda*||x||_0."""
    v = _as_binary(x, inst.n)
    d = np.asarray(d, dtype=float)
    resid = assemble_A(inst, d).entries @ v - inst.y
    return (float(resid @ resid) + float(d @ d) / inst.gamma
            + inst.lam * float(np.count_nonzero(v)))


def _residual_norm(inst, x, d) -> float:
    v = _as_binary(x, inst.n)
    resid = assemble_A(inst, d).entries @ v - inst.y
    return float(np.linalg.norm(resid))


def recover(inst: UncertainCSInstance, *, backend: str = "exhaustive",
            eps: float = 1e-6, max_iters: int = 50, seed: int = 0,
            sched: AnnealSchedule | None = None, starts: int = 32,
            cap_n: int = 25) -> RecoveryTrace:
    """Alternating minimization: x-step by QUBO solve, d-step in closed form.

    Starts from d = 0 and x = 0.  Each x-step candidate is accepted only if
    it does not increase J (elitist acceptance, so heuristic backends cannot
    break the descent property); the d-step is guarded the same way against
    rounding.  Stops when the residual ||A(d)x - y|| drops to eps, when
    max_iters is reached, or when J stalls for STAGNATION_RUNS iterations.
    """
    if not isinstance(inst, UncertainCSInstance):
        raise ValidationError("recover expects an UncertainCSInstance")
    if not eps > 0:
        raise ValidationError(f"eps must be > 0, got {eps}")
    if max_iters < 1:
        raise ValidationError(f"max_iters must be >= 1, got {max_iters}")

    x = BinarySignal(np.zeros(inst.n, dtype=np.int8))
    d = np.zeros(inst.r)
    records = []
    prev_obj = None
    stalled = 0
    terminated_by = "max_iters"

    for it in range(1, max_iters + 1):
        q = build_qubo(CSInstance(assemble_A(inst, d), inst.y, inst.lam))
        result = solve_qubo(q, backend, seed=_subseed(seed, it), sched=sched,
                            starts=starts, cap_n=cap_n)
        candidate = BinarySignal(result.best_state)
        if uncertain_objective(inst, candidate, d) <= uncertain_objective(inst, x, d):
            x = candidate

        G, c = build_Gc(inst, x)
        d_new = solve_d(G, c, inst.gamma)
        if uncertain_objective(inst, x, d_new) <= uncertain_objective(inst, x, d):
            d = d_new

        obj = uncertain_objective(inst, x, d)
        residual = _residual_norm(inst, x, d)
        records.append(IterationRecord(x, _frozen(d.copy()), obj, residual))

        if residual <= eps:
            terminated_by = "epsilon"
            break
        if it == max_iters:
            terminated_by = "max_iters"
            break
        if prev_obj is not None:
            stalled = stalled + 1 if prev_obj - obj <= STAGNATION_TOL else 0
            if stalled >= STAGNATION_RUNS:
                terminated_by = "stagnation"
                break
        prev_obj = obj

    converged = records[-1].residual <= eps
    return RecoveryTrace(tuple(records), terminated_by, converged)
