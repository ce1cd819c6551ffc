"""Recovery-theory diagnostics: mutual coherence, brute-force restricted
isometry constants, uniqueness verification by enumeration, and recovery
quality metrics.

The coherence/RIP sufficient-condition constants quoted in reports are
advisory; nothing here enforces them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import DegenerateColumnError, DimensionError, SizeError, ValidationError
from .instances import BinarySignal, CSInstance, MeasurementMatrix

# Classical sufficient condition for l0/l1 equivalence via coherence: the
# sparsity bound ||x||_0 < 0.5*(1 + 1/mu(A)).  (Some write-ups misprint this
# as a bound on mu itself, which every mu in (0,1] would satisfy.)
COHERENCE_SPARSITY_BOUND = "||x||_0 < 0.5*(1 + 1/mu)"

# Documented sufficient-condition constant: l0/l1 equivalence for s-sparse
# signals when delta_{2s} < 0.4931.
RIP_2S_THRESHOLD = 0.4931

# Absolute energy slack under which two states count as tied minimizers.
TIE_TOL = 1e-12

_CHUNK = 1 << 16


@dataclass(frozen=True, eq=False)
class RecoveryMetrics:
    exact_match: bool
    hamming: int
    support_precision: float
    support_recall: float
    support_f1: float
    residual: float


def mutual_coherence(A: MeasurementMatrix) -> float:
    """Largest normalized correlation between two distinct columns, in [0, 1]."""
    E = A.entries
    if A.cols < 2:
        raise ValidationError("mutual coherence needs at least two columns")
    norms = np.sqrt((E * E).sum(axis=0))
    if np.any(norms == 0.0):
        raise DegenerateColumnError(
            f"column {int(np.argmin(norms))} is identically zero")
    G = np.abs((E / norms).T @ (E / norms))
    np.fill_diagonal(G, 0.0)
    return min(float(G.max()), 1.0)


def rip_constant(A: MeasurementMatrix, s: int, enum_cap: int = 10 ** 6) -> float:
    """Exact order-s restricted isometry constant by subset enumeration.

    Returns the smallest delta with (1-delta)||x||^2 <= ||Ax||^2 <=
    (1+delta)||x||^2 for all s-sparse x, i.e. the worst singular-value
    distortion over all s-column submatrices.  Verification is NP-hard in
    general, hence the enumeration cap.
    """
    n = A.cols
    if s < 1 or s > n:
        raise ValidationError(f"s must satisfy 1 <= s <= n={n}, got {s}")
    count = comb(n, s)
    if count > enum_cap:
        raise SizeError(f"C({n},{s}) = {count} exceeds the enumeration cap {enum_cap}")
    E = A.entries
    delta = 0.0
    for cols in itertools.combinations(range(n), s):
        sv = np.linalg.svd(E[:, cols], compute_uv=False)
        delta = max(delta, float(sv[0] ** 2 - 1.0), float(1.0 - sv[-1] ** 2))
    return delta


def _binary_chunk(n: int, start: int, stop: int) -> np.ndarray:
    codes = np.arange(start, stop, dtype=np.int64)
    return ((codes[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(np.int8)


def verify_uniqueness(inst: CSInstance, cap_n: int = 20):
    """Enumerate every binary x under ||y - Ax||^2 + lambda*||x||_0.

    Returns (unique, minimizers): all global minimizers within TIE_TOL
    absolute, and whether exactly one exists.
    """
    n = inst.n
    if n > cap_n:
        raise SizeError(f"n={n} exceeds the uniqueness enumeration cap {cap_n}")
    A, y, lam = inst.A.entries, inst.y, inst.lam
    total = 1 << n

    def objectives(start, stop):
        X = _binary_chunk(n, start, stop).astype(float)
        R = X @ A.T - y
        return (R * R).sum(axis=1) + lam * X.sum(axis=1)

    best = np.inf
    for start in range(0, total, _CHUNK):
        best = min(best, float(objectives(start, min(start + _CHUNK, total)).min()))

    minimizers = []
    for start in range(0, total, _CHUNK):
        stop = min(start + _CHUNK, total)
        obj = objectives(start, stop)
        hits = np.flatnonzero(obj <= best + TIE_TOL)
        if hits.size:
            states = _binary_chunk(n, start, stop)
            minimizers.extend(BinarySignal(states[k]) for k in hits)
    return len(minimizers) == 1, minimizers


def recovery_metrics(x_hat, x_true, inst: CSInstance) -> RecoveryMetrics:
    """Support precision/recall/F1, Hamming distance, and residual of x_hat.

    Conventions: precision = 1 when x_hat is all-zero, recall = 1 when x_true
    is all-zero, and F1 = 0 when precision + recall = 0.
    """
    xh = x_hat if isinstance(x_hat, BinarySignal) else BinarySignal(np.asarray(x_hat))
    xt = x_true if isinstance(x_true, BinarySignal) else BinarySignal(np.asarray(x_true))
    if len(xh) != len(xt) or len(xh) != inst.n:
        raise DimensionError(
            f"signals of lengths {len(xh)}, {len(xt)} do not match instance n={inst.n}")
    hamming = int(np.count_nonzero(xh.values != xt.values))
    hits = int(np.count_nonzero((xh.values == 1) & (xt.values == 1)))
    precision = 1.0 if xh.sparsity == 0 else hits / xh.sparsity
    recall = 1.0 if xt.sparsity == 0 else hits / xt.sparsity
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    resid = inst.y - inst.A.entries @ xh.values.astype(float)
    return RecoveryMetrics(
        exact_match=hamming == 0,
        hamming=hamming,
        support_precision=precision,
        support_recall=recall,
        support_f1=f1,
        residual=float(np.linalg.norm(resid)),
    )
