"""Instance data model: measurement matrices, binary signals, seeded generators,
and JSON (de)serialization of instance documents.

All types are immutable values; the generators are pure functions of their
arguments including the seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionError, ParseError, SparsityError, ValidationError

_SEED_MASK = (1 << 64) - 1

# Generated instances get lambda = LAMBDA_FACTOR * ||y||^2, floored at
# LAMBDA_FLOOR so a zero measurement vector still carries a positive penalty.
LAMBDA_FACTOR = 1e-3
LAMBDA_FLOOR = 1e-6

# Standard deviation of the planted uncertainty coefficients.
TRUE_D_SCALE = 0.1


def stream(seed: int, *tags: int) -> np.random.Generator:
    """Deterministic generator for a 64-bit seed plus integer stream tags."""
    return np.random.default_rng(np.random.SeedSequence([seed & _SEED_MASK, *tags]))


def _subseed(seed: int, tag: int) -> int:
    """Derive an independent 64-bit child seed from (seed, tag)."""
    ss = np.random.SeedSequence([seed & _SEED_MASK, tag])
    return int(ss.generate_state(1, np.uint64)[0])


def _frozen(a: np.ndarray) -> np.ndarray:
    out = np.array(a)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class MeasurementMatrix:
    """Dense real m-by-n measurement matrix."""

    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise DimensionError(f"measurement matrix must be 2-D with positive shape, got {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValidationError("measurement matrix entries must be finite")
        object.__setattr__(self, "entries", _frozen(a))

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]


@dataclass(frozen=True, eq=False)
class BinarySignal:
    """Vector with entries in {0, 1}; sparsity is the number of ones."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 1:
            raise DimensionError(f"binary signal must be 1-D, got shape {v.shape}")
        if v.size and not np.all((v == 0) | (v == 1)):
            raise ValidationError("binary signal entries must be exactly 0 or 1")
        object.__setattr__(self, "values", _frozen(v.astype(np.int8)))

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def sparsity(self) -> int:
        return int(self.values.sum())

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.values)


@dataclass(frozen=True, eq=False)
class CSInstance:
    """Measurement matrix A, measurement vector y, and penalty weight lambda."""

    A: MeasurementMatrix
    y: np.ndarray
    lam: float

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        if y.ndim != 1:
            raise DimensionError(f"y must be 1-D, got shape {y.shape}")
        if y.shape[0] != self.A.rows:
            raise DimensionError(f"len(y)={y.shape[0]} does not match matrix rows m={self.A.rows}")
        if not np.all(np.isfinite(y)):
            raise ValidationError("y entries must be finite")
        lam = float(self.lam)
        if not np.isfinite(lam) or lam < 0:
            raise ValidationError(f"lambda must be finite and >= 0, got {lam}")
        object.__setattr__(self, "y", _frozen(y))
        object.__setattr__(self, "lam", lam)

    @property
    def m(self) -> int:
        return self.A.rows

    @property
    def n(self) -> int:
        return self.A.cols


@dataclass(frozen=True, eq=False)
class UncertainCSInstance:
    """Nominal matrix A0 plus r perturbation directions, with noise precision gamma.

    The effective measurement operator is A(d) = A0 + sum_i d[i] * perturbations[i];
    gamma doubles as the regularization precision on d.
    """

    A0: MeasurementMatrix
    perturbations: tuple
    y: np.ndarray
    gamma: float
    lam: float

    def __post_init__(self):
        perts = tuple(self.perturbations)
        if len(perts) < 1:
            raise ValidationError("at least one perturbation matrix is required (r >= 1)")
        shape = (self.A0.rows, self.A0.cols)
        for i, p in enumerate(perts):
            if not isinstance(p, MeasurementMatrix):
                raise ValidationError(f"perturbation {i} is not a MeasurementMatrix")
            if (p.rows, p.cols) != shape:
                raise DimensionError(
                    f"perturbation {i} has shape {(p.rows, p.cols)}, expected {shape}")
        y = np.asarray(self.y, dtype=float)
        if y.ndim != 1 or y.shape[0] != self.A0.rows:
            raise DimensionError(f"y must have length m={self.A0.rows}, got shape {y.shape}")
        if not np.all(np.isfinite(y)):
            raise ValidationError("y entries must be finite")
        gamma = float(self.gamma)
        if not np.isfinite(gamma) or gamma <= 0:
            raise ValidationError(f"gamma must be finite and > 0, got {gamma}")
        lam = float(self.lam)
        if not np.isfinite(lam) or lam < 0:
            raise ValidationError(f"lambda must be finite and >= 0, got {lam}")
        object.__setattr__(self, "perturbations", perts)
        object.__setattr__(self, "y", _frozen(y))
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "lam", lam)

    @property
    def m(self) -> int:
        return self.A0.rows

    @property
    def n(self) -> int:
        return self.A0.cols

    @property
    def r(self) -> int:
        return len(self.perturbations)


def default_lambda(y: np.ndarray) -> float:
    """Penalty weight used by the generators: 1e-3 * ||y||^2, floored at 1e-6."""
    return max(LAMBDA_FACTOR * float(np.dot(y, y)), LAMBDA_FLOOR)


def gen_matrix(m: int, n: int, dist: str = "gaussian", seed: int = 0) -> MeasurementMatrix:
    """Draw an m-by-n random measurement matrix.

    gaussian: i.i.d. N(0, 1/m) entries; bernoulli: i.i.d. entries from
    {+1/sqrt(m), -1/sqrt(m)} with equal probability.  Either way the columns
    have unit norm in expectation.
    """
    if m < 1 or n < 1:
        raise DimensionError(f"matrix dimensions must be positive, got m={m}, n={n}")
    rng = stream(seed)
    if dist == "gaussian":
        entries = rng.normal(0.0, 1.0 / np.sqrt(m), size=(m, n))
    elif dist == "bernoulli":
        entries = (2.0 * rng.integers(0, 2, size=(m, n)) - 1.0) / np.sqrt(m)
    else:
        raise ValidationError(f"unknown distribution {dist!r}; expected 'gaussian' or 'bernoulli'")
    return MeasurementMatrix(entries)


def _plant_support(n: int, s: int, rng: np.random.Generator) -> np.ndarray:
    x = np.zeros(n, dtype=np.int8)
    if s:
        x[rng.choice(n, size=s, replace=False)] = 1
    return x


def gen_planted(m: int, n: int, s: int, dist: str = "gaussian", seed: int = 0):
    """Build a planted instance: random A, random s-sparse binary truth, y = A x*.

    Returns (CSInstance, BinarySignal); the instance lambda follows
    default_lambda.
    """
    if s < 0 or s > n:
        raise SparsityError(f"sparsity s={s} must satisfy 0 <= s <= n={n}")
    A = gen_matrix(m, n, dist, _subseed(seed, 1))
    x = _plant_support(n, s, stream(seed, 2))
    y = A.entries @ x.astype(float)
    return CSInstance(A, y, default_lambda(y)), BinarySignal(x)


def gen_uncertain_planted(m: int, n: int, s: int, r: int, gamma: float,
                          noise: bool = False, seed: int = 0):
    """Planted instance with matrix uncertainty: y = (A0 + sum_i d*_i A_i) x* (+ e).

    The true uncertainty vector d* is i.i.d. N(0, TRUE_D_SCALE^2); with
    noise=True, e is i.i.d. N(0, 1/gamma).  Returns
    (UncertainCSInstance, BinarySignal, true_d).
    """
    if s < 0 or s > n:
        raise SparsityError(f"sparsity s={s} must satisfy 0 <= s <= n={n}")
    if r < 1:
        raise ValidationError(f"r must be >= 1, got {r}")
    if not gamma > 0:
        raise ValidationError(f"gamma must be > 0, got {gamma}")
    A0 = gen_matrix(m, n, "gaussian", _subseed(seed, 1))
    perts = tuple(gen_matrix(m, n, "gaussian", _subseed(seed, 10 + i)) for i in range(r))
    x = _plant_support(n, s, stream(seed, 2))
    true_d = stream(seed, 3).normal(0.0, TRUE_D_SCALE, size=r)
    effective = A0.entries + np.tensordot(true_d, np.stack([p.entries for p in perts]), axes=1)
    y = effective @ x.astype(float)
    if noise:
        y = y + stream(seed, 4).normal(0.0, 1.0 / np.sqrt(gamma), size=m)
    inst = UncertainCSInstance(A0, perts, y, gamma, default_lambda(y))
    return inst, BinarySignal(x), _frozen(true_d)


# ---------------------------------------------------------------------------
# JSON documents


def _require(doc: dict, key: str):
    if key not in doc:
        raise ParseError(f"missing required field '{key}'")
    return doc[key]


def _as_number(doc: dict, key: str) -> float:
    v = _require(doc, key)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ParseError(f"field '{key}' must be a number")
    return float(v)


def _as_int(doc: dict, key: str) -> int:
    v = _require(doc, key)
    if isinstance(v, bool) or not isinstance(v, int):
        raise ParseError(f"field '{key}' must be an integer")
    return v


def _as_vector(doc: dict, key: str, length: int) -> np.ndarray:
    v = _require(doc, key)
    if not isinstance(v, list) or any(isinstance(e, bool) or not isinstance(e, (int, float)) for e in v):
        raise ParseError(f"field '{key}' must be a list of numbers")
    if len(v) != length:
        raise DimensionError(f"field '{key}' has length {len(v)}, expected {length}")
    return np.asarray(v, dtype=float)


def _as_matrix(raw, key: str, m: int, n: int) -> np.ndarray:
    if not isinstance(raw, list) or not all(isinstance(row, list) for row in raw):
        raise ParseError(f"field '{key}' must be a list of rows")
    if len(raw) != m:
        raise DimensionError(f"field '{key}' has {len(raw)} rows, expected m={m}")
    for i, row in enumerate(raw):
        if len(row) != n:
            raise DimensionError(f"field '{key}' row {i} has length {len(row)}, expected n={n}")
        if any(isinstance(e, bool) or not isinstance(e, (int, float)) for e in row):
            raise ParseError(f"field '{key}' row {i} must contain numbers only")
    return np.asarray(raw, dtype=float)


def to_document(instance) -> dict:
    """Instance as a plain JSON-ready dict (standard or uncertain form)."""
    if isinstance(instance, CSInstance):
        return {
            "kind": "cs",
            "m": instance.m,
            "n": instance.n,
            "A": instance.A.entries.tolist(),
            "y": instance.y.tolist(),
            "lambda": instance.lam,
        }
    if isinstance(instance, UncertainCSInstance):
        return {
            "kind": "cs-uncertain",
            "m": instance.m,
            "n": instance.n,
            "A0": instance.A0.entries.tolist(),
            "Ai": [p.entries.tolist() for p in instance.perturbations],
            "y": instance.y.tolist(),
            "gamma": instance.gamma,
            "lambda": instance.lam,
        }
    raise ValidationError(f"cannot serialize object of type {type(instance).__name__}")


def from_document(doc: dict):
    """Parse an instance document; inverse of to_document."""
    if not isinstance(doc, dict):
        raise ParseError("document root must be an object")
    kind = _require(doc, "kind")
    m = _as_int(doc, "m")
    n = _as_int(doc, "n")
    if kind == "cs":
        A = _as_matrix(_require(doc, "A"), "A", m, n)
        y = _as_vector(doc, "y", m)
        lam = _as_number(doc, "lambda")
        return CSInstance(MeasurementMatrix(A), y, lam)
    if kind == "cs-uncertain":
        A0 = _as_matrix(_require(doc, "A0"), "A0", m, n)
        raw_ai = _require(doc, "Ai")
        if not isinstance(raw_ai, list) or not raw_ai:
            raise ParseError("field 'Ai' must be a nonempty list of matrices")
        perts = tuple(MeasurementMatrix(_as_matrix(p, f"Ai[{i}]", m, n))
                      for i, p in enumerate(raw_ai))
        y = _as_vector(doc, "y", m)
        gamma = _as_number(doc, "gamma")
        lam = _as_number(doc, "lambda")
        return UncertainCSInstance(MeasurementMatrix(A0), perts, y, gamma, lam)
    raise ParseError(f"field 'kind' must be 'cs' or 'cs-uncertain', got {kind!r}")


def save_instance(instance, path, truth: dict | None = None) -> None:
    """Write an instance document; truth, if given, is a {'x': ..., 'd': ...} block."""
    doc = to_document(instance)
    if truth is not None:
        block = {}
        x = truth.get("x")
        if x is not None:
            vals = x.values if isinstance(x, BinarySignal) else np.asarray(x)
            block["x"] = [int(v) for v in vals]
        d = truth.get("d")
        if d is not None:
            block["d"] = [float(v) for v in np.asarray(d)]
        doc["truth"] = block
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def _read_document(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {path}: {exc}") from exc


def load_instance(path):
    """Load a CSInstance or UncertainCSInstance from a JSON document."""
    return from_document(_read_document(path))


def load_truth(path) -> dict | None:
    """Return the optional ground-truth block of a saved document, if present.

    The result maps 'x' to a BinarySignal and 'd' to a float vector (when
    each is present); returns None when the document carries no truth block.
    """
    doc = _read_document(path)
    block = doc.get("truth")
    if block is None:
        return None
    out = {}
    if "x" in block:
        out["x"] = BinarySignal(np.asarray(block["x"]))
    if "d" in block:
        out["d"] = _frozen(np.asarray(block["d"], dtype=float))
    return out
