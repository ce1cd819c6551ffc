"""Quadratic binary/spin models: exact QUBO construction from an instance,
energy evaluation, the binary<->spin transform with offset bookkeeping, and a
line-oriented text format for model files.

The constant ||y||^2 dropped by the quadratic expansion is carried in the
model offset so that energy + offset always equals the original objective
||y - Ax||^2 + lambda*||x||_0.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType

import numpy as np

from .errors import DimensionError, DomainError, ParseError, ValidationError
from .instances import BinarySignal, CSInstance, _frozen


def _check_terms(n, linear, quadratic, offset, what):
    if n < 1:
        raise ValidationError(f"{what} needs n >= 1, got {n}")
    lin = np.asarray(linear, dtype=float)
    if lin.shape != (n,):
        raise DimensionError(f"{what} linear terms must have shape ({n},), got {lin.shape}")
    if not np.all(np.isfinite(lin)):
        raise ValidationError(f"{what} linear terms must be finite")
    quad = {}
    for key, value in dict(quadratic).items():
        i, j = key
        i, j = int(i), int(j)
        if not (0 <= i < j < n):
            raise ValidationError(
                f"{what} quadratic key ({i},{j}) must satisfy 0 <= i < j < n={n}"
                " (upper-triangular storage; (j,i) duplicates are rejected)")
        v = float(value)
        if not np.isfinite(v):
            raise ValidationError(f"{what} quadratic term ({i},{j}) must be finite")
        quad[(i, j)] = v
    offset = float(offset)
    if not np.isfinite(offset):
        raise ValidationError(f"{what} offset must be finite")
    return _frozen(lin), MappingProxyType(quad), offset


@dataclass(frozen=True, eq=False)
class QuboModel:
    """Minimize sum_i lin[i] x_i + sum_{i<j} quad[i,j] x_i x_j over x in {0,1}^n.

    offset is the constant added back to energies to recover the original
    objective value.
    """

    n: int
    lin: np.ndarray
    quad: dict
    offset: float = 0.0

    def __post_init__(self):
        lin, quad, offset = _check_terms(self.n, self.lin, self.quad, self.offset, "QUBO")
        object.__setattr__(self, "lin", lin)
        object.__setattr__(self, "quad", quad)
        object.__setattr__(self, "offset", offset)


@dataclass(frozen=True, eq=False)
class IsingModel:
    """Minimize sum_i field[i] z_i + sum_{i<j} coupling[i,j] z_i z_j over z in {-1,+1}^n."""

    n: int
    field: np.ndarray
    coupling: dict
    offset: float = 0.0

    def __post_init__(self):
        field, coupling, offset = _check_terms(
            self.n, self.field, self.coupling, self.offset, "Ising")
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "coupling", coupling)
        object.__setattr__(self, "offset", offset)


def build_qubo(inst: CSInstance) -> QuboModel:
    """QUBO whose energy + offset equals ||y - Ax||^2 + lambda*||x||_0.

    lin[i] = lambda + sum_t A[t,i] * (A[t,i] - 2 y[t])
    quad[i,j] = 2 * (A^T A)[i,j]            for i < j (exact zeros omitted)
    offset = ||y||^2
    """
    A, y, lam = inst.A.entries, inst.y, inst.lam
    gram = A.T @ A
    lin = lam - 2.0 * (A.T @ y) + np.diagonal(gram)
    n = inst.n
    quad = {}
    for i in range(n):
        for j in range(i + 1, n):
            v = 2.0 * gram[i, j]
            if v != 0.0:
                quad[(i, j)] = v
    return QuboModel(n, lin, quad, float(y @ y))


def _as_binary(x, n) -> np.ndarray:
    v = x.values if isinstance(x, BinarySignal) else np.asarray(x)
    if v.ndim != 1 or v.shape[0] != n:
        raise DimensionError(f"state must have length {n}, got shape {v.shape}")
    if v.size and not np.all((v == 0) | (v == 1)):
        raise DomainError("binary state entries must be 0 or 1")
    return v.astype(float)


def _as_spins(z, n) -> np.ndarray:
    v = np.asarray(z)
    if v.ndim != 1 or v.shape[0] != n:
        raise DimensionError(f"spin state must have length {n}, got shape {v.shape}")
    if v.size and not np.all((v == -1) | (v == 1)):
        raise DomainError("spin state entries must be -1 or +1")
    return v.astype(float)


def qubo_energy(q: QuboModel, x) -> float:
    """Energy of a binary state, offset excluded."""
    v = _as_binary(x, q.n)
    e = float(q.lin @ v)
    for (i, j), c in q.quad.items():
        e += c * v[i] * v[j]
    return e


def ising_energy(s: IsingModel, z) -> float:
    """Energy of a spin state, offset excluded."""
    v = _as_spins(z, s.n)
    e = float(s.field @ v)
    for (i, j), c in s.coupling.items():
        e += c * v[i] * v[j]
    return e


def objective(inst: CSInstance, x) -> float:
    """||y - Ax||^2 + lambda*||x||_0, computed directly from the instance."""
    v = _as_binary(x, inst.n)
    resid = inst.y - inst.A.entries @ v
    return float(resid @ resid) + inst.lam * float(np.count_nonzero(v))


def qubo_to_ising(q: QuboModel) -> IsingModel:
    """Change of variables x_i = (z_i + 1)/2.

    field[i]    = lin[i]/2 + (1/4) sum_{j != i} quad[min(i,j), max(i,j)]
    coupling    = quad/4
    new offset  = offset + (1/2) sum_i lin[i] + (1/4) sum_{i<j} quad[i,j]
    so spin energies plus the new offset match binary energies plus the old.
    """
    field = q.lin / 2.0
    coupling = {}
    offset = q.offset + 0.5 * float(q.lin.sum())
    for (i, j), c in q.quad.items():
        coupling[(i, j)] = c / 4.0
        field[i] += c / 4.0
        field[j] += c / 4.0
        offset += c / 4.0
    return IsingModel(q.n, field, coupling, offset)


def spins_to_bits(z) -> np.ndarray:
    """Map {-1,+1} spins to {0,1} bits."""
    v = np.asarray(z)
    return ((v + 1) // 2).astype(np.int8)


def bits_to_spins(x) -> np.ndarray:
    """Map {0,1} bits to {-1,+1} spins."""
    v = x.values if isinstance(x, BinarySignal) else np.asarray(x)
    return (2 * v.astype(np.int8) - 1).astype(np.int8)


def upper_matrix(model) -> np.ndarray:
    """Dense upper-triangular matrix of the quadratic terms."""
    quad = model.quad if isinstance(model, QuboModel) else model.coupling
    U = np.zeros((model.n, model.n))
    for (i, j), c in quad.items():
        U[i, j] = c
    return U


def symmetric_matrix(model) -> np.ndarray:
    """Dense symmetric matrix J with J[i,j] = J[j,i] = quadratic term, zero diagonal."""
    U = upper_matrix(model)
    return U + U.T


# ---------------------------------------------------------------------------
# Text format: "# type ising|qubo", "# n <int>", "# offset <real>", then one
# "h <i> <real>" line per linear term and one "J <i> <j> <real>" per quadratic
# term with i < j.  Indices are 0-based.


def dumps_model(model) -> str:
    if isinstance(model, QuboModel):
        kind, lin, quad = "qubo", model.lin, model.quad
    elif isinstance(model, IsingModel):
        kind, lin, quad = "ising", model.field, model.coupling
    else:
        raise ValidationError(f"cannot serialize object of type {type(model).__name__}")
    lines = [f"# type {kind}", f"# n {model.n}", f"# offset {model.offset!r}"]
    for i in range(model.n):
        lines.append(f"h {i} {float(lin[i])!r}")
    for (i, j) in sorted(quad):
        lines.append(f"J {i} {j} {quad[(i, j)]!r}")
    return "\n".join(lines) + "\n"


def save_model(model, path) -> None:
    Path(path).write_text(dumps_model(model))


def loads_model(text: str):
    """Parse the text format back into a QuboModel or IsingModel."""
    kind = None
    n = None
    offset = None
    lin = {}
    quad = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "#":
            if len(parts) >= 3 and parts[1] == "type":
                kind = parts[2]
            elif len(parts) >= 3 and parts[1] == "n":
                n = int(parts[2])
            elif len(parts) >= 3 and parts[1] == "offset":
                offset = float(parts[2])
            continue
        if parts[0] == "h":
            if len(parts) != 3:
                raise ParseError(f"line {lineno}: 'h' record needs index and value")
            i, v = int(parts[1]), float(parts[2])
            if i in lin:
                raise ParseError(f"line {lineno}: duplicate 'h' record for index {i}")
            lin[i] = v
        elif parts[0] == "J":
            if len(parts) != 4:
                raise ParseError(f"line {lineno}: 'J' record needs two indices and a value")
            i, j, v = int(parts[1]), int(parts[2]), float(parts[3])
            if i >= j:
                raise ParseError(f"line {lineno}: 'J' indices must satisfy i < j")
            if (i, j) in quad:
                raise ParseError(f"line {lineno}: duplicate 'J' record for ({i},{j})")
            quad[(i, j)] = v
        else:
            raise ParseError(f"line {lineno}: unrecognized record {parts[0]!r}")
    if kind not in ("qubo", "ising"):
        raise ParseError("missing or invalid '# type' header (expected qubo or ising)")
    if n is None:
        raise ParseError("missing '# n' header")
    if offset is None:
        raise ParseError("missing '# offset' header")
    if any(i < 0 or i >= n for i in lin):
        raise ParseError("'h' record index out of range")
    vec = np.zeros(n)
    for i, v in lin.items():
        vec[i] = v
    cls = QuboModel if kind == "qubo" else IsingModel
    try:
        return cls(n, vec, quad, offset)
    except ValidationError as exc:
        raise ParseError(str(exc)) from exc


def load_model(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    return loads_model(text)
