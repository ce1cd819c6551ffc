"""Minimization backends for QUBO/Ising models.

solve_exhaustive enumerates every state and is the ground-truth oracle at
desk scale; solve_sa is a classical simulated-annealing surrogate for a
hardware annealer; solve_local is greedy single-flip descent.  All backends
are pure functions of (model, parameters, seed).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ScheduleError, SizeError, ValidationError
from .instances import _SEED_MASK, _frozen
from .qubo import (IsingModel, QuboModel, ising_energy, qubo_energy,
                   qubo_to_ising, spins_to_bits, symmetric_matrix, upper_matrix)

# States within this absolute energy slack of the minimum count as tied
# minimizers; matches the tie tolerance of the uniqueness diagnostic.
TIE_TOL = 1e-12

MINIMIZER_CAP = 1024

_CHUNK = 1 << 16


@dataclass(frozen=True)
class AnnealSchedule:
    """Geometric inverse-temperature ramp over full Metropolis sweeps."""

    sweeps: int = 1000
    beta_initial: float = 0.1
    beta_final: float = 10.0
    reads: int = 32

    def __post_init__(self):
        if self.sweeps < 1:
            raise ScheduleError(f"sweeps must be >= 1, got {self.sweeps}")
        if self.reads < 1:
            raise ScheduleError(f"reads must be >= 1, got {self.reads}")
        if not (0 < self.beta_initial < self.beta_final):
            raise ScheduleError(
                f"need 0 < beta_initial < beta_final, got {self.beta_initial}, {self.beta_final}")


@dataclass(frozen=True, eq=False)
class SolveResult:
    """Best state found by a backend; energies include the model offset.

    reads holds one (state, energy) pair per independent run; minimizers is
    the full tied-optimum list (exhaustive backend only, capped at
    MINIMIZER_CAP with `truncated` set when the cap bites).
    """

    best_state: np.ndarray
    best_energy: float
    reads: tuple
    backend: str
    seed: int = 0
    minimizers: tuple | None = None
    truncated: bool = False


def _max_abs_coefficient(model) -> float:
    lin = model.field if isinstance(model, IsingModel) else model.lin
    quad = model.coupling if isinstance(model, IsingModel) else model.quad
    scale = float(np.max(np.abs(lin))) if lin.size else 0.0
    if quad:
        scale = max(scale, max(abs(v) for v in quad.values()))
    return scale


def default_schedule(model) -> AnnealSchedule:
    """Scale-aware default: beta_final = 10 / max(|coefficients|, 1e-6).

    beta_initial stays at 0.1 unless that would invert the ramp (very large
    coefficients), in which case it drops to beta_final / 100.
    """
    beta_final = 10.0 / max(_max_abs_coefficient(model), 1e-6)
    beta_initial = 0.1 if beta_final > 0.1 else beta_final / 100.0
    return AnnealSchedule(beta_initial=beta_initial, beta_final=beta_final)


def _scalar_energy(model, state) -> float:
    if isinstance(model, QuboModel):
        return qubo_energy(model, state)
    return ising_energy(model, state)


def _chunk_states(n: int, start: int, stop: int, spin: bool) -> np.ndarray:
    codes = np.arange(start, stop, dtype=np.int64)
    bits = ((codes[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(np.int8)
    if spin:
        return (2 * bits - 1).astype(np.int8)
    return bits


def solve_exhaustive(model, cap_n: int = 25) -> SolveResult:
    """Enumerate all 2^n states of a QuboModel or IsingModel.

    Returns the global minimum and every tied minimizer (within TIE_TOL
    absolute, capped).  Deterministic; states are enumerated with variable i
    on bit i of the state code.
    """
    if not isinstance(model, (QuboModel, IsingModel)):
        raise ValidationError(f"cannot solve object of type {type(model).__name__}")
    n = model.n
    if n > cap_n:
        raise SizeError(
            f"n={n} exceeds the exhaustive cap {cap_n}; use the sa or local backend")
    spin = isinstance(model, IsingModel)
    lin = model.field if spin else model.lin
    U = upper_matrix(model)
    total = 1 << n

    def energies(start, stop):
        S = _chunk_states(n, start, stop, spin).astype(float)
        return S @ lin + ((S @ U) * S).sum(axis=1)

    best = np.inf
    for start in range(0, total, _CHUNK):
        e = energies(start, min(start + _CHUNK, total))
        best = min(best, float(e.min()))

    minimizers = []
    truncated = False
    for start in range(0, total, _CHUNK):
        stop = min(start + _CHUNK, total)
        e = energies(start, stop)
        hits = np.flatnonzero(e <= best + TIE_TOL)
        if hits.size:
            states = _chunk_states(n, start, stop, spin)
            for k in hits:
                if len(minimizers) >= MINIMIZER_CAP:
                    truncated = True
                    break
                minimizers.append(_frozen(states[k]))
            if truncated:
                break
    best_state = minimizers[0]
    best_energy = _scalar_energy(model, best_state) + model.offset
    return SolveResult(
        best_state=best_state,
        best_energy=best_energy,
        reads=((best_state, best_energy),),
        backend="exhaustive",
        minimizers=tuple(minimizers),
        truncated=truncated,
    )


def _read_rng(seed: int, read: int) -> np.random.Generator:
    # Each read r draws from SeedSequence([seed, r]): first the start state,
    # then sweeps x n acceptance uniforms in sweep-major order.
    return np.random.default_rng(np.random.SeedSequence([seed & _SEED_MASK, read]))


def solve_sa(model: IsingModel, sched: AnnealSchedule | None = None, seed: int = 0) -> SolveResult:
    """Simulated annealing on an Ising model.

    Runs sched.reads independent Metropolis chains (vectorized across reads),
    each sweeping spins in ascending index order while the inverse temperature
    ramps geometrically from beta_initial to beta_final.  Each read reports
    the best state seen along its chain; the result is the best over reads.
    """
    if not isinstance(model, IsingModel):
        raise ValidationError("solve_sa expects an IsingModel; convert QUBOs with qubo_to_ising")
    if sched is None:
        sched = default_schedule(model)
    n, reads = model.n, sched.reads
    h = model.field
    J = symmetric_matrix(model)
    betas = np.geomspace(sched.beta_initial, sched.beta_final, sched.sweeps)

    rngs = [_read_rng(seed, r) for r in range(reads)]
    Z = np.stack([2.0 * rng.integers(0, 2, size=n) - 1.0 for rng in rngs])
    Uq = upper_matrix(model)
    E = Z @ h + ((Z @ Uq) * Z).sum(axis=1)
    best_E = E.copy()
    best_Z = Z.copy()

    for k in range(sched.sweeps):
        beta = betas[k]
        U = np.stack([rng.random(n) for rng in rngs])
        for i in range(n):
            d_e = -2.0 * Z[:, i] * (Z @ J[:, i] + h[i])
            accept = U[:, i] < np.exp(np.minimum(-beta * d_e, 0.0))
            if accept.any():
                Z[accept, i] = -Z[accept, i]
                E[accept] += d_e[accept]
                improved = E < best_E
                if improved.any():
                    best_E[improved] = E[improved]
                    best_Z[improved] = Z[improved]

    read_results = []
    for r in range(reads):
        state = _frozen(best_Z[r].astype(np.int8))
        read_results.append((state, ising_energy(model, state) + model.offset))
    best_r = min(range(reads), key=lambda r: read_results[r][1])
    return SolveResult(
        best_state=read_results[best_r][0],
        best_energy=read_results[best_r][1],
        reads=tuple(read_results),
        backend="sa",
        seed=seed,
    )


def solve_local(model: IsingModel, starts: int = 32, seed: int = 0) -> SolveResult:
    """Greedy descent: repeatedly flip the spin with the largest energy decrease.

    Ties break toward the lowest index; a state is returned once no single
    flip lowers the energy (1-flip-optimal).  Best over `starts` random starts.
    """
    if not isinstance(model, IsingModel):
        raise ValidationError("solve_local expects an IsingModel")
    if starts < 1:
        raise ValidationError(f"starts must be >= 1, got {starts}")
    n = model.n
    h = model.field
    J = symmetric_matrix(model)

    read_results = []
    for r in range(starts):
        z = 2.0 * _read_rng(seed, r).integers(0, 2, size=n) - 1.0
        while True:
            d_e = -2.0 * z * (J @ z + h)
            i = int(np.argmin(d_e))
            if d_e[i] >= 0.0:
                break
            z[i] = -z[i]
        state = _frozen(z.astype(np.int8))
        read_results.append((state, ising_energy(model, state) + model.offset))
    best_r = min(range(starts), key=lambda r: read_results[r][1])
    return SolveResult(
        best_state=read_results[best_r][0],
        best_energy=read_results[best_r][1],
        reads=tuple(read_results),
        backend="local",
        seed=seed,
    )


def solve_qubo(model: QuboModel, backend: str, *, seed: int = 0,
               sched: AnnealSchedule | None = None, starts: int = 32,
               cap_n: int = 25) -> SolveResult:
    """Minimize a QUBO with the named backend; result states are binary.

    Heuristic backends run on the Ising transform; their spin states are
    mapped back to bits and energies restated against the binary model.
    """
    if backend == "exhaustive":
        return solve_exhaustive(model, cap_n=cap_n)
    ising = qubo_to_ising(model)
    if backend == "sa":
        res = solve_sa(ising, sched, seed=seed)
    elif backend == "local":
        res = solve_local(ising, starts=starts, seed=seed)
    else:
        raise ValidationError(
            f"unknown backend {backend!r}; expected exhaustive, sa, or local")
    reads = []
    for z, _ in res.reads:
        x = _frozen(spins_to_bits(z))
        reads.append((x, qubo_energy(model, x) + model.offset))
    best_r = min(range(len(reads)), key=lambda r: reads[r][1])
    return SolveResult(
        best_state=reads[best_r][0],
        best_energy=reads[best_r][1],
        reads=tuple(reads),
        backend=backend,
        seed=seed,
    )
